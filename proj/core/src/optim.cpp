/**
 * Copyright 2026, the mangrove-toolkit authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mangrove/optim.hpp"

#include <cmath>

namespace mangrove::nn {

void TrainConfig::validate() const {
    if (!(lr_min < lr0)) throw ConfigError("TrainConfig: lr_min must be < lr0");
    if (lr_min < 0.0 || lr0 <= 0.0) throw ConfigError("TrainConfig: learning rates must be positive");
    if (t0_epochs < 1) throw ConfigError("TrainConfig: t0_epochs must be >= 1");
    if (t_mult < 1) throw ConfigError("TrainConfig: t_mult must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("TrainConfig: patience must be >= 1");
    if (label_smoothing < 0.0 || label_smoothing >= 0.5)
        throw ConfigError("TrainConfig: label_smoothing must be in [0, 0.5)");
    if (weight_decay < 0.0) throw ConfigError("TrainConfig: weight_decay must be >= 0");
    if (ce_weight < 0.0 || dice_weight < 0.0)
        throw ConfigError("TrainConfig: loss weights must be >= 0");
}

double lr_at(double epoch_fraction, const TrainConfig& cfg) {
    if (epoch_fraction < 0.0) throw ArgumentError("lr_at: epoch_fraction must be >= 0");
    double t = epoch_fraction;
    double period = static_cast<double>(cfg.t0_epochs);
    while (t >= period) {
        t -= period;
        period *= static_cast<double>(cfg.t_mult);
    }
    return cfg.lr_min + 0.5 * (cfg.lr0 - cfg.lr_min) * (1.0 + std::cos(M_PI * t / period));
}

std::pair<EarlyStopState, bool> early_stop_update(EarlyStopState state, double epoch_miou,
                                                  int patience) {
    if (epoch_miou < 0.0 || epoch_miou > 1.0)
        throw ArgumentError("early_stop_update: mIoU must be in [0, 1]");
    ++state.epochs_seen;
    if (!state.best_miou || epoch_miou > *state.best_miou) {
        state.best_miou = epoch_miou;
        state.best_epoch = state.epochs_seen;
        state.epochs_since_improve = 0;
    } else {
        ++state.epochs_since_improve;
    }
    return {state, state.epochs_since_improve >= patience};
}

AdamW::AdamW(std::vector<Param*> params, double weight_decay, double beta1, double beta2,
             double eps)
    : params_(std::move(params)),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    decay_.reserve(params_.size());
    for (Param* p : params_) {
        const Tensor& t = p->value;
        m_.push_back(Tensor(t.n, t.c, t.h, t.w));
        v_.push_back(Tensor(t.n, t.c, t.h, t.w));
        decay_.push_back(!p->name.ends_with(".bias"));
        p->ensure_grad();
    }
}

void AdamW::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void AdamW::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        const double wd = decay_[i] ? weight_decay_ : 0.0;
        for (size_t j = 0; j < p.value.data.size(); ++j) {
            const double g = p.grad.data[j];
            double& m = m_[i].data[j];
            double& v = v_[i].data[j];
            m = beta1_ * m + (1.0 - beta1_) * g;
            v = beta2_ * v + (1.0 - beta2_) * g * g;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p.value.data[j] -= lr * (mhat / (std::sqrt(vhat) + eps_) + wd * p.value.data[j]);
        }
    }
}

} // namespace mangrove::nn
