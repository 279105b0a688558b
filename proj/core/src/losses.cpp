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
#include "mangrove/losses.hpp"

#include <cmath>

namespace mangrove::nn {

namespace {

void check_shapes(const Tensor& a, const Tensor& b, const Tensor* valid, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    if (valid && !valid->same_shape(a))
        throw ShapeError(std::string(what) + ": validity mask shape mismatch");
}

inline bool is_valid(const Tensor* valid, size_t i) {
    return valid == nullptr || valid->data[i] != 0.0;
}

} // namespace

double soft_cross_entropy(const Tensor& logits, const Tensor& targets, double smoothing,
                          const Tensor* valid) {
    check_shapes(logits, targets, valid, "soft_cross_entropy");
    if (smoothing < 0.0 || smoothing >= 0.5)
        throw ArgumentError("soft_cross_entropy: smoothing must be in [0, 0.5)");
    double sum = 0.0;
    size_t nvalid = 0;
    for (size_t i = 0; i < logits.data.size(); ++i) {
        if (!is_valid(valid, i)) continue;
        double z = logits.data[i];
        double ys = targets.data[i] * (1.0 - smoothing) + smoothing * 0.5;
        sum += ys * softplus(-z) + (1.0 - ys) * softplus(z);
        ++nvalid;
    }
    if (nvalid == 0) throw UndefinedLossError("soft_cross_entropy: no valid pixels");
    return sum / static_cast<double>(nvalid);
}

double dice_loss(const Tensor& probabilities, const Tensor& targets, double eps,
                 const Tensor* valid) {
    check_shapes(probabilities, targets, valid, "dice_loss");
    double s_py = 0.0, s_p = 0.0, s_y = 0.0;
    for (size_t i = 0; i < probabilities.data.size(); ++i) {
        if (!is_valid(valid, i)) continue;
        double p = probabilities.data[i], y = targets.data[i];
        s_py += p * y;
        s_p += p;
        s_y += y;
    }
    return 1.0 - (2.0 * s_py + eps) / (s_p + s_y + eps);
}

namespace {

double combined_loss_impl(const Tensor& logits, const Tensor& targets, const LossConfig& cfg,
                          const Tensor* valid, Tensor* grad_out) {
    check_shapes(logits, targets, valid, "combined_loss");
    if (cfg.smoothing < 0.0 || cfg.smoothing >= 0.5)
        throw ArgumentError("combined_loss: smoothing must be in [0, 0.5)");

    const size_t n = logits.data.size();
    const bool want_grad = grad_out != nullptr;

    double ce_sum = 0.0, s_py = 0.0, s_p = 0.0, s_y = 0.0;
    size_t nvalid = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!is_valid(valid, i)) continue;
        double z = logits.data[i], y = targets.data[i];
        double ys = y * (1.0 - cfg.smoothing) + cfg.smoothing * 0.5;
        ce_sum += ys * softplus(-z) + (1.0 - ys) * softplus(z);
        double p = sigmoid(z);
        s_py += p * y;
        s_p += p;
        s_y += y;
        ++nvalid;
    }
    if (nvalid == 0) throw UndefinedLossError("combined_loss: no valid pixels");

    const double ce = ce_sum / static_cast<double>(nvalid);
    const double num = 2.0 * s_py + cfg.dice_eps;
    const double den = s_p + s_y + cfg.dice_eps;
    const double dice = 1.0 - num / den;
    const double loss = cfg.ce_weight * ce + cfg.dice_weight * dice;

    if (want_grad) {
        for (size_t i = 0; i < n; ++i) {
            if (!is_valid(valid, i)) {
                grad_out->data[i] = 0.0;
                continue;
            }
            double z = logits.data[i], y = targets.data[i];
            double ys = y * (1.0 - cfg.smoothing) + cfg.smoothing * 0.5;
            double p = sigmoid(z);
            double d_ce = (p - ys) / static_cast<double>(nvalid);
            double d_dice = (num - 2.0 * y * den) / (den * den) * p * (1.0 - p);
            grad_out->data[i] = cfg.ce_weight * d_ce + cfg.dice_weight * d_dice;
        }
    }
    return loss;
}

} // namespace

double combined_loss(const Tensor& logits, const Tensor& targets, const LossConfig& cfg,
                     const Tensor* valid) {
    return combined_loss_impl(logits, targets, cfg, valid, nullptr);
}

double combined_loss_with_grad(const Tensor& logits, const Tensor& targets,
                               const LossConfig& cfg, const Tensor* valid, Tensor& grad_out) {
    if (!grad_out.same_shape(logits)) grad_out = Tensor(logits.n, logits.c, logits.h, logits.w);
    return combined_loss_impl(logits, targets, cfg, valid, &grad_out);
}

} // namespace mangrove::nn
