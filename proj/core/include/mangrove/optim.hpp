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
#ifndef MANGROVE_OPTIM_HPP
#define MANGROVE_OPTIM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mangrove/tensor.hpp"

namespace mangrove::nn {

/// The published optimization recipe, with its defaults.
struct TrainConfig {
    double lr0 = 1e-4;
    double weight_decay = 1e-3;
    double lr_min = 1e-5;
    int t0_epochs = 2;      // initial restart period
    int t_mult = 2;         // period multiplier
    int batch_size = 16;
    int max_epochs = 100;
    int patience = 10;      // early-stopping epochs without val-mIoU improvement
    double label_smoothing = 0.1;
    double ce_weight = 1.0;
    double dice_weight = 1.0;
    double dice_eps = 1.0;
    uint64_t seed = 42;

    void validate() const;
};

/// Cosine annealing with warm restarts. Period k has length T0 * Tmult^k,
/// so restarts fall at cumulative epochs 2, 6, 14, 30, 62, ... for the
/// default T0=2, Tmult=2. Within a period of length T at offset t:
/// lr = lr_min + (lr0 - lr_min)/2 * (1 + cos(pi * t / T)).
double lr_at(double epoch_fraction, const TrainConfig& cfg);

/// Early stopping on validation mIoU. Strict improvement resets the
/// counter; best_miou is unset until the first update.
struct EarlyStopState {
    std::optional<double> best_miou;
    int best_epoch = 0;          // 1-based epoch of the best value
    int epochs_since_improve = 0;
    int epochs_seen = 0;
};

/// Feeds one epoch's validation mIoU; returns the new state and whether
/// training should stop (counter reached the patience).
std::pair<EarlyStopState, bool> early_stop_update(EarlyStopState state, double epoch_miou,
                                                  int patience);

/// Adam with decoupled weight decay. Biases and other 1-D parameters are
/// excluded from decay.
class AdamW {
public:
    AdamW(std::vector<Param*> params, double weight_decay, double beta1 = 0.9,
          double beta2 = 0.999, double eps = 1e-8);

    void zero_grad();
    void step(double lr);

    int64_t steps() const { return t_; }

private:
    std::vector<Param*> params_;
    std::vector<Tensor> m_, v_;
    std::vector<bool> decay_;
    double weight_decay_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

} // namespace mangrove::nn

#endif
