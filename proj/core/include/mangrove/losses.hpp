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
#ifndef MANGROVE_LOSSES_HPP
#define MANGROVE_LOSSES_HPP

#include <cmath>

#include "mangrove/tensor.hpp"

namespace mangrove::nn {

struct LossConfig {
    double smoothing = 0.1;  // label smoothing fraction, [0, 0.5)
    double ce_weight = 1.0;
    double dice_weight = 1.0;
    double dice_eps = 1.0;
};

/// Binary cross-entropy of logits against label-smoothed targets
/// y' = y(1-s) + s/2, averaged over valid pixels. Pixels where valid == 0
/// are excluded; an empty valid set raises UndefinedLossError.
/// Pass valid = nullptr to use every pixel.
double soft_cross_entropy(const Tensor& logits, const Tensor& targets, double smoothing,
                          const Tensor* valid = nullptr);

/// 1 - (2*sum(p*y) + eps) / (sum(p) + sum(y) + eps) over valid pixels.
/// Probabilities must already be in [0, 1].
double dice_loss(const Tensor& probabilities, const Tensor& targets, double eps = 1.0,
                 const Tensor* valid = nullptr);

/// ce_weight * soft_cross_entropy(logits) + dice_weight * dice_loss(sigmoid(logits)).
double combined_loss(const Tensor& logits, const Tensor& targets, const LossConfig& cfg,
                     const Tensor* valid = nullptr);

/// Combined loss plus its analytic gradient with respect to the logits
/// (written into grad_out, same shape as logits). Backing routine for the
/// graph's fused loss node; exposed so the gradient oracle can test it.
double combined_loss_with_grad(const Tensor& logits, const Tensor& targets,
                               const LossConfig& cfg, const Tensor* valid, Tensor& grad_out);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// log(1 + e^z) without overflow.
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

} // namespace mangrove::nn

#endif
