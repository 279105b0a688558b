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
#ifndef MANGROVE_METRICS_HPP
#define MANGROVE_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>

#include "mangrove/geo.hpp"

namespace mangrove {

/// Pixel counts for the mangrove-positive class.
struct ConfusionMatrix {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    uint64_t total() const { return tp + fp + fn + tn; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

/// Accuracy figures derived from a confusion matrix. A metric whose
/// denominator is zero is reported as nullopt, never as 0 -- "no positives
/// exist" is not the same thing as "all positives missed".
struct Metrics {
    std::optional<double> producer_acc; // recall of the mangrove class
    std::optional<double> user_acc;     // precision of the mangrove class
    std::optional<double> f1;
    std::optional<double> iou_pos;
    std::optional<double> iou_neg;
    std::optional<double> miou;         // unweighted mean of the two IoUs
    std::optional<double> overall_acc;  // reported for completeness only
};

/// Counts over parallel binary spans; pixels with valid[i] == 0 are skipped.
/// An empty valid span means every pixel counts.
ConfusionMatrix confusion_counts(std::span<const uint8_t> pred, std::span<const uint8_t> truth,
                                 std::span<const uint8_t> valid = {});

/// Raster version. Masks must be aligned and binary; nodata pixels in the
/// truth mask are excluded.
ConfusionMatrix confusion(const RasterGrid& pred, const RasterGrid& truth);

Metrics metrics(const ConfusionMatrix& cm);

} // namespace mangrove

#endif
