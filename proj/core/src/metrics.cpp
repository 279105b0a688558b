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
#include "mangrove/metrics.hpp"

namespace mangrove {

ConfusionMatrix confusion_counts(std::span<const uint8_t> pred, std::span<const uint8_t> truth,
                                 std::span<const uint8_t> valid) {
    if (pred.size() != truth.size())
        throw AlignmentError("confusion: size mismatch (" + std::to_string(pred.size()) + " vs " +
                             std::to_string(truth.size()) + ")");
    if (!valid.empty() && valid.size() != pred.size())
        throw AlignmentError("confusion: validity mask size mismatch");
    ConfusionMatrix cm;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!valid.empty() && !valid[i]) continue;
        if (truth[i]) {
            if (pred[i])
                ++cm.tp;
            else
                ++cm.fn;
        } else {
            if (pred[i])
                ++cm.fp;
            else
                ++cm.tn;
        }
    }
    return cm;
}

ConfusionMatrix confusion(const RasterGrid& pred, const RasterGrid& truth) {
    pred.require_aligned_with(truth, "confusion pred vs truth");
    ConfusionMatrix cm;
    for (size_t i = 0; i < pred.values.size(); ++i) {
        double t = truth.values[i];
        if (truth.is_nodata(t)) continue;
        double p = pred.values[i];
        if (pred.is_nodata(p)) continue;
        bool tb = t != 0.0, pb = p != 0.0;
        if (tb) {
            if (pb)
                ++cm.tp;
            else
                ++cm.fn;
        } else {
            if (pb)
                ++cm.fp;
            else
                ++cm.tn;
        }
    }
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    Metrics m;
    auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.producer_acc = ratio(cm.tp, cm.tp + cm.fn);
    m.user_acc = ratio(cm.tp, cm.tp + cm.fp);
    if (m.producer_acc && m.user_acc) {
        double s = *m.producer_acc + *m.user_acc;
        if (s > 0.0) m.f1 = 2.0 * *m.producer_acc * *m.user_acc / s;
    }
    m.iou_pos = ratio(cm.tp, cm.tp + cm.fp + cm.fn);
    m.iou_neg = ratio(cm.tn, cm.tn + cm.fp + cm.fn);
    if (m.iou_pos && m.iou_neg) m.miou = 0.5 * (*m.iou_pos + *m.iou_neg);
    m.overall_acc = ratio(cm.tp + cm.tn, cm.total());
    return m;
}

} // namespace mangrove
