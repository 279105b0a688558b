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
#ifndef MANGROVE_TRAIN_HPP
#define MANGROVE_TRAIN_HPP

#include <functional>
#include <string>
#include <vector>

#include "mangrove/dataset.hpp"
#include "mangrove/optim.hpp"
#include "mangrove/unetpp.hpp"

namespace mangrove::nn {

struct EpochRecord {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_miou = 0.0;
    double lr = 0.0;
};

struct TrainingCurve {
    std::vector<EpochRecord> records; // one per completed epoch

    bool operator==(const TrainingCurve&) const = default;
};

struct TrainOptions {
    std::string checkpoint_path;         // when set, best weights are persisted here
    std::vector<std::string> band_names; // recorded in the checkpoint
    double normalization_scale = 10000.0;
    bool augment = true;
    double threshold = 0.5;              // probability cut for validation masks
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    TrainingCurve curve;
    int best_epoch = 0;
    double best_miou = 0.0;
    int epochs_run = 0;
    bool early_stopped = false;
    CheckpointMeta best_meta;
};

/// Runs the full recipe: stratified batches, on-the-fly augmentation,
/// per-epoch cosine-restart learning rate, AdamW, validation mIoU with
/// early stopping, and best-weight checkpointing. On return the model
/// holds the best epoch's weights. Deterministic for a given seed: the
/// augmentation stream is keyed by (seed, epoch, sample), never by worker
/// layout.
TrainResult train(SegmentationModel& model, const TileStore& store,
                  const std::vector<TileMeta>& train_meta, const std::vector<TileMeta>& val_meta,
                  const TrainConfig& cfg, const TrainOptions& opts = {});

/// Aggregate validation mIoU of a model over a tile set (confusion counts
/// pooled across tiles). Returns 0 when undefined on a degenerate set.
double validation_miou(SegmentationModel& model, const TileStore& store,
                       const std::vector<TileMeta>& val_meta, double threshold = 0.5);

} // namespace mangrove::nn

#endif
