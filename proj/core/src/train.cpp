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
#include "mangrove/train.hpp"

#include <cmath>

#include "mangrove/metrics.hpp"

namespace mangrove::nn {

namespace {

// Batch tensors assembled from augmented tiles.
struct BatchBuffers {
    Tensor images;  // [B,C,S,S]
    Tensor targets; // [B,1,S,S]
    Tensor valid;   // [B,1,S,S]
};

void fill_batch(BatchBuffers& buf, const std::vector<TileSample>& tiles) {
    const int B = static_cast<int>(tiles.size());
    const int C = tiles.front().channels;
    const int S = tiles.front().size;
    buf.images = Graph::pooled(B, C, S, S, false);
    if (!(buf.targets.n == B && buf.targets.h == S)) {
        buf.targets = Tensor(B, 1, S, S);
        buf.valid = Tensor(B, 1, S, S);
    }
    const size_t plane = static_cast<size_t>(S) * S;
    for (int b = 0; b < B; ++b) {
        const TileSample& t = tiles[static_cast<size_t>(b)];
        if (t.channels != C || t.size != S)
            throw SchemaError("train: tile '" + t.meta.id + "' shape differs within batch");
        std::copy_n(t.image.data.begin(), t.image.data.size(), buf.images.plane(b, 0));
        double* ty = buf.targets.plane(b, 0);
        double* tv = buf.valid.plane(b, 0);
        for (size_t i = 0; i < plane; ++i) {
            ty[i] = static_cast<double>(t.label[i]);
            tv[i] = static_cast<double>(t.valid[i]);
        }
    }
}

ConfusionMatrix tile_confusion(SegmentationModel& model, const TileSample& t,
                               double logit_threshold) {
    Tensor logits = model.forward(t.image);
    ConfusionMatrix cm;
    for (size_t i = 0; i < t.label.size(); ++i) {
        if (!t.valid[i]) continue;
        bool pred = logits.data[i] > logit_threshold;
        if (t.label[i]) {
            pred ? ++cm.tp : ++cm.fn;
        } else {
            pred ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

std::vector<Tensor> snapshot_params(SegmentationModel& model) {
    std::vector<Tensor> snap;
    for (Param* p : model.parameters()) snap.push_back(p->value);
    return snap;
}

void restore_params(SegmentationModel& model, const std::vector<Tensor>& snap) {
    auto params = model.parameters();
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

} // namespace

double validation_miou(SegmentationModel& model, const TileStore& store,
                       const std::vector<TileMeta>& val_meta, double threshold) {
    const double logit_threshold = std::log(threshold / (1.0 - threshold));
    ConfusionMatrix cm;
    for (const TileMeta& meta : val_meta)
        cm += tile_confusion(model, store.load(meta), logit_threshold);
    Metrics m = metrics(cm);
    return m.miou ? *m.miou : 0.0;
}

TrainResult train(SegmentationModel& model, const TileStore& store,
                  const std::vector<TileMeta>& train_meta, const std::vector<TileMeta>& val_meta,
                  const TrainConfig& cfg, const TrainOptions& opts) {
    cfg.validate();
    if (train_meta.empty()) throw ArgumentError("train: training set is empty");
    if (val_meta.empty()) throw ArgumentError("train: validation set is empty");

    LossConfig loss_cfg{cfg.label_smoothing, cfg.ce_weight, cfg.dice_weight, cfg.dice_eps};
    AdamW opt(model.parameters(), cfg.weight_decay);
    Rng base(cfg.seed);

    TrainResult result;
    EarlyStopState stop_state;
    std::vector<Tensor> best_snapshot;
    CheckpointMeta meta;
    meta.model = model.config();
    meta.band_names = opts.band_names;
    meta.normalization_scale = opts.normalization_scale;
    meta.seed = cfg.seed;

    BatchBuffers buf;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double lr = lr_at(static_cast<double>(epoch - 1), cfg);

        Rng batch_rng = base.derive(0x6261746368ull, static_cast<uint64_t>(epoch));
        auto batches = stratified_batches(train_meta, cfg.batch_size, batch_rng);

        double loss_sum = 0.0;
        size_t sample_count = 0;
        for (size_t bi = 0; bi < batches.size(); ++bi) {
            std::vector<TileSample> tiles;
            tiles.reserve(batches[bi].size());
            for (size_t idx : batches[bi]) {
                TileSample t = store.load(train_meta[idx]);
                if (opts.augment) {
                    Rng aug = base.derive(static_cast<uint64_t>(epoch), static_cast<uint64_t>(idx));
                    t = augment(t, aug);
                }
                tiles.push_back(std::move(t));
            }
            fill_batch(buf, tiles);

            opt.zero_grad();
            Graph g(/*training=*/true);
            int input_id = g.input(std::move(buf.images));
            std::vector<int> heads = model.forward_graph(g, input_id);
            std::vector<int> losses;
            losses.reserve(heads.size());
            for (int h : heads)
                losses.push_back(g.segmentation_loss(h, buf.targets, buf.valid, loss_cfg));
            int loss_id = losses.size() == 1 ? losses[0] : g.mean_of(losses);
            const double batch_loss = g.value(loss_id).data[0];
            if (!std::isfinite(batch_loss))
                throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(bi + 1) + ": loss is not finite");
            g.backward(loss_id);
            opt.step(lr);

            loss_sum += batch_loss * static_cast<double>(tiles.size());
            sample_count += tiles.size();
        }

        const double train_loss = loss_sum / static_cast<double>(sample_count);
        const double val_miou = validation_miou(model, store, val_meta, opts.threshold);

        bool improved = !stop_state.best_miou || val_miou > *stop_state.best_miou;
        auto [next_state, should_stop] = early_stop_update(stop_state, val_miou, cfg.patience);
        stop_state = next_state;
        if (improved) {
            best_snapshot = snapshot_params(model);
            meta.epoch = epoch;
            meta.best_miou = val_miou;
            if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, model, meta);
        }

        EpochRecord rec{epoch, train_loss, val_miou, lr};
        result.curve.records.push_back(rec);
        if (opts.on_epoch) opts.on_epoch(rec);
        result.epochs_run = epoch;

        if (should_stop) {
            result.early_stopped = true;
            break;
        }
    }

    if (!best_snapshot.empty()) restore_params(model, best_snapshot);
    result.best_epoch = stop_state.best_epoch;
    result.best_miou = stop_state.best_miou.value_or(0.0);
    result.best_meta = meta;
    return result;
}

} // namespace mangrove::nn
