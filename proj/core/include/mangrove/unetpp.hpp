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
#ifndef MANGROVE_UNETPP_HPP
#define MANGROVE_UNETPP_HPP

#include <memory>
#include <string>
#include <vector>

#include "mangrove/geo.hpp"
#include "mangrove/graph.hpp"

namespace mangrove::nn {

struct ModelConfig {
    int in_channels = 11;
    int depth = 5;          // encoder levels
    int base_width = 32;    // channels at level 0; doubles per level
    bool deep_supervision = false;
    std::string encoder = "builtin-small"; // or "named-backbone" (external weights hook)
    bool pretrained = false;
    int out_channels = 1;   // 1 = sigmoid head; 2 = softmax-pair variant
    uint64_t init_seed = 42;

    void validate() const;
    int node_count() const { return depth * (depth + 1) / 2; }
    int spatial_divisor() const { return 1 << (depth - 1); }
};

// Nested-decoder segmentation network. Nodes X(i,j) sit on a triangular
// grid: column 0 is a plain convolutional encoder (downsampling x2 per
// level via max pooling), and every node X(i,j>=1) consumes the
// concatenation of X(i,0..j-1) with the bilinearly upsampled X(i+1,j-1).
// Each node is two fused conv3x3+ReLU layers; the head is a 1x1 projection
// from X(0,depth-1) to the class logits.
class SegmentationModel {
public:
    explicit SegmentationModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    int node_count() const { return cfg_.node_count(); }

    /// Parameters in a fixed, documented order (checkpoint layout).
    std::vector<Param*> parameters();
    size_t parameter_scalars() const;
    Param* find_param(const std::string& name);
    void zero_grad();

    /// Width (channel count) of nodes at encoder level i.
    int width_at(int level) const { return cfg_.base_width << level; }

    /// Channel count entering node (i, j).
    int node_in_channels(int i, int j) const;

    /// Training-mode forward pass through a caller-owned graph. Returns the
    /// logits node ids: one per supervision head, final head last. Logits
    /// are always single-channel (the 2-channel variant emits the paired
    /// logit difference, which is the binary logit).
    std::vector<int> forward_graph(Graph& g, int input_id);

    /// Inference forward; returns the final logits tensor [N,1,H,W].
    Tensor forward(const Tensor& batch);

private:
    struct ConvBlock {
        Param w1, b1, w2, b2;
    };

    int block_index(int i, int j) const;
    int block(Graph& g, int x, int idx);
    void init_weights();

    ModelConfig cfg_;
    std::vector<ConvBlock> blocks_;  // triangular grid, row-major by i then j
    std::vector<Param> head_w_, head_b_;
};

/// Sliding-window whole-scene inference with logit averaging in overlaps.
/// Bands are selected by name in `bands` order, scaled by
/// 1/normalization_scale; nodata input pixels come out as background.
/// Probability threshold 0.5 corresponds to logit 0.
RasterGrid predict_mask(SegmentationModel& model, const MultispectralScene& scene,
                        const std::vector<std::string>& bands, double normalization_scale,
                        int tile = 256, int overlap = 32, double threshold = 0.5);

/// Checkpoint metadata persisted next to the weights.
struct CheckpointMeta {
    int format_version = 1;
    ModelConfig model;
    std::vector<std::string> band_names;
    double normalization_scale = 10000.0;
    int epoch = 0;
    double best_miou = 0.0;
    uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, SegmentationModel& model,
                     const CheckpointMeta& meta);

/// Rebuilds the model from the stored config and loads the weights.
SegmentationModel load_checkpoint(const std::string& path, CheckpointMeta* meta_out = nullptr);

} // namespace mangrove::nn

#endif
