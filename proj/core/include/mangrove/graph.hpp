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
#ifndef MANGROVE_GRAPH_HPP
#define MANGROVE_GRAPH_HPP

#include <functional>
#include <vector>

#include "mangrove/losses.hpp"
#include "mangrove/tensor.hpp"

namespace mangrove::nn {

// Define-by-run autodiff tape for the handful of ops the segmentation
// network needs. Creation order is topological, so backward() is a single
// reverse sweep. In training mode the sweep releases activation and
// gradient buffers as soon as they are consumed, which keeps the peak
// footprint near the forward-pass size.
class Graph {
public:
    /// training=false skips all backward bookkeeping (inference mode).
    explicit Graph(bool training = true) : training_(training) {}

    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    int input(Tensor v);

    /// 2-D convolution, stride 1, square kernel taken from w's shape
    /// [c_out, c_in, k, k], zero padding `pad`. With fuse_relu the output is
    /// clamped at zero in the same op.
    int conv2d(int x, Param& w, Param& b, int pad, bool fuse_relu = false);

    int relu(int x);

    /// 2x2 max pooling, stride 2. Spatial dims must be even.
    int maxpool2(int x);

    /// Bilinear x2 upsampling (half-pixel centers, edges clamped).
    int upsample2(int x);

    /// Channel-wise concatenation; all inputs share N, H, W.
    int concat(const std::vector<int>& xs);

    /// x[:,1] - x[:,0] for a 2-channel tensor: the binary logit of a
    /// softmax pair.
    int channel_diff(int x);

    /// Combined smoothed-CE + Dice loss as one fused scalar node.
    /// targets and valid are [N,1,H,W] masks owned by the caller.
    int segmentation_loss(int logits, const Tensor& targets, const Tensor& valid,
                          const LossConfig& cfg);

    /// Mean of scalar nodes (deep-supervision head averaging).
    int mean_of(const std::vector<int>& scalars);

    const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    Tensor take_value(int id) { return std::move(nodes_[static_cast<size_t>(id)].value); }

    /// Gradient of a node; populated by backward(id, /*release_buffers=*/false).
    const Tensor& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }

    /// Reverse sweep from a scalar node; accumulates into Param::grad.
    /// With release_buffers (default) node values/grads are freed as the
    /// sweep passes them, so the graph cannot be backpropagated twice.
    void backward(int id, bool release_buffers = true);

    bool training() const { return training_; }
    size_t node_count() const { return nodes_.size(); }

    ~Graph();

    // Activation buffers cycle through a thread-local free list keyed by
    // size, so repeated forward/backward steps do not hammer the allocator.
    static Tensor pooled(int n, int c, int h, int w, bool zeroed);
    static void recycle(Tensor& t);
    static void drop_buffer_pool();

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<int> inputs;
        std::function<void(Graph&, Node&)> backfn;
        std::vector<int32_t> aux;   // maxpool argmax indices
        Param *w = nullptr, *b = nullptr;
    };

    int push(Node&& n);
    Tensor& grad_buf(int id);

    std::vector<Node> nodes_;
    bool training_;
    friend struct GraphOps;
};

} // namespace mangrove::nn

#endif
