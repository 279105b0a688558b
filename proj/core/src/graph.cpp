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
#define EIGEN_DONT_PARALLELIZE
#include "mangrove/graph.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <unordered_map>

namespace mangrove::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowStrided = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using MapConstRow = Eigen::Map<const RowMat>;
using MapConstRowStrided = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

// Rows of the unrolled patch matrix for one chunk of output rows.
// col is K x L with K = c_in*k*k, L = rows*w_out, laid out row-major.
void im2col_chunk(const Tensor& x, int ni, int k, int pad, int y0, int y1, RowMat& col) {
    const int H = x.h, W = x.w;
    const int w_out = W + 2 * pad - k + 1;
    const int L = (y1 - y0) * w_out;
    col.resize(x.c * k * k, L);
    for (int ci = 0; ci < x.c; ++ci) {
        const double* plane = x.plane(ni, ci);
        for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx) {
                double* row = col.data() + static_cast<size_t>((ci * k + dy) * k + dx) * L;
                int l = 0;
                for (int y = y0; y < y1; ++y) {
                    const int sy = y + dy - pad;
                    if (sy < 0 || sy >= H) {
                        for (int xo = 0; xo < w_out; ++xo) row[l++] = 0.0;
                        continue;
                    }
                    const double* src = plane + static_cast<size_t>(sy) * W;
                    for (int xo = 0; xo < w_out; ++xo) {
                        const int sx = xo + dx - pad;
                        row[l++] = (sx < 0 || sx >= W) ? 0.0 : src[sx];
                    }
                }
            }
        }
    }
}

// Transpose of im2col: scatter-add the unrolled gradient back onto dx.
void col2im_chunk(const RowMat& colgrad, int ni, int k, int pad, int y0, int y1, Tensor& dx) {
    const int H = dx.h, W = dx.w;
    const int w_out = W + 2 * pad - k + 1;
    const Eigen::Index L = colgrad.cols();
    for (int ci = 0; ci < dx.c; ++ci) {
        double* plane = dx.plane(ni, ci);
        for (int dy = 0; dy < k; ++dy) {
            for (int dx_ = 0; dx_ < k; ++dx_) {
                const double* row =
                    colgrad.data() + static_cast<size_t>((ci * k + dy) * k + dx_) * L;
                int l = 0;
                for (int y = y0; y < y1; ++y) {
                    const int sy = y + dy - pad;
                    if (sy < 0 || sy >= H) {
                        l += w_out;
                        continue;
                    }
                    double* dst = plane + static_cast<size_t>(sy) * W;
                    for (int xo = 0; xo < w_out; ++xo) {
                        const int sx = xo + dx_ - pad;
                        if (sx >= 0 && sx < W) dst[sx] += row[l];
                        ++l;
                    }
                }
            }
        }
    }
}

int chunk_rows(int K, int w_out, int h_out) {
    // Cap the patch matrix around 16 MB.
    const long budget = (1l << 15);
    long rows = budget / (static_cast<long>(K) * w_out);
    if (rows < 1) rows = 1;
    if (rows > h_out) rows = h_out;
    return static_cast<int>(rows);
}

} // namespace

namespace {

// Thread-local free list of activation buffers, keyed by element count.
struct BufferPool {
    std::unordered_map<size_t, std::vector<std::vector<double>>> buckets;
    size_t held_bytes = 0;
    static constexpr size_t kMaxHeldBytes = size_t(3) << 30;
};

BufferPool& buffer_pool() {
    static thread_local BufferPool pool;
    return pool;
}

} // namespace

Tensor Graph::pooled(int n, int c, int h, int w, bool zeroed) {
    Tensor t;
    t.n = n;
    t.c = c;
    t.h = h;
    t.w = w;
    const size_t sz = static_cast<size_t>(n) * c * h * w;
    BufferPool& pool = buffer_pool();
    auto it = pool.buckets.find(sz);
    if (it != pool.buckets.end() && !it->second.empty()) {
        t.data = std::move(it->second.back());
        it->second.pop_back();
        pool.held_bytes -= sz * sizeof(double);
        if (zeroed) std::fill(t.data.begin(), t.data.end(), 0.0);
    } else {
        t.data.assign(sz, 0.0);
    }
    return t;
}

void Graph::recycle(Tensor& t) {
    const size_t sz = t.data.size();
    if (sz == 0) return;
    BufferPool& pool = buffer_pool();
    if (pool.held_bytes + sz * sizeof(double) > BufferPool::kMaxHeldBytes) {
        t.release();
        return;
    }
    pool.held_bytes += sz * sizeof(double);
    pool.buckets[sz].push_back(std::move(t.data));
    t.data.clear();
}

void Graph::drop_buffer_pool() {
    buffer_pool().buckets.clear();
    buffer_pool().held_bytes = 0;
}

Graph::~Graph() {
    for (Node& n : nodes_) {
        recycle(n.value);
        recycle(n.grad);
    }
}

int Graph::push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Graph::grad_buf(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad.same_shape(n.value) || n.grad.empty())
        n.grad = pooled(n.value.n, n.value.c, n.value.h, n.value.w, /*zeroed=*/true);
    return n.grad;
}

int Graph::input(Tensor v) {
    Node n;
    n.value = std::move(v);
    return push(std::move(n));
}

int Graph::conv2d(int x, Param& w, Param& b, int pad, bool fuse_relu) {
    const Tensor& in = value(x);
    const int k = w.value.h;
    const int c_out = w.value.n, c_in = w.value.c;
    if (in.c != c_in)
        throw ShapeError("conv2d '" + w.name + "': input has " + std::to_string(in.c) +
                         " channels, kernel expects " + std::to_string(c_in));
    const int h_out = in.h + 2 * pad - k + 1;
    const int w_out = in.w + 2 * pad - k + 1;
    if (h_out <= 0 || w_out <= 0)
        throw ShapeError("conv2d '" + w.name + "': output would be empty");
    const int K = c_in * k * k;

    Node n;
    n.value = pooled(in.n, c_out, h_out, w_out, /*zeroed=*/false);
    n.inputs = {x};
    n.w = &w;
    n.b = &b;

    {
        RowMat col;
        MapConstRow wm(w.value.data.data(), c_out, K);
        const int rows = chunk_rows(K, w_out, h_out);
        for (int ni = 0; ni < in.n; ++ni) {
            for (int y0 = 0; y0 < h_out; y0 += rows) {
                const int y1 = std::min(h_out, y0 + rows);
                const int L = (y1 - y0) * w_out;
                im2col_chunk(in, ni, k, pad, y0, y1, col);
                MapRowStrided out(n.value.plane(ni, 0) + static_cast<size_t>(y0) * w_out, c_out, L,
                                  Eigen::OuterStride<>(static_cast<Eigen::Index>(h_out) * w_out));
                out.noalias() = wm * MapConstRow(col.data(), K, L);
            }
            for (int co = 0; co < c_out; ++co) {
                double* plane = n.value.plane(ni, co);
                const double bias = b.value.data[static_cast<size_t>(co)];
                const size_t len = static_cast<size_t>(h_out) * w_out;
                if (fuse_relu)
                    for (size_t i = 0; i < len; ++i) plane[i] = std::max(0.0, plane[i] + bias);
                else
                    for (size_t i = 0; i < len; ++i) plane[i] += bias;
            }
        }
    }

    if (training_) {
        w.ensure_grad();
        b.ensure_grad();
        const int kk = k, padk = pad;
        const bool fused = fuse_relu;
        n.backfn = [kk, padk, fused](Graph& g, Node& self) {
            const Tensor& in_v = g.value(self.inputs[0]);
            const Tensor& out_v = self.value;
            const Tensor& dout = self.grad;
            Param& w = *self.w;
            Param& b = *self.b;
            const int c_out = w.value.n, c_in = w.value.c;
            const int K = c_in * kk * kk;
            const int h_out = out_v.h, w_out = out_v.w;
            Tensor& dx = g.grad_buf(self.inputs[0]);

            RowMat col, dmask, colgrad;
            MapConstRow wm(w.value.data.data(), c_out, K);
            MapRow dwm(w.grad.data.data(), c_out, K);
            const int rows = chunk_rows(K, w_out, h_out);
            for (int ni = 0; ni < out_v.n; ++ni) {
                for (int y0 = 0; y0 < h_out; y0 += rows) {
                    const int y1 = std::min(h_out, y0 + rows);
                    const int L = (y1 - y0) * w_out;
                    const Eigen::Index stride = static_cast<Eigen::Index>(h_out) * w_out;
                    MapConstRowStrided g_out(dout.plane(ni, 0) + static_cast<size_t>(y0) * w_out,
                                             c_out, L, Eigen::OuterStride<>(stride));
                    dmask = g_out;
                    if (fused) {
                        MapConstRowStrided o(out_v.plane(ni, 0) + static_cast<size_t>(y0) * w_out,
                                             c_out, L, Eigen::OuterStride<>(stride));
                        dmask = dmask.cwiseProduct((o.array() > 0.0).cast<double>().matrix());
                    }
                    im2col_chunk(in_v, ni, kk, padk, y0, y1, col);
                    dwm.noalias() += dmask * MapConstRow(col.data(), K, L).transpose();
                    for (int co = 0; co < c_out; ++co)
                        b.grad.data[static_cast<size_t>(co)] += dmask.row(co).sum();
                    colgrad.noalias() = wm.transpose() * dmask;
                    col2im_chunk(colgrad, ni, kk, padk, y0, y1, dx);
                }
            }
        };
    }
    return push(std::move(n));
}

int Graph::relu(int x) {
    const Tensor& in = value(x);
    Node n;
    n.value = pooled(in.n, in.c, in.h, in.w, false);
    n.inputs = {x};
    for (size_t i = 0; i < in.data.size(); ++i) n.value.data[i] = std::max(0.0, in.data[i]);
    if (training_) {
        n.backfn = [](Graph& g, Node& self) {
            Tensor& dx = g.grad_buf(self.inputs[0]);
            for (size_t i = 0; i < dx.data.size(); ++i)
                if (self.value.data[i] > 0.0) dx.data[i] += self.grad.data[i];
        };
    }
    return push(std::move(n));
}

int Graph::maxpool2(int x) {
    const Tensor& in = value(x);
    if (in.h % 2 != 0 || in.w % 2 != 0)
        throw ShapeError("maxpool2: spatial dims must be even, got " + in.shape_str());
    Node n;
    n.value = pooled(in.n, in.c, in.h / 2, in.w / 2, false);
    n.inputs = {x};
    n.aux.resize(n.value.numel());
    size_t o = 0;
    for (int ni = 0; ni < in.n; ++ni) {
        for (int ci = 0; ci < in.c; ++ci) {
            const double* plane = in.plane(ni, ci);
            const size_t plane_off = (static_cast<size_t>(ni) * in.c + ci) * in.h * in.w;
            for (int y = 0; y < in.h; y += 2) {
                for (int xx = 0; xx < in.w; xx += 2) {
                    size_t i00 = static_cast<size_t>(y) * in.w + xx;
                    size_t best = i00;
                    double v = plane[i00];
                    if (plane[i00 + 1] > v) { v = plane[i00 + 1]; best = i00 + 1; }
                    if (plane[i00 + in.w] > v) { v = plane[i00 + in.w]; best = i00 + in.w; }
                    if (plane[i00 + in.w + 1] > v) { v = plane[i00 + in.w + 1]; best = i00 + in.w + 1; }
                    n.value.data[o] = v;
                    n.aux[o] = static_cast<int32_t>(plane_off + best);
                    ++o;
                }
            }
        }
    }
    if (training_) {
        n.backfn = [](Graph& g, Node& self) {
            Tensor& dx = g.grad_buf(self.inputs[0]);
            for (size_t i = 0; i < self.grad.data.size(); ++i)
                dx.data[static_cast<size_t>(self.aux[i])] += self.grad.data[i];
        };
    }
    return push(std::move(n));
}

namespace {

// Half-pixel source coordinates for 2x upsampling, clamped at the borders.
inline void up2_coords(int d, int src_len, int& i0, int& i1, double& w1) {
    double s = (d + 0.5) * 0.5 - 0.5;
    double f = std::floor(s);
    w1 = s - f;
    i0 = static_cast<int>(f);
    i1 = i0 + 1;
    if (i0 < 0) i0 = 0;
    if (i1 < 0) i1 = 0;
    if (i0 > src_len - 1) i0 = src_len - 1;
    if (i1 > src_len - 1) i1 = src_len - 1;
}

} // namespace

int Graph::upsample2(int x) {
    const Tensor& in = value(x);
    Node n;
    n.value = pooled(in.n, in.c, in.h * 2, in.w * 2, false);
    n.inputs = {x};
    const int H = in.h, W = in.w;
    for (int ni = 0; ni < in.n; ++ni) {
        for (int ci = 0; ci < in.c; ++ci) {
            const double* src = in.plane(ni, ci);
            double* dst = n.value.plane(ni, ci);
            for (int y = 0; y < 2 * H; ++y) {
                int y0, y1;
                double wy;
                up2_coords(y, H, y0, y1, wy);
                const double* r0 = src + static_cast<size_t>(y0) * W;
                const double* r1 = src + static_cast<size_t>(y1) * W;
                double* out_row = dst + static_cast<size_t>(y) * 2 * W;
                for (int xx = 0; xx < 2 * W; ++xx) {
                    int x0, x1;
                    double wx;
                    up2_coords(xx, W, x0, x1, wx);
                    out_row[xx] = (1.0 - wy) * ((1.0 - wx) * r0[x0] + wx * r0[x1]) +
                                  wy * ((1.0 - wx) * r1[x0] + wx * r1[x1]);
                }
            }
        }
    }
    if (training_) {
        n.backfn = [H, W](Graph& g, Node& self) {
            Tensor& dx = g.grad_buf(self.inputs[0]);
            for (int ni = 0; ni < dx.n; ++ni) {
                for (int ci = 0; ci < dx.c; ++ci) {
                    double* d = dx.plane(ni, ci);
                    const double* gsrc = self.grad.plane(ni, ci);
                    for (int y = 0; y < 2 * H; ++y) {
                        int y0, y1;
                        double wy;
                        up2_coords(y, H, y0, y1, wy);
                        const double* grow = gsrc + static_cast<size_t>(y) * 2 * W;
                        for (int xx = 0; xx < 2 * W; ++xx) {
                            int x0, x1;
                            double wx;
                            up2_coords(xx, W, x0, x1, wx);
                            double gv = grow[xx];
                            d[static_cast<size_t>(y0) * W + x0] += (1.0 - wy) * (1.0 - wx) * gv;
                            d[static_cast<size_t>(y0) * W + x1] += (1.0 - wy) * wx * gv;
                            d[static_cast<size_t>(y1) * W + x0] += wy * (1.0 - wx) * gv;
                            d[static_cast<size_t>(y1) * W + x1] += wy * wx * gv;
                        }
                    }
                }
            }
        };
    }
    return push(std::move(n));
}

int Graph::concat(const std::vector<int>& xs) {
    if (xs.empty()) throw ArgumentError("concat: no inputs");
    const Tensor& first = value(xs[0]);
    int c_total = 0;
    for (int id : xs) {
        const Tensor& t = value(id);
        if (t.n != first.n || t.h != first.h || t.w != first.w)
            throw ShapeError("concat: spatial/batch mismatch " + t.shape_str() + " vs " +
                             first.shape_str());
        c_total += t.c;
    }
    Node n;
    n.value = pooled(first.n, c_total, first.h, first.w, false);
    n.inputs = xs;
    for (int ni = 0; ni < first.n; ++ni) {
        int c_off = 0;
        for (int id : xs) {
            const Tensor& t = value(id);
            const size_t block = static_cast<size_t>(t.c) * t.h * t.w;
            std::copy_n(t.plane(ni, 0), block, n.value.plane(ni, c_off));
            c_off += t.c;
        }
    }
    if (training_) {
        n.backfn = [](Graph& g, Node& self) {
            for (int ni = 0; ni < self.value.n; ++ni) {
                int c_off = 0;
                for (int id : self.inputs) {
                    Tensor& dx = g.grad_buf(id);
                    const size_t block = static_cast<size_t>(dx.c) * dx.h * dx.w;
                    const double* src = self.grad.plane(ni, c_off);
                    double* dst = dx.plane(ni, 0);
                    for (size_t i = 0; i < block; ++i) dst[i] += src[i];
                    c_off += dx.c;
                }
            }
        };
    }
    return push(std::move(n));
}

int Graph::channel_diff(int x) {
    const Tensor& in = value(x);
    if (in.c != 2) throw ShapeError("channel_diff: expected 2 channels, got " + in.shape_str());
    Node n;
    n.value = pooled(in.n, 1, in.h, in.w, false);
    n.inputs = {x};
    const size_t plane = static_cast<size_t>(in.h) * in.w;
    for (int ni = 0; ni < in.n; ++ni) {
        const double* p0 = in.plane(ni, 0);
        const double* p1 = in.plane(ni, 1);
        double* o = n.value.plane(ni, 0);
        for (size_t i = 0; i < plane; ++i) o[i] = p1[i] - p0[i];
    }
    if (training_) {
        n.backfn = [plane](Graph& g, Node& self) {
            Tensor& dx = g.grad_buf(self.inputs[0]);
            for (int ni = 0; ni < dx.n; ++ni) {
                double* d0 = dx.plane(ni, 0);
                double* d1 = dx.plane(ni, 1);
                const double* gv = self.grad.plane(ni, 0);
                for (size_t i = 0; i < plane; ++i) {
                    d1[i] += gv[i];
                    d0[i] -= gv[i];
                }
            }
        };
    }
    return push(std::move(n));
}

int Graph::segmentation_loss(int logits, const Tensor& targets, const Tensor& valid,
                             const LossConfig& cfg) {
    const Tensor& z = value(logits);
    const Tensor* valid_ptr = valid.empty() ? nullptr : &valid;
    Node n;
    n.inputs = {logits};
    if (training_) {
        const Tensor* tgt = &targets;
        n.backfn = [tgt, valid_ptr, cfg](Graph& g, Node& self) {
            const double upstream = self.grad.data[0];
            Tensor local;
            combined_loss_with_grad(g.value(self.inputs[0]), *tgt, cfg, valid_ptr, local);
            Tensor& dx = g.grad_buf(self.inputs[0]);
            for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += upstream * local.data[i];
        };
    }
    n.value = Tensor::scalar(combined_loss(z, targets, cfg, valid_ptr));
    return push(std::move(n));
}

int Graph::mean_of(const std::vector<int>& scalars) {
    if (scalars.empty()) throw ArgumentError("mean_of: no inputs");
    double s = 0.0;
    for (int id : scalars) s += value(id).data[0];
    Node n;
    n.inputs = scalars;
    n.value = Tensor::scalar(s / static_cast<double>(scalars.size()));
    if (training_) {
        n.backfn = [](Graph& g, Node& self) {
            const double share = self.grad.data[0] / static_cast<double>(self.inputs.size());
            for (int id : self.inputs) g.grad_buf(id).data[0] += share;
        };
    }
    return push(std::move(n));
}

void Graph::backward(int id, bool release_buffers) {
    if (!training_) throw Error("Graph::backward called on an inference-mode graph");
    grad_buf(id).data[0] = 1.0;
    for (int k = id; k >= 0; --k) {
        Node& n = nodes_[static_cast<size_t>(k)];
        if (!n.grad.empty() && n.backfn) n.backfn(*this, n);
        if (release_buffers && k != id) {
            recycle(n.value);
            recycle(n.grad);
        }
    }
}

} // namespace mangrove::nn
