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
#include "mangrove/unetpp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mangrove/rng.hpp"

namespace mangrove::nn {

using json = nlohmann::json;

void ModelConfig::validate() const {
    if (depth < 2) throw ConfigError("ModelConfig: depth must be >= 2, got " + std::to_string(depth));
    if (in_channels < 1) throw ConfigError("ModelConfig: in_channels must be >= 1");
    if (base_width < 1) throw ConfigError("ModelConfig: base_width must be >= 1");
    if (out_channels != 1 && out_channels != 2)
        throw ConfigError("ModelConfig: out_channels must be 1 or 2");
    if (encoder == "named-backbone") {
        throw ConfigError(
            "ModelConfig: encoder 'named-backbone' is a hook for externally supplied "
            "pretrained weights, which this build does not bundle; use 'builtin-small'");
    }
    if (encoder != "builtin-small")
        throw ConfigError("ModelConfig: unknown encoder '" + encoder + "'");
    if (pretrained)
        throw ConfigError("ModelConfig: no pretrained weights ship with the built-in encoder");
}

SegmentationModel::SegmentationModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.depth;
    blocks_.resize(static_cast<size_t>(cfg_.node_count()));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d - i; ++j) {
            ConvBlock& blk = blocks_[static_cast<size_t>(block_index(i, j))];
            const std::string base = "x" + std::to_string(i) + "_" + std::to_string(j);
            const int cin = node_in_channels(i, j);
            const int cout = width_at(i);
            blk.w1 = {base + ".conv1.weight", Tensor(cout, cin, 3, 3), {}};
            blk.b1 = {base + ".conv1.bias", Tensor(cout, 1, 1, 1), {}};
            blk.w2 = {base + ".conv2.weight", Tensor(cout, cout, 3, 3), {}};
            blk.b2 = {base + ".conv2.bias", Tensor(cout, 1, 1, 1), {}};
        }
    }
    const int heads = cfg_.deep_supervision ? d - 1 : 1;
    head_w_.resize(static_cast<size_t>(heads));
    head_b_.resize(static_cast<size_t>(heads));
    for (int hidx = 0; hidx < heads; ++hidx) {
        const std::string base =
            cfg_.deep_supervision ? "head" + std::to_string(hidx + 1) : "head";
        head_w_[static_cast<size_t>(hidx)] = {
            base + ".weight", Tensor(cfg_.out_channels, cfg_.base_width, 1, 1), {}};
        head_b_[static_cast<size_t>(hidx)] = {base + ".bias", Tensor(cfg_.out_channels, 1, 1, 1), {}};
    }
    init_weights();
}

int SegmentationModel::block_index(int i, int j) const {
    // rows of the triangle laid out i = 0..depth-1, each of length depth-i
    int off = i * cfg_.depth - i * (i - 1) / 2;
    return off + j;
}

int SegmentationModel::node_in_channels(int i, int j) const {
    if (j == 0) return i == 0 ? cfg_.in_channels : width_at(i - 1);
    return j * width_at(i) + width_at(i + 1);
}

std::vector<Param*> SegmentationModel::parameters() {
    std::vector<Param*> out;
    for (auto& blk : blocks_) {
        out.push_back(&blk.w1);
        out.push_back(&blk.b1);
        out.push_back(&blk.w2);
        out.push_back(&blk.b2);
    }
    for (size_t i = 0; i < head_w_.size(); ++i) {
        out.push_back(&head_w_[i]);
        out.push_back(&head_b_[i]);
    }
    return out;
}

size_t SegmentationModel::parameter_scalars() const {
    size_t n = 0;
    for (const auto& blk : blocks_)
        n += blk.w1.value.numel() + blk.b1.value.numel() + blk.w2.value.numel() +
             blk.b2.value.numel();
    for (size_t i = 0; i < head_w_.size(); ++i)
        n += head_w_[i].value.numel() + head_b_[i].value.numel();
    return n;
}

Param* SegmentationModel::find_param(const std::string& name) {
    for (Param* p : parameters())
        if (p->name == name) return p;
    return nullptr;
}

void SegmentationModel::zero_grad() {
    for (Param* p : parameters()) p->zero_grad();
}

void SegmentationModel::init_weights() {
    Rng rng(cfg_.init_seed);
    for (Param* p : parameters()) {
        if (p->name.ends_with(".bias")) {
            std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
            continue;
        }
        const int fan_in = p->value.c * p->value.h * p->value.w;
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : p->value.data) v = rng.normal(0.0, stddev);
    }
}

int SegmentationModel::block(Graph& g, int x, int idx) {
    ConvBlock& blk = blocks_[static_cast<size_t>(idx)];
    int c1 = g.conv2d(x, blk.w1, blk.b1, 1, /*fuse_relu=*/true);
    return g.conv2d(c1, blk.w2, blk.b2, 1, /*fuse_relu=*/true);
}

std::vector<int> SegmentationModel::forward_graph(Graph& g, int input_id) {
    const Tensor& in = g.value(input_id);
    if (in.c != cfg_.in_channels)
        throw SchemaError("forward: input has " + std::to_string(in.c) +
                          " channels, model expects " + std::to_string(cfg_.in_channels));
    const int div = cfg_.spatial_divisor();
    if (in.h % div != 0 || in.w % div != 0)
        throw ShapeError("forward: spatial dims " + std::to_string(in.h) + "x" +
                         std::to_string(in.w) + " must be divisible by " + std::to_string(div) +
                         " (2^(depth-1) with depth " + std::to_string(cfg_.depth) + ")");

    const int d = cfg_.depth;
    // X[i][j] node ids on the triangular grid
    std::vector<std::vector<int>> X(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) X[static_cast<size_t>(i)].resize(static_cast<size_t>(d - i), -1);

    X[0][0] = block(g, input_id, block_index(0, 0));
    for (int i = 1; i < d; ++i)
        X[static_cast<size_t>(i)][0] =
            block(g, g.maxpool2(X[static_cast<size_t>(i - 1)][0]), block_index(i, 0));

    for (int j = 1; j < d; ++j) {
        for (int i = 0; i + j < d; ++i) {
            std::vector<int> parts;
            for (int jj = 0; jj < j; ++jj)
                parts.push_back(X[static_cast<size_t>(i)][static_cast<size_t>(jj)]);
            parts.push_back(g.upsample2(X[static_cast<size_t>(i + 1)][static_cast<size_t>(j - 1)]));
            X[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                block(g, g.concat(parts), block_index(i, j));
        }
    }

    auto head_logits = [&](int node, size_t hidx) {
        int z = g.conv2d(node, head_w_[hidx], head_b_[hidx], 0, false);
        return cfg_.out_channels == 2 ? g.channel_diff(z) : z;
    };

    std::vector<int> out;
    if (cfg_.deep_supervision) {
        for (int j = 1; j < d; ++j)
            out.push_back(head_logits(X[0][static_cast<size_t>(j)], static_cast<size_t>(j - 1)));
    } else {
        out.push_back(head_logits(X[0][static_cast<size_t>(d - 1)], 0));
    }
    return out;
}

Tensor SegmentationModel::forward(const Tensor& batch) {
    Graph g(/*training=*/false);
    int in = g.input(batch);
    std::vector<int> heads = forward_graph(g, in);
    return g.take_value(heads.back());
}

RasterGrid predict_mask(SegmentationModel& model, const MultispectralScene& scene,
                        const std::vector<std::string>& bands, double normalization_scale,
                        int tile, int overlap, double threshold) {
    scene.validate();
    const ModelConfig& cfg = model.config();
    if (static_cast<int>(bands.size()) != cfg.in_channels)
        throw SchemaError("predict_mask: model expects " + std::to_string(cfg.in_channels) +
                          " bands, band list has " + std::to_string(bands.size()));
    std::vector<const RasterGrid*> layers;
    for (const auto& name : bands) layers.push_back(&scene.band(name)); // throws SchemaError
    if (overlap < 0 || overlap >= tile)
        throw ArgumentError("predict_mask: overlap must be in [0, tile)");
    if (tile % cfg.spatial_divisor() != 0)
        throw ShapeError("predict_mask: tile size " + std::to_string(tile) +
                         " must be divisible by " + std::to_string(cfg.spatial_divisor()));

    const int H = scene.height(), W = scene.width();
    const int stride = tile - overlap;

    // Window anchor positions along one axis, final window clamped flush
    // with the far edge.
    auto anchors = [&](int extent) {
        std::vector<int> at;
        if (extent <= tile) {
            at.push_back(0);
            return at;
        }
        for (int p = 0;; p += stride) {
            if (p + tile >= extent) {
                at.push_back(extent - tile);
                break;
            }
            at.push_back(p);
        }
        return at;
    };

    std::vector<double> logit_sum(static_cast<size_t>(H) * W, 0.0);
    std::vector<uint32_t> cover(static_cast<size_t>(H) * W, 0);

    Tensor window(1, cfg.in_channels, tile, tile);
    for (int r0 : anchors(H)) {
        for (int c0 : anchors(W)) {
            std::fill(window.data.begin(), window.data.end(), 0.0);
            for (int b = 0; b < cfg.in_channels; ++b) {
                const RasterGrid& g = *layers[static_cast<size_t>(b)];
                for (int y = 0; y < tile; ++y) {
                    int sy = r0 + y;
                    if (sy >= H) break;
                    for (int x = 0; x < tile; ++x) {
                        int sx = c0 + x;
                        if (sx >= W) break;
                        double v = g.at(sy, sx);
                        window.at(0, b, y, x) = g.is_nodata(v) ? 0.0 : v / normalization_scale;
                    }
                }
            }
            Tensor logits = model.forward(window);
            for (int y = 0; y < tile; ++y) {
                int sy = r0 + y;
                if (sy >= H) break;
                for (int x = 0; x < tile; ++x) {
                    int sx = c0 + x;
                    if (sx >= W) break;
                    size_t i = static_cast<size_t>(sy) * W + sx;
                    logit_sum[i] += logits.at(0, 0, y, x);
                    cover[i] += 1;
                }
            }
        }
    }

    const double logit_threshold = std::log(threshold / (1.0 - threshold));
    RasterGrid mask(W, H, 0.0);
    mask.transform = scene.transform();
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            size_t i = static_cast<size_t>(y) * W + x;
            if (cover[i] == 0) continue;
            // Any-band nodata counts as no observation: background.
            bool invalid = false;
            for (const auto* g : layers) {
                if (g->is_nodata(g->values[i])) {
                    invalid = true;
                    break;
                }
            }
            if (invalid) continue;
            double mean_logit = logit_sum[i] / static_cast<double>(cover[i]);
            mask.values[i] = mean_logit > logit_threshold ? 1.0 : 0.0;
        }
    }
    return mask;
}

namespace {

json model_config_to_json(const ModelConfig& cfg) {
    return json{{"in_channels", cfg.in_channels},
                {"depth", cfg.depth},
                {"base_width", cfg.base_width},
                {"deep_supervision", cfg.deep_supervision},
                {"encoder", cfg.encoder},
                {"pretrained", cfg.pretrained},
                {"out_channels", cfg.out_channels},
                {"init_seed", cfg.init_seed}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.in_channels = j.value("in_channels", cfg.in_channels);
    cfg.depth = j.value("depth", cfg.depth);
    cfg.base_width = j.value("base_width", cfg.base_width);
    cfg.deep_supervision = j.value("deep_supervision", cfg.deep_supervision);
    cfg.encoder = j.value("encoder", cfg.encoder);
    cfg.pretrained = j.value("pretrained", cfg.pretrained);
    cfg.out_channels = j.value("out_channels", cfg.out_channels);
    cfg.init_seed = j.value("init_seed", cfg.init_seed);
    return cfg;
}

constexpr char kCkptMagic[8] = {'M', 'G', 'R', 'V', 'C', 'K', 'P', '1'};

} // namespace

void save_checkpoint(const std::string& path, SegmentationModel& model,
                     const CheckpointMeta& meta) {
    json header;
    header["format_version"] = meta.format_version;
    header["model"] = model_config_to_json(model.config());
    header["band_names"] = meta.band_names;
    header["normalization_scale"] = meta.normalization_scale;
    header["epoch"] = meta.epoch;
    header["best_miou"] = meta.best_miou;
    header["seed"] = meta.seed;
    json params = json::array();
    for (Param* p : model.parameters())
        params.push_back(json{{"name", p->name},
                              {"shape", {p->value.n, p->value.c, p->value.h, p->value.w}}});
    header["params"] = params;
    const std::string head = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("save_checkpoint: cannot open '" + path + "'");
    f.write(kCkptMagic, 8);
    uint64_t len = head.size();
    f.write(reinterpret_cast<const char*>(&len), 8);
    f.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (Param* p : model.parameters())
        f.write(reinterpret_cast<const char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
    if (!f) throw IoError("save_checkpoint: short write to '" + path + "'");
}

SegmentationModel load_checkpoint(const std::string& path, CheckpointMeta* meta_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_checkpoint: cannot open '" + path + "'");
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw IoError("load_checkpoint: '" + path + "' is not a checkpoint file");
    uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 8);
    std::string head(len, '\0');
    f.read(head.data(), static_cast<std::streamsize>(len));
    if (!f) throw IoError("load_checkpoint: truncated header in '" + path + "'");
    json header = json::parse(head, nullptr, false);
    if (header.is_discarded())
        throw IoError("load_checkpoint: corrupt header in '" + path + "'");

    CheckpointMeta meta;
    meta.format_version = header.value("format_version", 1);
    meta.model = model_config_from_json(header.at("model"));
    meta.band_names = header.value("band_names", std::vector<std::string>{});
    meta.normalization_scale = header.value("normalization_scale", 10000.0);
    meta.epoch = header.value("epoch", 0);
    meta.best_miou = header.value("best_miou", 0.0);
    meta.seed = header.value("seed", static_cast<uint64_t>(0));

    SegmentationModel model(meta.model);
    auto params = model.parameters();
    const auto& plist = header.at("params");
    if (plist.size() != params.size())
        throw IoError("load_checkpoint: parameter count mismatch in '" + path + "'");
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& entry = plist[i];
        if (entry.at("name").get<std::string>() != params[i]->name)
            throw IoError("load_checkpoint: parameter order mismatch at '" + params[i]->name + "'");
        f.read(reinterpret_cast<char*>(params[i]->value.data.data()),
               static_cast<std::streamsize>(params[i]->value.data.size() * sizeof(double)));
    }
    if (!f) throw IoError("load_checkpoint: truncated weights in '" + path + "'");
    if (meta_out) *meta_out = meta;
    return model;
}

} // namespace mangrove::nn
