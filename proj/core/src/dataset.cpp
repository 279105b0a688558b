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
#include "mangrove/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mangrove/geotiff.hpp"

namespace mangrove {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

} // namespace

double DatasetIndex::pct_with() const {
    if (samples.empty()) return 0.0;
    return round2(100.0 * static_cast<double>(with_mangrove.size()) /
                  static_cast<double>(samples.size()));
}

double DatasetIndex::pct_without() const {
    if (samples.empty()) return 0.0;
    return round2(100.0 * static_cast<double>(without_mangrove.size()) /
                  static_cast<double>(samples.size()));
}

void SplitSpec::validate() const {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ArgumentError("SplitSpec: val_fraction must be in (0, 1)");
}

std::vector<TileSample> tile_scene(const MultispectralScene& scene, const RasterGrid& label,
                                   const std::vector<std::string>& bands, int size, int stride,
                                   double normalization_scale, int strata_grid) {
    scene.validate();
    if (stride < 1) throw ArgumentError("tile_scene: stride must be >= 1");
    if (size < 1) throw ArgumentError("tile_scene: size must be >= 1");
    if (strata_grid < 1) throw ArgumentError("tile_scene: strata_grid must be >= 1");
    label.require_aligned_with(scene.bands[0], "tile_scene label");

    std::vector<const RasterGrid*> layers;
    for (const auto& name : bands) layers.push_back(&scene.band(name));
    const int C = static_cast<int>(layers.size());
    const int H = scene.height(), W = scene.width();

    std::vector<TileSample> out;
    if (H < size || W < size) return out; // scene smaller than the tile: nothing to cut

    for (int r0 = 0; r0 + size <= H; r0 += stride) {
        for (int c0 = 0; c0 + size <= W; c0 += stride) {
            TileSample t;
            t.channels = C;
            t.size = size;
            t.image = nn::Tensor(1, C, size, size);
            t.label.assign(static_cast<size_t>(size) * size, 0);
            t.valid.assign(static_cast<size_t>(size) * size, 0);

            size_t n_valid = 0;
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    const size_t i = static_cast<size_t>(y) * size + x;
                    bool ok = true;
                    for (int b = 0; b < C; ++b) {
                        double v = layers[static_cast<size_t>(b)]->at(r0 + y, c0 + x);
                        if (layers[static_cast<size_t>(b)]->is_nodata(v)) {
                            ok = false;
                        } else {
                            t.image.at(0, b, y, x) = v / normalization_scale;
                        }
                    }
                    double lv = label.at(r0 + y, c0 + x);
                    if (label.is_nodata(lv)) ok = false;
                    if (ok) {
                        t.valid[i] = 1;
                        t.label[i] = lv != 0.0 ? 1 : 0;
                        ++n_valid;
                    }
                }
            }
            if (n_valid == 0) continue;

            t.transform = scene.transform().shifted(r0, c0);
            const int cy = r0 + size / 2, cx = c0 + size / 2;
            const int br = std::min(strata_grid - 1, cy * strata_grid / H);
            const int bc = std::min(strata_grid - 1, cx * strata_grid / W);
            t.meta.scene_id = scene.id;
            t.meta.row_off = r0;
            t.meta.col_off = c0;
            t.meta.stratum = br * strata_grid + bc;
            t.meta.id = scene.id + "_r" + std::to_string(r0) + "_c" + std::to_string(c0);
            t.meta.has_mangrove = t.compute_has_mangrove();
            out.push_back(std::move(t));
        }
    }
    return out;
}

DatasetIndex partition_by_content(const std::vector<TileSample>& samples) {
    DatasetIndex idx;
    idx.samples.reserve(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        TileMeta m = samples[i].meta;
        m.has_mangrove = samples[i].compute_has_mangrove();
        if (m.has_mangrove)
            idx.with_mangrove.push_back(i);
        else
            idx.without_mangrove.push_back(i);
        idx.samples.push_back(std::move(m));
    }
    return idx;
}

DatasetIndex partition_by_meta(const std::vector<TileMeta>& metas) {
    DatasetIndex idx;
    idx.samples = metas;
    for (size_t i = 0; i < metas.size(); ++i) {
        if (metas[i].has_mangrove)
            idx.with_mangrove.push_back(i);
        else
            idx.without_mangrove.push_back(i);
    }
    return idx;
}

std::pair<std::vector<TileMeta>, std::vector<TileMeta>> split(const DatasetIndex& index,
                                                              const SplitSpec& spec) {
    spec.validate();
    if (index.with_mangrove.empty())
        throw ArgumentError("split: no mangrove-containing tiles to draw validation from");

    const auto n_val = static_cast<size_t>(
        std::llround(spec.val_fraction * static_cast<double>(index.with_mangrove.size())));
    if (n_val == 0)
        throw ArgumentError("split: validation set would be empty (fraction " +
                            std::to_string(spec.val_fraction) + " of " +
                            std::to_string(index.with_mangrove.size()) + " tiles)");

    std::vector<size_t> pool = index.with_mangrove;
    Rng rng(spec.seed);
    rng.shuffle(pool);
    std::vector<size_t> val_idx(pool.begin(), pool.begin() + static_cast<long>(n_val));
    std::sort(val_idx.begin(), val_idx.end());

    std::vector<uint8_t> in_val(index.samples.size(), 0);
    for (size_t i : val_idx) in_val[i] = 1;

    std::vector<TileMeta> train, val;
    for (size_t i = 0; i < index.samples.size(); ++i) {
        if (in_val[i])
            val.push_back(index.samples[i]);
        else
            train.push_back(index.samples[i]);
    }
    return {std::move(train), std::move(val)};
}

namespace {

template <typename T>
void flip_rows(std::vector<T>& buf, int h, int w) {
    for (int y = 0; y < h / 2; ++y)
        std::swap_ranges(buf.begin() + static_cast<long>(y) * w,
                         buf.begin() + static_cast<long>(y + 1) * w,
                         buf.begin() + static_cast<long>(h - 1 - y) * w);
}

template <typename T>
void flip_cols(std::vector<T>& buf, int h, int w) {
    for (int y = 0; y < h; ++y)
        std::reverse(buf.begin() + static_cast<long>(y) * w,
                     buf.begin() + static_cast<long>(y + 1) * w);
}

// 90-degree counterclockwise rotation of a square plane.
template <typename T>
void rot90_ccw(std::vector<T>& buf, int s) {
    std::vector<T> tmp(buf.size());
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            tmp[static_cast<size_t>(y) * s + x] = buf[static_cast<size_t>(x) * s + (s - 1 - y)];
    buf = std::move(tmp);
}

template <typename T>
void apply_ops(std::vector<T>& buf, int s, bool hflip, bool vflip, int k) {
    if (hflip) flip_cols(buf, s, s);
    if (vflip) flip_rows(buf, s, s);
    for (int r = 0; r < k; ++r) rot90_ccw(buf, s);
}

} // namespace

TileSample augment(const TileSample& sample, Rng& rng) {
    const bool hflip = rng.bernoulli(0.5);
    const bool vflip = rng.bernoulli(0.5);
    const int k = static_cast<int>(rng.uniform_int(4));

    TileSample out = sample;
    const int s = sample.size;
    std::vector<double> plane(static_cast<size_t>(s) * s);
    for (int c = 0; c < sample.channels; ++c) {
        std::copy_n(out.image.plane(0, c), plane.size(), plane.begin());
        apply_ops(plane, s, hflip, vflip, k);
        std::copy_n(plane.begin(), plane.size(), out.image.plane(0, c));
    }
    apply_ops(out.label, s, hflip, vflip, k);
    apply_ops(out.valid, s, hflip, vflip, k);
    return out;
}

std::vector<std::vector<size_t>> stratified_batches(const std::vector<TileMeta>& samples,
                                                    int batch_size, Rng& rng) {
    if (batch_size < 1) throw ArgumentError("stratified_batches: batch_size must be >= 1");
    std::vector<std::vector<size_t>> batches;
    if (samples.empty()) return batches;

    // Group indices per stratum, then shuffle each group.
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < samples.size(); ++i) groups[samples[i].stratum].push_back(i);
    std::vector<int> strata;
    for (auto& [sid, members] : groups) {
        rng.shuffle(members);
        strata.push_back(sid);
    }

    const size_t total = samples.size();
    std::map<int, size_t> cursor; // consumed per stratum
    for (int sid : strata) cursor[sid] = 0;

    size_t emitted = 0;
    while (emitted < total) {
        const size_t want = std::min<size_t>(static_cast<size_t>(batch_size), total - emitted);

        // Largest-remainder quotas on global stratum frequencies.
        std::vector<size_t> quota(strata.size(), 0);
        std::vector<std::pair<double, size_t>> rema; // (-frac, position) for stable order
        size_t assigned = 0;
        for (size_t s = 0; s < strata.size(); ++s) {
            double share = static_cast<double>(want) *
                           static_cast<double>(groups[strata[s]].size()) /
                           static_cast<double>(total);
            quota[s] = static_cast<size_t>(std::floor(share));
            rema.push_back({-(share - std::floor(share)), s});
            assigned += quota[s];
        }
        std::sort(rema.begin(), rema.end());
        for (size_t r = 0; assigned < want && r < rema.size(); ++r) {
            ++quota[rema[r].second];
            ++assigned;
        }

        // Clamp to what each stratum still has; hand shortfalls to the
        // strata with the most left.
        size_t got = 0;
        for (size_t s = 0; s < strata.size(); ++s) {
            size_t left = groups[strata[s]].size() - cursor[strata[s]];
            quota[s] = std::min(quota[s], left);
            got += quota[s];
        }
        while (got < want) {
            size_t best = strata.size();
            size_t best_left = 0;
            for (size_t s = 0; s < strata.size(); ++s) {
                size_t left = groups[strata[s]].size() - cursor[strata[s]] - quota[s];
                if (left > best_left) {
                    best_left = left;
                    best = s;
                }
            }
            if (best == strata.size()) break;
            ++quota[best];
            ++got;
        }

        std::vector<size_t> batch;
        batch.reserve(want);
        for (size_t s = 0; s < strata.size(); ++s) {
            auto& members = groups[strata[s]];
            size_t& cur = cursor[strata[s]];
            for (size_t q = 0; q < quota[s]; ++q) batch.push_back(members[cur++]);
        }
        rng.shuffle(batch);
        emitted += batch.size();
        batches.push_back(std::move(batch));
    }
    return batches;
}

TileSample MemoryTileStore::load(const TileMeta& meta) const {
    auto it = tiles_.find(meta.id);
    if (it == tiles_.end())
        throw DataAvailabilityError("MemoryTileStore: no tile '" + meta.id + "'");
    return it->second;
}

TileSample DiskTileStore::load(const TileMeta& meta) const {
    TileSample t;
    t.meta = meta;
    GeoTiffFile img = read_geotiff((fs::path(root_) / meta.image_file).string());
    GeoTiffFile lbl = read_geotiff((fs::path(root_) / meta.label_file).string());
    if (lbl.bands.size() != 1)
        throw SchemaError("DiskTileStore: label tile '" + meta.label_file + "' must be single-band");
    const int s = img.bands.front().width;
    if (img.bands.front().height != s || lbl.bands.front().width != s ||
        lbl.bands.front().height != s)
        throw SchemaError("DiskTileStore: tile '" + meta.id + "' is not square/aligned");

    t.channels = static_cast<int>(img.bands.size());
    t.size = s;
    t.transform = img.bands.front().transform;
    t.image = nn::Tensor(1, t.channels, s, s);
    for (int c = 0; c < t.channels; ++c)
        std::copy(img.bands[static_cast<size_t>(c)].values.begin(),
                  img.bands[static_cast<size_t>(c)].values.end(), t.image.plane(0, c));
    t.label.assign(static_cast<size_t>(s) * s, 0);
    t.valid.assign(static_cast<size_t>(s) * s, 0);
    const auto& lv = lbl.bands.front().values;
    for (size_t i = 0; i < lv.size(); ++i) {
        if (lv[i] == 255.0) continue; // invalid pixel marker
        t.valid[i] = 1;
        t.label[i] = lv[i] != 0.0 ? 1 : 0;
    }
    return t;
}

namespace {

json meta_to_json(const TileMeta& m) {
    return json{{"id", m.id},
                {"scene_id", m.scene_id},
                {"row_off", m.row_off},
                {"col_off", m.col_off},
                {"stratum", m.stratum},
                {"has_mangrove", m.has_mangrove},
                {"image", m.image_file},
                {"label", m.label_file}};
}

TileMeta meta_from_json(const json& j) {
    TileMeta m;
    m.id = j.at("id").get<std::string>();
    m.scene_id = j.value("scene_id", std::string{});
    m.row_off = j.value("row_off", 0);
    m.col_off = j.value("col_off", 0);
    m.stratum = j.value("stratum", 0);
    m.has_mangrove = j.value("has_mangrove", false);
    m.image_file = j.value("image", std::string{});
    m.label_file = j.value("label", std::string{});
    return m;
}

void write_tile_files(const std::string& root, const std::string& split_dir,
                      const TileSample& t, TileMeta& meta) {
    meta.image_file = split_dir + "/" + meta.id + "_img.tif";
    meta.label_file = split_dir + "/" + meta.id + "_lbl.tif";

    std::vector<RasterGrid> bands(static_cast<size_t>(t.channels));
    std::vector<const RasterGrid*> ptrs;
    for (int c = 0; c < t.channels; ++c) {
        RasterGrid& g = bands[static_cast<size_t>(c)];
        g = RasterGrid(t.size, t.size);
        g.transform = t.transform;
        g.values.assign(t.image.plane(0, c), t.image.plane(0, c) + g.values.size());
        ptrs.push_back(&g);
    }
    GeoTiffWriteOptions img_opts;
    img_opts.dtype = TiffDataType::Float32;
    write_geotiff((fs::path(root) / meta.image_file).string(), ptrs, {}, img_opts);

    RasterGrid lbl(t.size, t.size, 0.0, 255.0);
    lbl.transform = t.transform;
    for (size_t i = 0; i < t.label.size(); ++i)
        lbl.values[i] = t.valid[i] ? static_cast<double>(t.label[i]) : 255.0;
    GeoTiffWriteOptions lbl_opts;
    lbl_opts.dtype = TiffDataType::UInt8;
    write_geotiff((fs::path(root) / meta.label_file).string(), lbl, lbl_opts);
}

} // namespace

TileStoreIndex write_tile_store(const std::string& root, const std::vector<TileSample>& train,
                                const std::vector<TileSample>& val, const TileStoreInfo& info) {
    fs::create_directories(fs::path(root) / "train");
    fs::create_directories(fs::path(root) / "val");

    TileStoreIndex index;
    index.info = info;
    size_t with = 0;
    for (const auto* split_samples : {&train, &val}) {
        const bool is_train = split_samples == &train;
        for (const TileSample& t : *split_samples) {
            TileMeta meta = t.meta;
            write_tile_files(root, is_train ? "train" : "val", t, meta);
            if (meta.has_mangrove) ++with;
            (is_train ? index.train : index.val).push_back(std::move(meta));
        }
    }

    const size_t total = train.size() + val.size();
    json doc;
    doc["tile_size"] = info.tile_size;
    doc["channels"] = info.channels;
    doc["band_names"] = info.band_names;
    doc["normalization_scale"] = info.normalization_scale;
    doc["strata_grid"] = info.strata_grid;
    doc["seed"] = info.seed;
    json counts;
    counts["total"] = total;
    counts["with_mangrove"] = with;
    counts["without_mangrove"] = total - with;
    counts["pct_with"] = total ? round2(100.0 * static_cast<double>(with) / total) : 0.0;
    counts["pct_without"] =
        total ? round2(100.0 * static_cast<double>(total - with) / total) : 0.0;
    doc["counts"] = counts;
    json splits;
    splits["train"] = json::array();
    for (const auto& m : index.train) splits["train"].push_back(meta_to_json(m));
    splits["val"] = json::array();
    for (const auto& m : index.val) splits["val"].push_back(meta_to_json(m));
    doc["splits"] = splits;
    if (!info.provenance_json.empty()) doc["provenance"] = json::parse(info.provenance_json);

    std::ofstream f(fs::path(root) / "index.json", std::ios::trunc);
    if (!f) throw IoError("write_tile_store: cannot write index.json under '" + root + "'");
    f << doc.dump(2) << "\n";
    return index;
}

TileStoreIndex read_tile_store_index(const std::string& root) {
    std::ifstream f(fs::path(root) / "index.json");
    if (!f) throw IoError("read_tile_store_index: no index.json under '" + root + "'");
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("read_tile_store_index: corrupt index.json");

    TileStoreIndex index;
    index.info.tile_size = doc.value("tile_size", 256);
    index.info.channels = doc.value("channels", 11);
    index.info.band_names = doc.value("band_names", std::vector<std::string>{});
    index.info.normalization_scale = doc.value("normalization_scale", 10000.0);
    index.info.strata_grid = doc.value("strata_grid", 4);
    index.info.seed = doc.value("seed", static_cast<uint64_t>(42));
    for (const auto& j : doc.at("splits").at("train")) index.train.push_back(meta_from_json(j));
    for (const auto& j : doc.at("splits").at("val")) index.val.push_back(meta_from_json(j));
    return index;
}

} // namespace mangrove
