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
#ifndef MANGROVE_DATASET_HPP
#define MANGROVE_DATASET_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mangrove/geo.hpp"
#include "mangrove/rng.hpp"
#include "mangrove/tensor.hpp"

namespace mangrove {

/// Lightweight tile descriptor; pixel payloads live in a TileStore.
struct TileMeta {
    std::string id;
    std::string scene_id;
    int row_off = 0;
    int col_off = 0;
    int stratum = 0;
    bool has_mangrove = false;
    std::string image_file; // relative to the store root
    std::string label_file;
};

/// One image/label training tile. `label` is {0,1}; `valid` marks pixels
/// where every band and the label carry real observations.
struct TileSample {
    TileMeta meta;
    GeoTransform transform; // of the tile's own grid
    int channels = 0;
    int size = 0;
    nn::Tensor image;           // [1, channels, size, size], normalized reflectance
    std::vector<uint8_t> label; // size*size
    std::vector<uint8_t> valid; // size*size

    bool compute_has_mangrove() const {
        for (size_t i = 0; i < label.size(); ++i)
            if (valid[i] && label[i]) return true;
        return false;
    }
};

struct DatasetIndex {
    std::vector<TileMeta> samples;
    std::vector<size_t> with_mangrove;    // indices into samples
    std::vector<size_t> without_mangrove;

    double pct_with() const;
    double pct_without() const;
};

struct SplitSpec {
    double val_fraction = 0.1; // of mangrove-containing tiles
    uint64_t seed = 42;

    void validate() const;
};

/// Cuts all fully-inside tiles on the stride lattice. Tiles whose pixels are
/// all nodata are dropped. Band values are divided by normalization_scale;
/// nodata band pixels become 0 with valid=0. The stratum id is the tile
/// center's cell on a strata_grid x strata_grid block grid over the scene.
std::vector<TileSample> tile_scene(const MultispectralScene& scene, const RasterGrid& label,
                                   const std::vector<std::string>& bands, int size, int stride,
                                   double normalization_scale = 10000.0, int strata_grid = 4);

/// Splits samples into mangrove / non-mangrove by actual label content.
DatasetIndex partition_by_content(const std::vector<TileSample>& samples);

/// Same partition computed from cached has_mangrove flags.
DatasetIndex partition_by_meta(const std::vector<TileMeta>& metas);

/// Validation tiles are drawn from the mangrove-containing partition only:
/// round(val_fraction * |with_mangrove|) of them, seeded; everything else
/// trains. Throws ArgumentError when the validation set would be empty.
std::pair<std::vector<TileMeta>, std::vector<TileMeta>> split(const DatasetIndex& index,
                                                              const SplitSpec& spec);

/// Independently drawn horizontal flip, vertical flip and k*90-degree
/// rotation (k in 0..3), applied identically to image, label and valid.
TileSample augment(const TileSample& sample, Rng& rng);

/// One epoch of batches covering every sample exactly once. Within each
/// batch, strata are represented proportionally to their global frequency
/// (largest-remainder rounding, clamped when a stratum runs out). The final
/// partial batch is allowed. Returns indices into `samples`.
std::vector<std::vector<size_t>> stratified_batches(const std::vector<TileMeta>& samples,
                                                    int batch_size, Rng& rng);

/// Pixel-payload source keyed by TileMeta.
class TileStore {
public:
    virtual ~TileStore() = default;
    virtual TileSample load(const TileMeta& meta) const = 0;
};

class MemoryTileStore : public TileStore {
public:
    void add(TileSample sample) { tiles_[sample.meta.id] = std::move(sample); }
    TileSample load(const TileMeta& meta) const override;

private:
    std::map<std::string, TileSample> tiles_;
};

/// Reads tiles written by write_tile_store.
class DiskTileStore : public TileStore {
public:
    explicit DiskTileStore(std::string root) : root_(std::move(root)) {}
    TileSample load(const TileMeta& meta) const override;

private:
    std::string root_;
};

struct TileStoreInfo {
    int tile_size = 256;
    int channels = 11;
    std::vector<std::string> band_names;
    double normalization_scale = 10000.0;
    int strata_grid = 4;
    uint64_t seed = 42;
    std::string provenance_json; // optional provenance object
};

struct TileStoreIndex {
    TileStoreInfo info;
    std::vector<TileMeta> train;
    std::vector<TileMeta> val;
};

/// Writes <root>/{train,val}/<id>_{img,lbl}.tif plus <root>/index.json.
/// Rewrites are byte-identical for identical inputs. Returns the index with
/// file paths filled in.
TileStoreIndex write_tile_store(const std::string& root, const std::vector<TileSample>& train,
                                const std::vector<TileSample>& val, const TileStoreInfo& info);

TileStoreIndex read_tile_store_index(const std::string& root);

} // namespace mangrove

#endif
