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
#ifndef MANGROVE_CONFIG_HPP
#define MANGROVE_CONFIG_HPP

#include <set>
#include <string>
#include <vector>

#include "mangrove/change.hpp"
#include "mangrove/optim.hpp"
#include "mangrove/unetpp.hpp"

namespace mangrove {

struct PathsConfig {
    std::string manifest;
    std::string labels;      // label raster aligned with the label-year composite
    int label_year = 0;
    std::string study_area;  // optional region mask for clipping
    std::vector<std::pair<std::string, std::string>> regions; // (name, path)
    std::string workspace = "workspace";
};

struct PreprocessConfig {
    double max_cloud_pct = 10.0; // strict "less than"
    double ndwi_threshold = 0.0;
    std::set<int> qa_cloudy_codes = {3, 8, 9, 10};
    std::string green_band = "B3";
    std::string nir_band = "B8";
    std::string reducer = "median";
};

struct DatasetConfig {
    int tile_size = 256;
    int stride = 256;
    double val_fraction = 0.1;
    uint64_t seed = 42;
    double normalization_scale = 10000.0;
    int strata_grid = 4;
};

struct PredictConfig {
    int tile = 256;
    int overlap = 32;
    double threshold = 0.5;
};

struct AnalysisConfig {
    double carbon_density = kDefaultCarbonDensityTPerHa;
    double co2_factor = kCo2PerCarbon;
    std::string mean_rate = "geometric"; // or "arithmetic"
    std::vector<int> years;              // empty: every mask present in the workspace
};

struct PipelineConfig {
    PathsConfig paths;
    PreprocessConfig preprocess;
    DatasetConfig dataset;
    // Which bands feed the model, in input-channel order. The default picks
    // the 11 Level-2A reflectance bands B2-B8, B8A, B9, B11, B12; the source
    // publication does not name its band subset, so this is configurable.
    std::vector<std::string> model_bands = {"B2", "B3", "B4",  "B5", "B6", "B7",
                                            "B8", "B8A", "B9", "B11", "B12"};
    nn::ModelConfig model;
    nn::TrainConfig train;
    PredictConfig predict;
    AnalysisConfig analysis;

    void validate() const;

    /// Canonical JSON rendering (sorted keys); basis of the config hash.
    std::string canonical_json() const;

    /// FNV-1a fingerprint of the canonical form, e.g. "fnv1a:9a3c...".
    std::string config_hash() const;
};

/// Loads a YAML pipeline config. Unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::string& path);

/// Applies a dotted-path override, e.g. "train.lr0=0.001".
void apply_override(PipelineConfig& cfg, const std::string& assignment);

/// Applies every MANGROVE_<SECTION>_<KEY> environment variable.
void apply_env_overrides(PipelineConfig& cfg);

} // namespace mangrove

#endif
