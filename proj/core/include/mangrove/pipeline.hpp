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
#ifndef MANGROVE_PIPELINE_HPP
#define MANGROVE_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mangrove/change.hpp"
#include "mangrove/config.hpp"
#include "mangrove/dataset.hpp"
#include "mangrove/metrics.hpp"
#include "mangrove/preprocess.hpp"
#include "mangrove/train.hpp"

namespace mangrove {

// Pipeline stages behind the CLI subcommands. Every stage writes its
// artifacts under the workspace layout
//   workspace/<year>/composite.tif
//   workspace/tiles/{train,val,index.json}
//   workspace/checkpoints/best.ckpt
//   workspace/masks/<year>.tif
//   workspace/reports/...
// and is a pure function of (config, upstream artifacts, seeds): reruns
// produce byte-identical outputs. Missing upstream artifacts raise
// DataAvailabilityError naming the file.

std::string workspace_composite_path(const PipelineConfig& cfg, int year);
std::string workspace_mask_path(const PipelineConfig& cfg, int year);
std::string workspace_checkpoint_path(const PipelineConfig& cfg);
std::string workspace_tiles_dir(const PipelineConfig& cfg);
std::string workspace_reports_dir(const PipelineConfig& cfg);

/// Scene selection + tide window + composite for one year.
PreprocessReport run_preprocess(const PipelineConfig& cfg, int year);

struct TileStageResult {
    TileStoreIndex index;
    size_t with_mangrove = 0;
    size_t without_mangrove = 0;
};

/// Cuts the label-year composite into training tiles and splits them.
TileStageResult run_tile(const PipelineConfig& cfg);

/// Trains on the tile store; persists the best checkpoint and the curve.
nn::TrainResult run_train(const PipelineConfig& cfg);

/// Whole-scene inference for one year; returns the mask path.
std::string run_predict(const PipelineConfig& cfg, int year);

struct EvaluateResult {
    ConfusionMatrix cm;
    Metrics scores;
    std::string report_json;
    std::string report_csv;
};

/// Accuracy assessment of a predicted mask against a truth raster.
/// truth_path defaults to the configured label raster.
EvaluateResult run_evaluate(const PipelineConfig& cfg, int year,
                            const std::string& truth_path = "");

struct AnalyzeResult {
    AreaSeries global;
    std::vector<ChangeRecord> changes;
    GrowthSummary growth;
    std::optional<double> mean_rate_pct; // unset when the first year has no area
    CarbonEstimate carbon;
    std::map<std::string, AreaSeries> regions;
    uint64_t change_gain = 0, change_loss = 0;
    std::string table_csv;
    std::string report_json;
    std::string change_map_tif;
};

/// Multi-year area, change, growth-rate and carbon accounting, plus the
/// gain/loss change map between the first and last analyzed years.
AnalyzeResult run_analyze(const PipelineConfig& cfg, std::vector<int> years = {});

/// Collates available stage reports into summary.json / summary.md.
std::string run_report(const PipelineConfig& cfg);

} // namespace mangrove

#endif
