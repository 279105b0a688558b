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
#include "mangrove/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mangrove/geotiff.hpp"
#include "mangrove/plot.hpp"
#include "mangrove/version.hpp"

namespace mangrove {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json provenance(const PipelineConfig& cfg, const std::string& stage, uint64_t seed) {
    return json{{"tool", std::string("mangrove-toolkit ") + kVersion},
                {"stage", stage},
                {"stage_version", 1},
                {"config_hash", cfg.config_hash()},
                {"seed", seed}};
}

std::string provenance_comment(const PipelineConfig& cfg, const std::string& stage,
                               uint64_t seed) {
    std::ostringstream os;
    os << "# mangrove-toolkit " << kVersion << " stage=" << stage
       << " config=" << cfg.config_hash() << " seed=" << seed;
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << text;
}

void write_json_file(const std::string& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataAvailabilityError("missing upstream artifact '" + path + "'");
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("corrupt JSON at '" + path + "'");
    return doc;
}

std::string fixed2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

std::optional<RegionMask> load_study_area(const PipelineConfig& cfg) {
    if (cfg.paths.study_area.empty()) return std::nullopt;
    GeoTiffFile f = read_geotiff(cfg.paths.study_area);
    if (f.bands.empty()) throw SchemaError("study_area raster has no bands");
    return RegionMask{"study_area", std::move(f.bands.front())};
}

} // namespace

std::string workspace_composite_path(const PipelineConfig& cfg, int year) {
    return (fs::path(cfg.paths.workspace) / std::to_string(year) / "composite.tif").string();
}
std::string workspace_mask_path(const PipelineConfig& cfg, int year) {
    return (fs::path(cfg.paths.workspace) / "masks" / (std::to_string(year) + ".tif")).string();
}
std::string workspace_checkpoint_path(const PipelineConfig& cfg) {
    return (fs::path(cfg.paths.workspace) / "checkpoints" / "best.ckpt").string();
}
std::string workspace_tiles_dir(const PipelineConfig& cfg) {
    return (fs::path(cfg.paths.workspace) / "tiles").string();
}
std::string workspace_reports_dir(const PipelineConfig& cfg) {
    return (fs::path(cfg.paths.workspace) / "reports").string();
}

PreprocessReport run_preprocess(const PipelineConfig& cfg, int year) {
    cfg.validate();
    Manifest manifest = load_manifest(cfg.paths.manifest);
    auto year_entries = manifest.for_year(year);
    if (year_entries.empty())
        throw DataAvailabilityError("preprocess: manifest has no scenes for year " +
                                    std::to_string(year));
    auto entries = filter_scenes(year_entries, cfg.preprocess.max_cloud_pct);
    if (entries.empty())
        throw DataAvailabilityError("preprocess: every scene of year " + std::to_string(year) +
                                    " exceeds the cloud threshold (" +
                                    fixed2(cfg.preprocess.max_cloud_pct) + "%)");

    QaConfig qa{cfg.preprocess.qa_cloudy_codes};
    auto study_area = load_study_area(cfg);
    auto loader = [](const ManifestEntry& e) { return load_scene(e); };

    PreprocessReport report =
        monthly_water_series(entries, loader, qa, cfg.preprocess.green_band,
                             cfg.preprocess.nir_band, cfg.preprocess.ndwi_threshold, study_area);

    MultispectralScene composite =
        build_window_composite(entries, loader, report.window, study_area, qa,
                               reducer_from_string(cfg.preprocess.reducer));
    composite.id = "composite_" + std::to_string(year);
    composite.year = year;

    const std::string comp_path = workspace_composite_path(cfg, year);
    fs::create_directories(fs::path(comp_path).parent_path());
    GeoTiffWriteOptions opts;
    opts.metadata_json = json{{"provenance", provenance(cfg, "preprocess", 0)}}.dump();
    write_scene_geotiff(comp_path, composite, "SCL", opts);

    json doc;
    doc["year"] = year;
    doc["scenes_considered"] = report.scenes_considered;
    doc["scenes_in_window"] = report.scenes_in_window;
    json monthly = json::array();
    for (const auto& m : report.monthly)
        monthly.push_back({{"year", m.year},
                           {"month", m.month},
                           {"water_hectares", m.water_hectares},
                           {"scene_count", m.scene_count}});
    doc["monthly_water_area"] = monthly;
    doc["window"] = {{{"year", report.window.months[0].first},
                      {"month", report.window.months[0].second}},
                     {{"year", report.window.months[1].first},
                      {"month", report.window.months[1].second}}};
    doc["composite"] = comp_path;
    doc["provenance"] = provenance(cfg, "preprocess", 0);
    write_json_file((fs::path(workspace_reports_dir(cfg)) /
                     ("preprocess_" + std::to_string(year) + ".json"))
                        .string(),
                    doc);
    return report;
}

TileStageResult run_tile(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.paths.label_year == 0)
        throw ConfigError("tile: paths.label_year must be set");
    if (cfg.paths.labels.empty()) throw ConfigError("tile: paths.labels must be set");

    const std::string comp_path = workspace_composite_path(cfg, cfg.paths.label_year);
    if (!fs::exists(comp_path))
        throw DataAvailabilityError("tile: missing upstream artifact '" + comp_path +
                                    "'; run preprocess for year " +
                                    std::to_string(cfg.paths.label_year));
    MultispectralScene composite = read_scene_geotiff(comp_path, "SCL");

    GeoTiffFile label_file = read_geotiff(cfg.paths.labels);
    if (label_file.bands.empty()) throw SchemaError("tile: label raster has no bands");
    const RasterGrid& labels = label_file.bands.front();

    auto samples = tile_scene(composite, labels, cfg.model_bands, cfg.dataset.tile_size,
                              cfg.dataset.stride, cfg.dataset.normalization_scale,
                              cfg.dataset.strata_grid);
    if (samples.empty())
        throw DataAvailabilityError("tile: no usable tiles (scene smaller than the tile size, "
                                    "or fully nodata)");

    DatasetIndex index = partition_by_content(samples);
    SplitSpec spec{cfg.dataset.val_fraction, cfg.dataset.seed};
    auto [train_meta, val_meta] = split(index, spec);

    // Order samples by the split result.
    std::map<std::string, const TileSample*> by_id;
    for (const auto& s : samples) by_id[s.meta.id] = &s;
    std::vector<TileSample> train_samples, val_samples;
    for (const auto& m : train_meta) train_samples.push_back(*by_id.at(m.id));
    for (const auto& m : val_meta) val_samples.push_back(*by_id.at(m.id));

    TileStoreInfo info;
    info.tile_size = cfg.dataset.tile_size;
    info.channels = static_cast<int>(cfg.model_bands.size());
    info.band_names = cfg.model_bands;
    info.normalization_scale = cfg.dataset.normalization_scale;
    info.strata_grid = cfg.dataset.strata_grid;
    info.seed = cfg.dataset.seed;
    info.provenance_json = provenance(cfg, "tile", cfg.dataset.seed).dump();

    TileStageResult result;
    result.index = write_tile_store(workspace_tiles_dir(cfg), train_samples, val_samples, info);
    result.with_mangrove = index.with_mangrove.size();
    result.without_mangrove = index.without_mangrove.size();
    return result;
}

nn::TrainResult run_train(const PipelineConfig& cfg) {
    cfg.validate();
    const std::string tiles_dir = workspace_tiles_dir(cfg);
    if (!fs::exists(fs::path(tiles_dir) / "index.json"))
        throw DataAvailabilityError("train: missing upstream artifact '" + tiles_dir +
                                    "/index.json'; run tile first");
    TileStoreIndex index = read_tile_store_index(tiles_dir);
    DiskTileStore store(tiles_dir);

    nn::ModelConfig mcfg = cfg.model;
    mcfg.in_channels = index.info.channels;
    nn::SegmentationModel model(mcfg);

    const std::string ckpt = workspace_checkpoint_path(cfg);
    fs::create_directories(fs::path(ckpt).parent_path());

    nn::TrainOptions opts;
    opts.checkpoint_path = ckpt;
    opts.band_names = index.info.band_names;
    opts.normalization_scale = index.info.normalization_scale;
    opts.threshold = cfg.predict.threshold;

    nn::TrainResult result = train(model, store, index.train, index.val, cfg.train, opts);

    // Curve CSV + plot (training-loss / validation-mIoU analogue).
    std::ostringstream csv;
    csv << provenance_comment(cfg, "train", cfg.train.seed) << "\n";
    csv << "epoch,train_loss,val_miou,lr\n";
    for (const auto& r : result.curve.records) {
        csv << r.epoch << "," << std::setprecision(12) << r.train_loss << "," << r.val_miou << ","
            << r.lr << "\n";
    }
    const std::string reports = workspace_reports_dir(cfg);
    write_text((fs::path(reports) / "training_curve.csv").string(), csv.str());

    LinePlot plot;
    plot.title = "TRAINING CURVE";
    plot.x_label = "EPOCH";
    plot.y_label = "LOSS / MIOU";
    PlotSeries loss{"TRAIN LOSS", {200, 60, 40}, {}};
    PlotSeries miou{"VAL MIOU", {30, 90, 200}, {}};
    for (const auto& r : result.curve.records) {
        loss.points.push_back({static_cast<double>(r.epoch), r.train_loss});
        miou.points.push_back({static_cast<double>(r.epoch), r.val_miou});
    }
    plot.series = {loss, miou};
    render_line_plot(plot, (fs::path(reports) / "training_curve.png").string());

    json doc;
    doc["best_epoch"] = result.best_epoch;
    doc["best_miou"] = result.best_miou;
    doc["epochs_run"] = result.epochs_run;
    doc["early_stopped"] = result.early_stopped;
    doc["checkpoint"] = ckpt;
    doc["provenance"] = provenance(cfg, "train", cfg.train.seed);
    write_json_file((fs::path(reports) / "training.json").string(), doc);
    return result;
}

std::string run_predict(const PipelineConfig& cfg, int year) {
    cfg.validate();
    const std::string ckpt_path = workspace_checkpoint_path(cfg);
    if (!fs::exists(ckpt_path))
        throw DataAvailabilityError("predict: missing upstream artifact '" + ckpt_path +
                                    "'; run train first");
    const std::string comp_path = workspace_composite_path(cfg, year);
    if (!fs::exists(comp_path))
        throw DataAvailabilityError("predict: missing upstream artifact '" + comp_path +
                                    "'; run preprocess for year " + std::to_string(year));

    nn::CheckpointMeta meta;
    nn::SegmentationModel model = nn::load_checkpoint(ckpt_path, &meta);
    MultispectralScene scene = read_scene_geotiff(comp_path, "SCL");

    RasterGrid mask = nn::predict_mask(model, scene, meta.band_names, meta.normalization_scale,
                                       cfg.predict.tile, cfg.predict.overlap,
                                       cfg.predict.threshold);

    const std::string mask_path = workspace_mask_path(cfg, year);
    fs::create_directories(fs::path(mask_path).parent_path());
    GeoTiffWriteOptions opts;
    opts.dtype = TiffDataType::UInt8;
    opts.metadata_json =
        json{{"provenance", provenance(cfg, "predict", meta.seed)}, {"year", year}}.dump();
    write_geotiff(mask_path, mask, opts);
    return mask_path;
}

EvaluateResult run_evaluate(const PipelineConfig& cfg, int year, const std::string& truth_path) {
    cfg.validate();
    const std::string mask_path = workspace_mask_path(cfg, year);
    if (!fs::exists(mask_path))
        throw DataAvailabilityError("evaluate: missing upstream artifact '" + mask_path +
                                    "'; run predict for year " + std::to_string(year));
    const std::string truth_file = truth_path.empty() ? cfg.paths.labels : truth_path;
    if (truth_file.empty() || !fs::exists(truth_file))
        throw DataAvailabilityError("evaluate: truth raster '" + truth_file + "' not found");

    GeoTiffFile pred_f = read_geotiff(mask_path);
    GeoTiffFile truth_f = read_geotiff(truth_file);
    const RasterGrid& pred = pred_f.bands.front();
    const RasterGrid& truth = truth_f.bands.front();

    EvaluateResult result;
    result.cm = confusion(pred, truth);
    result.scores = metrics(result.cm);

    const std::string reports = workspace_reports_dir(cfg);
    auto opt_json = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json doc;
    doc["year"] = year;
    doc["confusion"] = {{"tp", result.cm.tp}, {"fp", result.cm.fp}, {"fn", result.cm.fn},
                        {"tn", result.cm.tn}};
    doc["producer_accuracy"] = opt_json(result.scores.producer_acc);
    doc["user_accuracy"] = opt_json(result.scores.user_acc);
    doc["f1"] = opt_json(result.scores.f1);
    doc["iou_mangrove"] = opt_json(result.scores.iou_pos);
    doc["iou_background"] = opt_json(result.scores.iou_neg);
    doc["miou"] = opt_json(result.scores.miou);
    doc["overall_accuracy"] = opt_json(result.scores.overall_acc);
    doc["provenance"] = provenance(cfg, "evaluate", 0);
    result.report_json =
        (fs::path(reports) / ("evaluate_" + std::to_string(year) + ".json")).string();
    write_json_file(result.report_json, doc);

    std::ostringstream csv;
    csv << provenance_comment(cfg, "evaluate", 0) << "\n";
    csv << "metric,value\n";
    auto put = [&](const char* name, const std::optional<double>& v) {
        csv << name << "," << (v ? std::to_string(*v) : "NA") << "\n";
    };
    put("producer_accuracy", result.scores.producer_acc);
    put("user_accuracy", result.scores.user_acc);
    put("f1", result.scores.f1);
    put("iou_mangrove", result.scores.iou_pos);
    put("iou_background", result.scores.iou_neg);
    put("miou", result.scores.miou);
    result.report_csv =
        (fs::path(reports) / ("evaluate_" + std::to_string(year) + ".csv")).string();
    write_text(result.report_csv, csv.str());

    // Optional visual check when a composite with visible bands exists.
    const std::string comp_path = workspace_composite_path(cfg, year);
    if (fs::exists(comp_path)) {
        MultispectralScene scene = read_scene_geotiff(comp_path, "SCL");
        if (scene.has_band("B4") && scene.has_band("B3") && scene.has_band("B2")) {
            render_triptych(scene.band("B4"), scene.band("B3"), scene.band("B2"), truth, pred,
                            (fs::path(reports) / ("evaluate_" + std::to_string(year) + ".png"))
                                .string());
        }
    }
    return result;
}

AnalyzeResult run_analyze(const PipelineConfig& cfg, std::vector<int> years) {
    cfg.validate();
    if (years.empty()) years = cfg.analysis.years;
    if (years.empty()) {
        // Fall back to every mask in the workspace.
        const fs::path masks_dir = fs::path(cfg.paths.workspace) / "masks";
        if (fs::exists(masks_dir)) {
            for (const auto& e : fs::directory_iterator(masks_dir)) {
                if (e.path().extension() == ".tif") {
                    try {
                        years.push_back(std::stoi(e.path().stem().string()));
                    } catch (...) {
                    }
                }
            }
        }
        std::sort(years.begin(), years.end());
    }
    if (years.size() < 2)
        throw ArgumentError("analyze: need at least 2 years of masks, got " +
                            std::to_string(years.size()));
    std::sort(years.begin(), years.end());

    std::map<int, RasterGrid> masks;
    for (int y : years) {
        const std::string p = workspace_mask_path(cfg, y);
        if (!fs::exists(p))
            throw DataAvailabilityError("analyze: missing upstream artifact '" + p +
                                        "'; run predict for year " + std::to_string(y));
        GeoTiffFile f = read_geotiff(p);
        masks.emplace(y, std::move(f.bands.front()));
    }

    const double px_ha = pixel_area_hectares(masks.begin()->second.transform);

    AnalyzeResult result;
    result.global = global_series(masks, px_ha);
    result.changes = annual_changes(result.global);
    result.growth = total_growth(result.global);
    try {
        result.mean_rate_pct = mean_annual_growth_rate(
            result.global, cfg.analysis.mean_rate == "arithmetic" ? MeanRateKind::Arithmetic
                                                                  : MeanRateKind::Geometric);
    } catch (const ArgumentError&) {
        // zero-area years make the rate undefined; reported as null
    }
    result.carbon =
        carbon_estimate(result.growth.delta_ha, cfg.analysis.carbon_density, cfg.analysis.co2_factor);

    // Per-region accounting when region masks are configured.
    std::vector<RegionMask> regions;
    for (const auto& [name, path] : cfg.paths.regions) {
        GeoTiffFile f = read_geotiff(path);
        regions.push_back(RegionMask{name, std::move(f.bands.front())});
    }
    if (!regions.empty()) result.regions = per_region_series(masks, regions, px_ha);

    // Change map between the first and last year.
    ChangeMap cmap = change_map(masks.at(years.front()), masks.at(years.back()));
    result.change_gain = cmap.gain;
    result.change_loss = cmap.loss;

    const std::string reports = workspace_reports_dir(cfg);
    fs::create_directories(reports);

    result.change_map_tif =
        (fs::path(reports) /
         ("change_map_" + std::to_string(years.front()) + "_" + std::to_string(years.back()) +
          ".tif"))
            .string();
    {
        GeoTiffWriteOptions opts;
        opts.dtype = TiffDataType::UInt8;
        std::vector<ColorEntry> palette;
        for (const auto& c : change_map_colors()) palette.push_back({c[0], c[1], c[2]});
        opts.color_table = palette;
        opts.metadata_json =
            json{{"provenance", provenance(cfg, "analyze", 0)},
                 {"classes",
                  {{"0", "stable-absent"}, {"1", "gain"}, {"2", "loss"}, {"3", "stable-present"}}},
                 {"earlier", years.front()},
                 {"later", years.back()}}
                .dump();
        write_geotiff(result.change_map_tif, cmap.classes, opts);
    }

    // Published-table CSV schema; 2-decimal rounding happens only here.
    std::ostringstream csv;
    csv << provenance_comment(cfg, "analyze", 0) << "\n";
    csv << "Years,Area (ha),Annual change (ha),Annual change rate (%)\n";
    for (const auto& rec : result.changes) {
        csv << rec.year << "," << fixed2(rec.area_ha) << ",";
        if (rec.annual_change_ha) csv << fixed2(*rec.annual_change_ha);
        csv << ",";
        if (rec.annual_change_pct) csv << fixed2(*rec.annual_change_pct);
        csv << "\n";
    }
    result.table_csv = (fs::path(reports) / "area_table.csv").string();
    write_text(result.table_csv, csv.str());

    json doc;
    doc["years"] = years;
    json series = json::array();
    for (const auto& [y, a] : result.global.entries) series.push_back({{"year", y}, {"area_ha", a}});
    doc["area_series"] = series;
    json changes = json::array();
    for (const auto& rec : result.changes) {
        json r{{"year", rec.year}, {"area_ha", rec.area_ha}};
        r["annual_change_ha"] = rec.annual_change_ha ? json(*rec.annual_change_ha) : json(nullptr);
        r["annual_change_pct"] =
            rec.annual_change_pct ? json(*rec.annual_change_pct) : json(nullptr);
        changes.push_back(r);
    }
    doc["annual_changes"] = changes;
    doc["total_growth"] = {{"delta_ha", result.growth.delta_ha},
                           {"pct", result.growth.pct ? json(*result.growth.pct) : json(nullptr)}};
    doc["mean_annual_growth_rate_pct"] =
        result.mean_rate_pct ? json(*result.mean_rate_pct) : json(nullptr);
    doc["mean_rate_kind"] = cfg.analysis.mean_rate;
    doc["carbon"] = {{"area_delta_ha", result.carbon.area_delta_ha},
                     {"carbon_density_t_per_ha", result.carbon.carbon_density_t_per_ha},
                     {"carbon_t", result.carbon.carbon_t},
                     {"co2_factor", result.carbon.co2_factor},
                     {"co2_t", result.carbon.co2_t}};
    json regions_json = json::object();
    for (const auto& [name, series_r] : result.regions) {
        json entries = json::array();
        for (const auto& [y, a] : series_r.entries)
            entries.push_back({{"year", y}, {"area_ha", a}});
        regions_json[name] = entries;
    }
    doc["regions"] = regions_json;
    doc["change_map"] = {{"file", result.change_map_tif},
                         {"gain_px", result.change_gain},
                         {"loss_px", result.change_loss},
                         {"stable_present_px", cmap.stable_present},
                         {"stable_absent_px", cmap.stable_absent}};
    doc["provenance"] = provenance(cfg, "analyze", 0);
    result.report_json = (fs::path(reports) / "analysis.json").string();
    write_json_file(result.report_json, doc);

    // Area trend plot (whole study area).
    LinePlot trend;
    trend.title = "MANGROVE AREA";
    trend.x_label = "YEAR";
    trend.y_label = "AREA (HA)";
    PlotSeries total{"TOTAL", {20, 120, 60}, {}};
    for (const auto& [y, a] : result.global.entries)
        total.points.push_back({static_cast<double>(y), a});
    trend.series = {total};
    render_line_plot(trend, (fs::path(reports) / "area_trend.png").string());

    if (!result.regions.empty()) {
        LinePlot per_region;
        per_region.title = "AREA BY REGION";
        per_region.x_label = "YEAR";
        per_region.y_label = "AREA (HA)";
        const std::vector<Rgb> palette = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                                          {214, 39, 40},  {148, 103, 189}, {140, 86, 75},
                                          {227, 119, 194}};
        size_t ci = 0;
        for (const auto& [name, series_r] : result.regions) {
            PlotSeries s{name, palette[ci % palette.size()], {}};
            for (const auto& [y, a] : series_r.entries)
                s.points.push_back({static_cast<double>(y), a});
            per_region.series.push_back(std::move(s));
            ++ci;
        }
        render_line_plot(per_region, (fs::path(reports) / "area_by_region.png").string());
    }
    return result;
}

std::string run_report(const PipelineConfig& cfg) {
    cfg.validate();
    const fs::path reports = workspace_reports_dir(cfg);
    json summary;
    summary["provenance"] = provenance(cfg, "report", 0);

    json preprocess = json::array();
    if (fs::exists(reports)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(reports)) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files)
            if (p.filename().string().rfind("preprocess_", 0) == 0 && p.extension() == ".json")
                preprocess.push_back(read_json_file(p.string()));
    }
    summary["preprocess"] = preprocess;

    std::ostringstream md;
    md << "# Pipeline summary\n\n";
    md << "Config hash: `" << cfg.config_hash() << "`\n\n";

    if (fs::exists(reports / "training.json")) {
        summary["training"] = read_json_file((reports / "training.json").string());
        md << "## Training\n\n"
           << "- best epoch: " << summary["training"]["best_epoch"] << "\n"
           << "- best validation mIoU: " << summary["training"]["best_miou"] << "\n\n";
    }

    json evals = json::array();
    if (fs::exists(reports)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(reports)) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files)
            if (p.filename().string().rfind("evaluate_", 0) == 0 && p.extension() == ".json")
                evals.push_back(read_json_file(p.string()));
    }
    summary["evaluation"] = evals;

    if (fs::exists(reports / "analysis.json")) {
        json analysis = read_json_file((reports / "analysis.json").string());
        summary["analysis"] = analysis;
        md << "## Area change\n\n";
        md << "| Years | Area (ha) | Annual change (ha) | Annual change rate (%) |\n";
        md << "|---|---|---|---|\n";
        for (const auto& rec : analysis["annual_changes"]) {
            md << "| " << rec["year"] << " | " << fixed2(rec["area_ha"].get<double>()) << " | ";
            if (!rec["annual_change_ha"].is_null())
                md << fixed2(rec["annual_change_ha"].get<double>());
            md << " | ";
            if (!rec["annual_change_pct"].is_null())
                md << fixed2(rec["annual_change_pct"].get<double>());
            md << " |\n";
        }
        md << "\n- total growth: " << fixed2(analysis["total_growth"]["delta_ha"].get<double>())
           << " ha";
        if (!analysis["total_growth"]["pct"].is_null())
            md << " (" << fixed2(analysis["total_growth"]["pct"].get<double>()) << "%)";
        md << "\n- mean annual growth rate: ";
        if (analysis["mean_annual_growth_rate_pct"].is_null())
            md << "undefined";
        else
            md << fixed2(analysis["mean_annual_growth_rate_pct"].get<double>()) << "%";
        md << " (" << analysis["mean_rate_kind"].get<std::string>() << ")\n";
        md << "- carbon change: " << fixed2(analysis["carbon"]["carbon_t"].get<double>())
           << " t C, CO2 equivalent " << fixed2(analysis["carbon"]["co2_t"].get<double>())
           << " t (factor " << analysis["carbon"]["co2_factor"].get<double>() << ")\n\n";
    }

    const std::string json_path = (reports / "summary.json").string();
    write_json_file(json_path, summary);
    write_text((reports / "summary.md").string(), md.str());
    return json_path;
}

} // namespace mangrove
