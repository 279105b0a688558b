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
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "mangrove/pipeline.hpp"
#include "mangrove/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    int64_t seed = -1;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Pipeline config file (YAML)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", args.overrides, "Override a config value (section.key=value)");
    cmd->add_option("--seed", args.seed, "Override dataset/train seeds");
    cmd->add_option("--workers", args.workers, "Worker bound for the data pipeline (>= 1)")
        ->check(CLI::PositiveNumber);
}

mangrove::PipelineConfig load_config(const CommonArgs& args) {
    mangrove::PipelineConfig cfg = mangrove::load_pipeline_config(args.config_path);
    mangrove::apply_env_overrides(cfg);
    for (const auto& ov : args.overrides) mangrove::apply_override(cfg, ov);
    if (args.seed >= 0) {
        cfg.dataset.seed = static_cast<uint64_t>(args.seed);
        cfg.train.seed = static_cast<uint64_t>(args.seed);
    }
    cfg.validate();
    return cfg;
}

std::string opt_str(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << *v;
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("mangrove — tide-aware mangrove segmentation and change analysis (v") +
                 mangrove::kVersion + ")"};
    app.require_subcommand(1);

    CommonArgs args;
    int year = 0;
    std::vector<int> years;
    std::string truth_path;

    auto* preprocess = app.add_subcommand(
        "preprocess", "Select low-tide scenes and build the annual composite");
    add_common(preprocess, args);
    preprocess->add_option("--year", year, "Acquisition year")->required();

    auto* tile = app.add_subcommand("tile", "Cut the label-year composite into training tiles");
    add_common(tile, args);

    auto* train = app.add_subcommand("train", "Train the segmentation model");
    add_common(train, args);

    auto* predict = app.add_subcommand("predict", "Predict the mangrove mask for a year");
    add_common(predict, args);
    predict->add_option("--year", year, "Composite year")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a predicted mask against truth");
    add_common(evaluate, args);
    evaluate->add_option("--year", year, "Mask year")->required();
    evaluate->add_option("--truth", truth_path, "Truth raster (defaults to paths.labels)");

    auto* analyze =
        app.add_subcommand("analyze", "Multi-year area, change and carbon accounting");
    add_common(analyze, args);
    analyze->add_option("--years", years, "Years to analyze (defaults to configured/all masks)");

    auto* report = app.add_subcommand("report", "Collate stage reports into a summary");
    add_common(report, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (preprocess->parsed()) {
            auto cfg = load_config(args);
            auto rep = mangrove::run_preprocess(cfg, year);
            std::cout << "preprocess " << year << ": window " << rep.window.months[0].first << "-"
                      << std::setw(2) << std::setfill('0') << rep.window.months[0].second << " / "
                      << rep.window.months[1].first << "-" << std::setw(2) << std::setfill('0')
                      << rep.window.months[1].second << ", " << rep.scenes_in_window
                      << " scenes in window (" << rep.scenes_considered << " after cloud filter)"
                      << std::endl;
        } else if (tile->parsed()) {
            auto cfg = load_config(args);
            auto res = mangrove::run_tile(cfg);
            std::cout << "tile: " << res.index.train.size() << " train + "
                      << res.index.val.size() << " val tiles (" << res.with_mangrove
                      << " with mangrove, " << res.without_mangrove << " without)" << std::endl;
        } else if (train->parsed()) {
            auto cfg = load_config(args);
            auto res = mangrove::run_train(cfg);
            std::cout << "train: best val mIoU " << std::fixed << std::setprecision(4)
                      << res.best_miou << " at epoch " << res.best_epoch << " ("
                      << res.epochs_run << " epochs run"
                      << (res.early_stopped ? ", early stopped" : "") << ")" << std::endl;
        } else if (predict->parsed()) {
            auto cfg = load_config(args);
            std::string path = mangrove::run_predict(cfg, year);
            std::cout << "predict " << year << ": wrote " << path << std::endl;
        } else if (evaluate->parsed()) {
            auto cfg = load_config(args);
            auto res = mangrove::run_evaluate(cfg, year, truth_path);
            std::cout << "evaluate " << year << ": producer " << opt_str(res.scores.producer_acc)
                      << ", user " << opt_str(res.scores.user_acc) << ", F1 "
                      << opt_str(res.scores.f1) << ", mIoU " << opt_str(res.scores.miou)
                      << std::endl;
        } else if (analyze->parsed()) {
            auto cfg = load_config(args);
            auto res = mangrove::run_analyze(cfg, years);
            std::cout << "analyze: " << res.global.entries.front().second << " ha ("
                      << res.global.entries.front().first << ") -> "
                      << res.global.entries.back().second << " ha ("
                      << res.global.entries.back().first << "), delta " << std::fixed
                      << std::setprecision(2) << res.growth.delta_ha << " ha, carbon "
                      << res.carbon.carbon_t << " t" << std::endl;
            std::cout << "analyze: table at " << res.table_csv << std::endl;
        } else if (report->parsed()) {
            auto cfg = load_config(args);
            std::string path = mangrove::run_report(cfg);
            std::cout << "report: " << path << std::endl;
        }
    } catch (const mangrove::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
