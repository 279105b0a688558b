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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Heavier end-to-end checks run last.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "mangrove/geotiff.hpp"
#include "mangrove/pipeline.hpp"

using namespace mangrove;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Criterion {
public:
    Criterion(int id, std::string name) : id_(id), name_(std::move(name)) {}

    void require(bool ok, const std::string& what) {
        ++checks_;
        if (!ok) {
            ++failures_;
            notes_.push_back("FAILED: " + what);
        }
    }

    void require_close(double actual, double expected, double tol, const std::string& what) {
        std::ostringstream os;
        os << what << " (actual " << actual << ", expected " << expected << ", tol " << tol << ")";
        require(std::isfinite(actual) && std::abs(actual - expected) <= tol, os.str());
    }

    void note(const std::string& msg) { notes_.push_back("note: " + msg); }

    bool finish(double seconds) const {
        std::printf("[%s] %2d. %s (%d checks, %.1fs)\n", failures_ == 0 ? "PASS" : "FAIL", id_,
                    name_.c_str(), checks_, seconds);
        for (const auto& n : notes_) std::printf("        %s\n", n.c_str());
        return failures_ == 0;
    }

    int failures() const { return failures_; }

private:
    int id_;
    std::string name_;
    int checks_ = 0;
    int failures_ = 0;
    std::vector<std::string> notes_;
};

AreaSeries published_series() {
    AreaSeries s;
    s.entries = {{2017, 7080.88}, {2018, 7271.29}, {2019, 7465.93}, {2020, 7707.80},
                 {2021, 8354.46}, {2022, 8247.55}, {2023, 8606.17}, {2024, 9142.21}};
    return s;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// ---------------------------------------------------------------- 1
void metric_consistency(Criterion& c) {
    // Exact-rate confusion matrix: producer 0.9196, user 0.8917.
    ConfusionMatrix cm;
    cm.tp = 20500183;          // 9196 * 8917 / 4 * 10
    cm.fn = 22292500 - cm.tp;  // tp / 0.9196 = 22,292,500
    cm.fp = 22990000 - cm.tp;  // tp / 0.8917 = 22,990,000
    cm.tn = 100000000;
    Metrics m = metrics(cm);
    c.require(m.producer_acc.has_value() && m.user_acc.has_value() && m.f1.has_value(),
              "metrics defined");
    c.require_close(*m.producer_acc, 0.9196, 1e-12, "producer accuracy");
    c.require_close(*m.user_acc, 0.8917, 1e-12, "user accuracy");
    c.require_close(*m.f1, 0.9055, 1e-4, "F1 consistent with the published pair");
}

// ---------------------------------------------------------------- 2
void table1_arithmetic(Criterion& c) {
    // Published cells: (year, change_ha, rate_pct); the 2024 change cell in
    // the source table (539.04) is arithmetically inconsistent with the
    // published areas (9142.21 - 8606.17 = 536.04); its own rate column
    // (6.23%) corroborates 536.04. The recomputed value is asserted and the
    // discrepancy is pinned.
    struct Row {
        int year;
        double change, rate;
    };
    const std::vector<Row> published = {{2018, 190.41, 2.69}, {2019, 194.64, 2.68},
                                        {2020, 241.87, 3.24}, {2021, 646.66, 8.39},
                                        {2022, -106.91, -1.28}, {2023, 358.62, 4.35}};
    auto rows = annual_changes(published_series());
    c.require(rows.size() == 8, "eight table rows");
    c.require(!rows[0].annual_change_ha.has_value(), "first year has no change cell");
    for (size_t i = 0; i < published.size(); ++i) {
        const auto& rec = rows[i + 1];
        c.require(rec.year == published[i].year, "row year order");
        c.require_close(*rec.annual_change_ha, published[i].change, 0.01,
                        "annual change " + std::to_string(rec.year));
        c.require_close(*rec.annual_change_pct, published[i].rate, 0.01,
                        "annual change rate " + std::to_string(rec.year));
    }
    const auto& last = rows[7];
    c.require_close(*last.annual_change_ha, 536.04, 1e-9, "2024 change recomputed from areas");
    c.require_close(*last.annual_change_pct, 6.23, 0.01, "2024 rate (matches the published 6.23)");
    c.require_close(539.04 - *last.annual_change_ha, 3.00, 1e-9,
                    "pinned gap to the published 539.04 cell");
    c.note("published 2024 change cell 539.04 ha is inconsistent with the published areas "
           "(9142.21 - 8606.17 = 536.04); the rate column 6.23% corroborates 536.04");

    GrowthSummary g = total_growth(published_series());
    c.require_close(round2(g.delta_ha), 2061.33, 1e-9, "total growth delta (2 decimals)");
    c.require(g.pct.has_value(), "total growth percentage defined");
    c.require_close(round2(*g.pct), 29.11, 1e-9, "total growth percent (2 decimals)");
}

// ---------------------------------------------------------------- 3
void carbon_accounting(Criterion& c) {
    CarbonEstimate e = carbon_estimate(2061.33);
    c.require_close(e.carbon_t, 194383.42, 0.5, "carbon at 94.3 t/ha");
    c.require_close(e.co2_t, 712739.2, 0.05, "CO2 via the stoichiometric 44/12");
    double paper_gap_pct = 100.0 * std::abs(e.co2_t - 713367.36) / 713367.36;
    c.require(paper_gap_pct < 0.1, "documented deviation from the published CO2 stays below 0.1%");
    std::ostringstream os;
    os << "44/12 conversion gives " << std::fixed << e.co2_t
       << " t CO2; the published 713367.36 t implies a factor of ~3.670 and differs by "
       << std::setprecision(3) << paper_gap_pct << "%";
    c.note(os.str());
}

// ---------------------------------------------------------------- 4
void growth_rate_summary(Criterion& c) {
    double r = mean_annual_growth_rate(published_series(), MeanRateKind::Geometric);
    c.require_close(round2(r), 3.72, 1e-9, "compound mean annual growth (2 decimals)");
    c.require(std::abs(r - 3.71) <= 0.05, "within 0.05 pp of the published ~3.71%");
}

// ---------------------------------------------------------------- 5
void metric_oracle(Criterion& c) {
    Rng rng(20250810);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<uint8_t> truth(32 * 32), pred(32 * 32);
        double p_t = rng.uniform(0.05, 0.95), p_p = rng.uniform(0.05, 0.95);
        for (auto& v : truth) v = rng.bernoulli(p_t);
        for (auto& v : pred) v = rng.bernoulli(p_p);

        ConfusionMatrix cm = confusion_counts(pred, truth);

        // independent brute-force loop
        uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (size_t i = 0; i < truth.size(); ++i) {
            if (truth[i] != 0 && pred[i] != 0) ++tp;
            else if (truth[i] == 0 && pred[i] != 0) ++fp;
            else if (truth[i] != 0 && pred[i] == 0) ++fn;
            else ++tn;
        }
        if (cm.tp != tp || cm.fp != fp || cm.fn != fn || cm.tn != tn) ++mismatches;

        Metrics m = metrics(cm);
        auto same = [](std::optional<double> a, double b) { return a && *a == b; };
        if (tp + fn > 0 && !same(m.producer_acc, double(tp) / double(tp + fn))) ++mismatches;
        if (tp + fp > 0 && !same(m.user_acc, double(tp) / double(tp + fp))) ++mismatches;
        if (tp + fp + fn > 0 && !same(m.iou_pos, double(tp) / double(tp + fp + fn))) ++mismatches;
        if (tn + fp + fn > 0 && !same(m.iou_neg, double(tn) / double(tn + fp + fn))) ++mismatches;
        if (m.iou_pos && m.iou_neg &&
            *m.miou != 0.5 * (*m.iou_pos + *m.iou_neg)) ++mismatches;
        if (m.producer_acc && m.user_acc && *m.producer_acc + *m.user_acc > 0.0) {
            double f1 = 2.0 * *m.producer_acc * *m.user_acc / (*m.producer_acc + *m.user_acc);
            if (!m.f1 || std::abs(*m.f1 - f1) > 1e-15) ++mismatches;
        }
    }
    c.require(mismatches == 0, "200 random mask pairs match the brute-force oracle exactly");
}

// ---------------------------------------------------------------- 6
void schedule_oracle(Criterion& c) {
    nn::TrainConfig cfg; // published defaults: lr0 1e-4, min 1e-5, T0 2, Tmult 2

    // independent closed form: precomputed period table
    auto oracle = [&](double t) {
        double start = 0.0, len = 2.0;
        while (t >= start + len) {
            start += len;
            len *= 2.0;
        }
        double x = (t - start) / len;
        return 1e-5 + 0.5 * (1e-4 - 1e-5) * (1.0 + std::cos(M_PI * x));
    };

    Rng rng(6);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        double t = rng.uniform(0.0, 126.0);
        if (std::abs(nn::lr_at(t, cfg) - oracle(t)) > 1e-15) ++mismatches;
    }
    c.require(mismatches == 0, "1000 sampled points match the closed form");

    for (double r : {2.0, 6.0, 14.0, 30.0, 62.0}) {
        c.require_close(nn::lr_at(r, cfg), 1e-4, 1e-12,
                        "restart at cumulative epoch " + std::to_string(int(r)));
        c.require_close(nn::lr_at(r - 1e-7, cfg), 1e-5, 1e-12,
                        "period end before epoch " + std::to_string(int(r)));
    }
    c.require_close(nn::lr_at(0.0, cfg), 1e-4, 1e-12, "initial lr");
}

// ---------------------------------------------------------------- 7
void loss_properties(Criterion& c) {
    // dice at a perfect 256x256 prediction
    {
        nn::Tensor y(1, 1, 256, 256);
        Rng rng(7);
        for (double& v : y.data) v = rng.bernoulli(0.25) ? 1.0 : 0.0;
        c.require(nn::dice_loss(y, y, 1.0) < 1e-3, "dice(perfect) below 1e-3 on a 256^2 tile");
        nn::Tensor p = y;
        for (double& v : p.data) v = v > 0.5 ? nn::sigmoid(12.0) : nn::sigmoid(-12.0);
        c.require(nn::dice_loss(p, y, 1.0) < 1e-3, "dice(confident) below 1e-3 on a 256^2 tile");
    }
    // soft CE at logit 0
    {
        nn::Tensor z(1, 1, 64, 64, 0.0);
        nn::Tensor y(1, 1, 64, 64, 1.0);
        c.require_close(nn::soft_cross_entropy(z, y, 0.0), std::log(2.0), 1e-6,
                        "soft CE at logit 0 equals ln 2");
    }
    // full-model gradient check: depth 2, width 4, 8x8 input
    {
        nn::ModelConfig mcfg;
        mcfg.in_channels = 11;
        mcfg.depth = 2;
        mcfg.base_width = 4;
        mcfg.init_seed = 123;
        nn::SegmentationModel model(mcfg);

        Rng rng(8);
        nn::Tensor x(1, 11, 8, 8);
        for (double& v : x.data) v = rng.uniform(0.0, 1.0);
        nn::Tensor y(1, 1, 8, 8);
        for (double& v : y.data) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        nn::Tensor valid(1, 1, 8, 8, 1.0);
        nn::LossConfig loss_cfg{0.1, 1.0, 1.0, 1.0};

        auto loss_value = [&]() {
            nn::Graph g(true);
            auto heads = model.forward_graph(g, g.input(x));
            return g.value(g.segmentation_loss(heads.back(), y, valid, loss_cfg)).data[0];
        };
        model.zero_grad();
        {
            nn::Graph g(true);
            auto heads = model.forward_graph(g, g.input(x));
            g.backward(g.segmentation_loss(heads.back(), y, valid, loss_cfg));
        }
        size_t bad = 0, total = 0;
        for (nn::Param* p : model.parameters()) {
            for (size_t j = 0; j < p->value.data.size(); ++j) {
                double orig = p->value.data[j];
                double h = 1e-5 * std::max(1.0, std::abs(orig));
                p->value.data[j] = orig + h;
                double fp = loss_value();
                p->value.data[j] = orig - h;
                double fm = loss_value();
                p->value.data[j] = orig;
                double numeric = (fp - fm) / (2.0 * h);
                double analytic = p->grad.data[j];
                double rel = std::abs(numeric - analytic) /
                             (std::abs(numeric) + std::abs(analytic) + 1e-8);
                if (rel > 1e-3) ++bad;
                ++total;
            }
        }
        c.require(bad == 0, "gradients match central differences within 1e-3 relative (" +
                                std::to_string(total) + " parameters)");
    }
}

// ---------------------------------------------------------------- 8
void model_structure(Criterion& c) {
    nn::ModelConfig cfg;
    cfg.in_channels = 11;
    cfg.depth = 5;
    cfg.base_width = 4;
    nn::SegmentationModel model(cfg);
    c.require(model.node_count() == 15, "depth-5 build creates 15 nested nodes");

    Rng rng(9);
    nn::Tensor x(2, 11, 256, 256);
    for (double& v : x.data) v = rng.uniform(0.0, 1.0);
    nn::Tensor out = model.forward(x);
    c.require(out.n == 2 && out.c == 1 && out.h == 256 && out.w == 256,
              "[2,11,256,256] -> [2,1,256,256]");

    bool threw = false;
    std::string msg;
    try {
        nn::Tensor bad(1, 11, 100, 100);
        model.forward(bad);
    } catch (const ShapeError& e) {
        threw = true;
        msg = e.what();
    }
    c.require(threw, "indivisible spatial dims raise ShapeError");
    c.require(msg.find("divisible by 16") != std::string::npos,
              "error names the required divisibility");
}

// ---------------------------------------------------------------- 9
void synthetic_end_to_end(Criterion& c) {
    fs::path root = fs::temp_directory_path() / "mangrove_acceptance_e2e";
    fs::remove_all(root);
    fs::create_directories(root);

    const int size = 512;
    const std::vector<std::string> bands = {"B2", "B3", "B4", "B5", "B6", "B7",
                                            "B8", "B8A", "B9", "B11", "B12"};

    // One smooth field drives band B8; the label thresholds the field, and
    // the stored band value separates the classes with a noisy margin.
    Rng rng(424242);
    RasterGrid label(size, size, 0.0, 255.0);
    GeoTransform t;
    t.origin_x = 300000.0;
    t.origin_y = 2800000.0;
    label.transform = t;
    std::vector<double> field(static_cast<size_t>(size) * size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            field[static_cast<size_t>(y) * size + x] =
                0.5 + 0.35 * std::sin(0.031 * x + 1.3) * std::cos(0.023 * y) +
                0.15 * std::sin(0.011 * (x + y));

    json manifest;
    manifest["scenes"] = json::array();
    for (int month : {2, 3}) {
        MultispectralScene s;
        s.id = "SYN_2020_" + std::to_string(month);
        s.year = 2020;
        s.month = month;
        s.band_names = bands;
        for (const auto& name : bands) {
            RasterGrid g(size, size, 0.0, kDefaultNodata);
            g.transform = t;
            for (size_t i = 0; i < g.values.size(); ++i) {
                if (name == "B8") {
                    bool pos = field[i] > 0.55;
                    g.values[i] = ((pos ? 0.8 : 0.3) + rng.uniform(-0.05, 0.05)) * 10000.0;
                } else if (name == "B3") {
                    g.values[i] = rng.uniform(300.0, 700.0);
                } else {
                    g.values[i] = rng.uniform(0.0, 10000.0);
                }
            }
            s.bands.push_back(std::move(g));
        }
        s.qa = RasterGrid(size, size, 4.0);
        s.qa->transform = t;
        std::string file = s.id + ".tif";
        write_scene_geotiff((root / file).string(), s, "SCL");
        manifest["scenes"].push_back({{"id", s.id},
                                      {"year", 2020},
                                      {"month", month},
                                      {"cloud_pct", 1.0},
                                      {"path", file}});
    }
    {
        std::ofstream f(root / "manifest.json");
        f << manifest.dump();
    }
    for (size_t i = 0; i < field.size(); ++i) label.values[i] = field[i] > 0.55 ? 1.0 : 0.0;
    GeoTiffWriteOptions lo;
    lo.dtype = TiffDataType::UInt8;
    write_geotiff((root / "labels.tif").string(), label, lo);

    PipelineConfig cfg;
    cfg.paths.manifest = (root / "manifest.json").string();
    cfg.paths.labels = (root / "labels.tif").string();
    cfg.paths.label_year = 2020;
    cfg.paths.workspace = (root / "workspace").string();
    cfg.dataset.tile_size = 256;
    cfg.dataset.stride = 64;
    cfg.dataset.val_fraction = 0.1;
    cfg.dataset.seed = 42;
    cfg.model.depth = 3;
    cfg.model.base_width = 8;
    cfg.model.init_seed = 7;
    cfg.train.lr0 = 0.01;
    cfg.train.lr_min = 0.001;
    cfg.train.batch_size = 16;
    cfg.train.max_epochs = 30;
    cfg.train.patience = 10;
    cfg.train.seed = 2020;
    cfg.predict.tile = 256;
    cfg.predict.overlap = 32;
    cfg.validate();

    run_preprocess(cfg, 2020);
    TileStageResult tiles = run_tile(cfg);
    c.require(tiles.index.train.size() + tiles.index.val.size() == 25,
              "512x512 scene at stride 64 cuts 25 tiles");

    nn::TrainResult r1 = run_train(cfg);
    std::ostringstream os;
    os << "best val mIoU " << std::fixed << std::setprecision(4) << r1.best_miou << " at epoch "
       << r1.best_epoch << " (" << r1.epochs_run << " epochs at batch 16)";
    c.note(os.str());
    c.require(r1.epochs_run <= 30, "trained within 30 epochs");
    c.require(r1.best_miou > 0.95, "validation mIoU above 0.95");

    std::string mask_path = run_predict(cfg, 2020);
    EvaluateResult ev = run_evaluate(cfg, 2020);
    c.require(ev.scores.miou.has_value(), "whole-scene evaluation defined");
    if (ev.scores.miou) {
        std::ostringstream os2;
        os2 << "whole-scene mIoU " << std::fixed << std::setprecision(4) << *ev.scores.miou
            << ", producer " << *ev.scores.producer_acc << ", user " << *ev.scores.user_acc;
        c.note(os2.str());
    }

    // determinism: identical seed, identical curve
    nn::TrainResult r2 = run_train(cfg);
    bool same = r1.curve.records.size() == r2.curve.records.size();
    if (same) {
        for (size_t i = 0; i < r1.curve.records.size(); ++i) {
            same = same && r1.curve.records[i].train_loss == r2.curve.records[i].train_loss &&
                   r1.curve.records[i].val_miou == r2.curve.records[i].val_miou &&
                   r1.curve.records[i].lr == r2.curve.records[i].lr;
        }
    }
    c.require(same, "seed rerun reproduces the TrainingCurve bit-for-bit");

    fs::remove_all(root);
}

// ---------------------------------------------------------------- 10
void preprocessing_properties(Criterion& c) {
    Rng rng(10);

    // NDWI antisymmetry
    int bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
        RasterGrid a(16, 16, 0.0, kDefaultNodata), b(16, 16, 0.0, kDefaultNodata);
        for (auto* g : {&a, &b})
            for (double& v : g->values) v = rng.uniform(0.0, 1.0);
        RasterGrid ab = ndwi(a, b), ba = ndwi(b, a);
        for (size_t i = 0; i < ab.values.size(); ++i) {
            if (ab.is_nodata(ab.values[i]) != ba.is_nodata(ba.values[i])) ++bad;
            if (!ab.is_nodata(ab.values[i]) &&
                std::abs(ab.values[i] + ba.values[i]) > 1e-12) ++bad;
        }
    }
    c.require(bad == 0, "NDWI antisymmetry on random grids");

    // water-area monotonicity
    bad = 0;
    for (int trial = 0; trial < 10; ++trial) {
        RasterGrid g(32, 32, 0.0);
        for (double& v : g.values) v = rng.uniform(-1.0, 1.0);
        double prev = water_area(g, -1.01, 0.01);
        for (double th = -1.0; th <= 1.0; th += 0.05) {
            double area = water_area(g, th, 0.01);
            if (area > prev + 1e-12) ++bad;
            prev = area;
        }
    }
    c.require(bad == 0, "water_area monotone non-increasing in the threshold");

    // tide window vs sort oracle
    bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MonthlyWaterArea> series;
        for (int m = 1; m <= 12; ++m)
            series.push_back({2020, m, std::floor(rng.uniform(0.0, 40.0)), 1});
        auto sorted = series;
        std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            if (a.water_hectares != b.water_hectares) return a.water_hectares < b.water_hectares;
            return a.month < b.month;
        });
        auto shuffled = series;
        rng.shuffle(shuffled);
        TideWindow w = select_tide_window(shuffled);
        if (!w.contains(2020, sorted[0].month) || !w.contains(2020, sorted[1].month)) ++bad;
    }
    c.require(bad == 0, "tide window equals the two smallest months on 100 random series");

    // composite never invents data where every contributor is nodata
    {
        auto blank_scene = [&](const std::string& id, int month, double qa_code) {
            MultispectralScene s;
            s.id = id;
            s.year = 2020;
            s.month = month;
            s.band_names = {"B3", "B8"};
            s.bands = {RasterGrid(8, 8, 700.0, kDefaultNodata),
                       RasterGrid(8, 8, 300.0, kDefaultNodata)};
            s.qa = RasterGrid(8, 8, qa_code);
            return s;
        };
        std::map<std::string, MultispectralScene> scenes;
        scenes["a"] = blank_scene("a", 2, 9.0); // fully cloudy
        scenes["b"] = blank_scene("b", 3, 9.0);
        scenes["b"].qa->at(0, 0) = 4.0;         // one clear pixel in one scene
        std::vector<ManifestEntry> entries(2);
        entries[0].id = "a";
        entries[0].year = 2020;
        entries[0].month = 2;
        entries[1].id = "b";
        entries[1].year = 2020;
        entries[1].month = 3;
        TideWindow w;
        w.months = {{{2020, 2}, {2020, 3}}};
        auto loader = [&](const ManifestEntry& e) { return scenes.at(e.id); };
        MultispectralScene comp =
            build_window_composite(entries, loader, w, std::nullopt, QaConfig{});
        int valid = 0;
        for (const auto& band : comp.bands)
            for (size_t i = 0; i < band.values.size(); ++i)
                if (!band.is_nodata(band.values[i])) {
                    ++valid;
                    if (i != 0) ++bad; // only pixel (0,0) had any valid contributor
                }
        c.require(bad == 0 && valid == 2, "composite emits data only where a contributor exists");
    }
}

// ---------------------------------------------------------------- 11
void change_map_conservation(Criterion& c) {
    Rng rng(11);
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RasterGrid e(16, 16, 0.0), l(16, 16, 0.0);
        double pe = rng.uniform(0.1, 0.9), pl = rng.uniform(0.1, 0.9);
        for (double& v : e.values) v = rng.bernoulli(pe) ? 1.0 : 0.0;
        for (double& v : l.values) v = rng.bernoulli(pl) ? 1.0 : 0.0;
        ChangeMap cm = change_map(e, l);
        double diff = area_hectares(l, 0.01) - area_hectares(e, 0.01);
        double expected = 0.01 * (double(cm.gain) - double(cm.loss));
        if (std::abs(diff - expected) > 1e-12) ++bad;
        if (cm.gain + cm.loss + cm.stable_present + cm.stable_absent != 256) ++bad;
    }
    c.require(bad == 0,
              "area(later) - area(earlier) = pixel_ha * (gain - loss) and classes partition");
}

// ---------------------------------------------------------------- 12
void dataset_bookkeeping(Criterion& c) {
    std::vector<TileMeta> metas;
    for (int i = 0; i < 346; ++i) {
        TileMeta m;
        m.id = "p" + std::to_string(i);
        m.has_mangrove = true;
        metas.push_back(m);
    }
    for (int i = 0; i < 1222; ++i) {
        TileMeta m;
        m.id = "n" + std::to_string(i);
        m.has_mangrove = false;
        metas.push_back(m);
    }
    DatasetIndex idx = partition_by_meta(metas);
    c.require(idx.samples.size() == 1568, "1568 tiles in the fixture");
    c.require(idx.pct_with() == 22.07, "22.07% tiles with mangrove");
    c.require(idx.pct_without() == 77.93, "77.93% tiles without");
    auto [train, val] = split(idx, SplitSpec{0.10, 42});
    c.require(val.size() == 35, "validation split draws 35 tiles");
    c.require(train.size() == 1533, "training split keeps 1533 tiles");
    int val_neg = 0;
    for (const auto& m : val)
        if (!m.has_mangrove) ++val_neg;
    c.require(val_neg == 0, "validation tiles all contain mangrove");
}

} // namespace

int main() {
    using Entry = std::pair<std::string, std::function<void(Criterion&)>>;
    const std::vector<Entry> criteria = {
        {"Metric consistency (published producer/user/F1 triple)", metric_consistency},
        {"Published area-table arithmetic", table1_arithmetic},
        {"Carbon accounting", carbon_accounting},
        {"Growth-rate summary", growth_rate_summary},
        {"Metric oracle (brute-force per-pixel loop)", metric_oracle},
        {"Cosine warm-restart schedule oracle", schedule_oracle},
        {"Loss values and full-model gradient check", loss_properties},
        {"Model structure and shape contract", model_structure},
        {"Synthetic end-to-end pipeline", synthetic_end_to_end},
        {"Preprocessing properties", preprocessing_properties},
        {"Change-map conservation", change_map_conservation},
        {"Dataset split bookkeeping", dataset_bookkeeping},
    };

    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Criterion c(static_cast<int>(i) + 1, criteria[i].first);
        auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("unexpected exception: ") + e.what());
        }
        auto t1 = std::chrono::steady_clock::now();
        if (!c.finish(std::chrono::duration<double>(t1 - t0).count())) ++failed;
    }
    if (failed == 0)
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    else
        std::printf("acceptance: %d of %zu criteria FAILED\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
