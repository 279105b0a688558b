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
#include "mangrove/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

extern char** environ;

namespace mangrove {

using json = nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    if (preprocess.max_cloud_pct < 0.0 || preprocess.max_cloud_pct > 100.0)
        throw ConfigError("preprocess.max_cloud_pct must be in [0, 100]");
    if (preprocess.reducer != "median" && preprocess.reducer != "mean" &&
        preprocess.reducer != "first")
        throw ConfigError("preprocess.reducer must be median|mean|first");
    if (dataset.tile_size < 1) throw ConfigError("dataset.tile_size must be >= 1");
    if (dataset.stride < 1) throw ConfigError("dataset.stride must be >= 1");
    if (!(dataset.val_fraction > 0.0 && dataset.val_fraction < 1.0))
        throw ConfigError("dataset.val_fraction must be in (0, 1)");
    if (dataset.normalization_scale <= 0.0)
        throw ConfigError("dataset.normalization_scale must be positive");
    if (dataset.strata_grid < 1) throw ConfigError("dataset.strata_grid must be >= 1");
    if (model_bands.empty()) throw ConfigError("model_bands must not be empty");
    if (model.in_channels != static_cast<int>(model_bands.size()))
        throw ConfigError("model.in_channels (" + std::to_string(model.in_channels) +
                          ") must equal the model_bands count (" +
                          std::to_string(model_bands.size()) + ")");
    model.validate();
    train.validate();
    if (predict.tile < 1) throw ConfigError("predict.tile must be >= 1");
    if (predict.overlap < 0 || predict.overlap >= predict.tile)
        throw ConfigError("predict.overlap must be in [0, predict.tile)");
    if (!(predict.threshold > 0.0 && predict.threshold < 1.0))
        throw ConfigError("predict.threshold must be in (0, 1)");
    if (analysis.carbon_density <= 0.0) throw ConfigError("analysis.carbon_density must be positive");
    if (analysis.co2_factor <= 0.0) throw ConfigError("analysis.co2_factor must be positive");
    if (analysis.mean_rate != "geometric" && analysis.mean_rate != "arithmetic")
        throw ConfigError("analysis.mean_rate must be geometric|arithmetic");
}

std::string PipelineConfig::canonical_json() const {
    json j;
    j["paths"] = {{"manifest", paths.manifest},
                  {"labels", paths.labels},
                  {"label_year", paths.label_year},
                  {"study_area", paths.study_area},
                  {"workspace", paths.workspace}};
    json regions = json::array();
    for (const auto& [name, path] : paths.regions)
        regions.push_back({{"name", name}, {"path", path}});
    j["paths"]["regions"] = regions;
    j["preprocess"] = {{"max_cloud_pct", preprocess.max_cloud_pct},
                       {"ndwi_threshold", preprocess.ndwi_threshold},
                       {"qa_cloudy_codes", preprocess.qa_cloudy_codes},
                       {"green_band", preprocess.green_band},
                       {"nir_band", preprocess.nir_band},
                       {"reducer", preprocess.reducer}};
    j["dataset"] = {{"tile_size", dataset.tile_size},
                    {"stride", dataset.stride},
                    {"val_fraction", dataset.val_fraction},
                    {"seed", dataset.seed},
                    {"normalization_scale", dataset.normalization_scale},
                    {"strata_grid", dataset.strata_grid}};
    j["model"] = {{"bands", model_bands},
                  {"in_channels", model.in_channels},
                  {"depth", model.depth},
                  {"base_width", model.base_width},
                  {"deep_supervision", model.deep_supervision},
                  {"encoder", model.encoder},
                  {"pretrained", model.pretrained},
                  {"out_channels", model.out_channels},
                  {"init_seed", model.init_seed}};
    j["train"] = {{"lr0", train.lr0},
                  {"weight_decay", train.weight_decay},
                  {"lr_min", train.lr_min},
                  {"t0", train.t0_epochs},
                  {"t_mult", train.t_mult},
                  {"batch_size", train.batch_size},
                  {"max_epochs", train.max_epochs},
                  {"patience", train.patience},
                  {"label_smoothing", train.label_smoothing},
                  {"ce_weight", train.ce_weight},
                  {"dice_weight", train.dice_weight},
                  {"dice_eps", train.dice_eps},
                  {"seed", train.seed}};
    j["predict"] = {{"tile", predict.tile},
                    {"overlap", predict.overlap},
                    {"threshold", predict.threshold}};
    j["analysis"] = {{"carbon_density", analysis.carbon_density},
                     {"co2_factor", analysis.co2_factor},
                     {"mean_rate", analysis.mean_rate},
                     {"years", analysis.years}};
    return j.dump();
}

std::string PipelineConfig::config_hash() const {
    const std::string s = canonical_json();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << "fnv1a:" << std::hex << h;
    return os.str();
}

namespace {

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
    throw ConfigError("unknown config key '" + where + "." + key + "'");
}

std::string resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
}

uint64_t to_u64(const std::string& v) { return std::stoull(v); }

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Single point of truth for scalar keys reachable via file, --set and env.
void set_key(PipelineConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value) {
    if (section == "paths") {
        if (key == "manifest") cfg.paths.manifest = value;
        else if (key == "labels") cfg.paths.labels = value;
        else if (key == "label_year") cfg.paths.label_year = std::stoi(value);
        else if (key == "study_area") cfg.paths.study_area = value;
        else if (key == "workspace") cfg.paths.workspace = value;
        else bad_key(section, key);
    } else if (section == "preprocess") {
        if (key == "max_cloud_pct") cfg.preprocess.max_cloud_pct = std::stod(value);
        else if (key == "ndwi_threshold") cfg.preprocess.ndwi_threshold = std::stod(value);
        else if (key == "green_band") cfg.preprocess.green_band = value;
        else if (key == "nir_band") cfg.preprocess.nir_band = value;
        else if (key == "reducer") cfg.preprocess.reducer = value;
        else if (key == "qa_cloudy_codes") {
            cfg.preprocess.qa_cloudy_codes.clear();
            for (const auto& s : split_list(value)) cfg.preprocess.qa_cloudy_codes.insert(std::stoi(s));
        } else bad_key(section, key);
    } else if (section == "dataset") {
        if (key == "tile_size") cfg.dataset.tile_size = std::stoi(value);
        else if (key == "stride") cfg.dataset.stride = std::stoi(value);
        else if (key == "val_fraction") cfg.dataset.val_fraction = std::stod(value);
        else if (key == "seed") cfg.dataset.seed = to_u64(value);
        else if (key == "normalization_scale") cfg.dataset.normalization_scale = std::stod(value);
        else if (key == "strata_grid") cfg.dataset.strata_grid = std::stoi(value);
        else bad_key(section, key);
    } else if (section == "model") {
        if (key == "bands") {
            cfg.model_bands = split_list(value);
            cfg.model.in_channels = static_cast<int>(cfg.model_bands.size());
        } else if (key == "depth") cfg.model.depth = std::stoi(value);
        else if (key == "base_width") cfg.model.base_width = std::stoi(value);
        else if (key == "deep_supervision") cfg.model.deep_supervision = to_bool(value);
        else if (key == "encoder") cfg.model.encoder = value;
        else if (key == "pretrained") cfg.model.pretrained = to_bool(value);
        else if (key == "out_channels") cfg.model.out_channels = std::stoi(value);
        else if (key == "init_seed") cfg.model.init_seed = to_u64(value);
        else bad_key(section, key);
    } else if (section == "train") {
        if (key == "lr0") cfg.train.lr0 = std::stod(value);
        else if (key == "weight_decay") cfg.train.weight_decay = std::stod(value);
        else if (key == "lr_min") cfg.train.lr_min = std::stod(value);
        else if (key == "t0") cfg.train.t0_epochs = std::stoi(value);
        else if (key == "t_mult") cfg.train.t_mult = std::stoi(value);
        else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
        else if (key == "max_epochs") cfg.train.max_epochs = std::stoi(value);
        else if (key == "patience") cfg.train.patience = std::stoi(value);
        else if (key == "label_smoothing") cfg.train.label_smoothing = std::stod(value);
        else if (key == "ce_weight") cfg.train.ce_weight = std::stod(value);
        else if (key == "dice_weight") cfg.train.dice_weight = std::stod(value);
        else if (key == "dice_eps") cfg.train.dice_eps = std::stod(value);
        else if (key == "seed") cfg.train.seed = to_u64(value);
        else bad_key(section, key);
    } else if (section == "predict") {
        if (key == "tile") cfg.predict.tile = std::stoi(value);
        else if (key == "overlap") cfg.predict.overlap = std::stoi(value);
        else if (key == "threshold") cfg.predict.threshold = std::stod(value);
        else bad_key(section, key);
    } else if (section == "analysis") {
        if (key == "carbon_density") cfg.analysis.carbon_density = std::stod(value);
        else if (key == "co2_factor") cfg.analysis.co2_factor = std::stod(value);
        else if (key == "mean_rate") cfg.analysis.mean_rate = value;
        else if (key == "years") {
            cfg.analysis.years.clear();
            for (const auto& s : split_list(value)) cfg.analysis.years.push_back(std::stoi(s));
        } else bad_key(section, key);
    } else {
        throw ConfigError("unknown config section '" + section + "'");
    }
}

const std::vector<std::string>& sections() {
    static const std::vector<std::string> s = {"paths",  "preprocess", "dataset", "model",
                                               "train",  "predict",    "analysis"};
    return s;
}

} // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot load config '" + path + "': " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();

    PipelineConfig cfg;
    for (const auto& section_it : root) {
        const std::string section = section_it.first.as<std::string>();
        if (std::find(sections().begin(), sections().end(), section) == sections().end())
            throw ConfigError("unknown config section '" + section + "' in '" + path + "'");
        const YAML::Node& node = section_it.second;
        if (!node.IsMap()) throw ConfigError("config section '" + section + "' must be a mapping");
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (section == "paths" && key == "regions") {
                cfg.paths.regions.clear();
                for (const auto& r : kv.second) {
                    cfg.paths.regions.push_back({r["name"].as<std::string>(),
                                                 resolve_path(base, r["path"].as<std::string>())});
                }
                continue;
            }
            if ((section == "model" && key == "bands") ||
                (section == "analysis" && key == "years") ||
                (section == "preprocess" && key == "qa_cloudy_codes")) {
                std::string joined;
                for (const auto& item : kv.second) {
                    if (!joined.empty()) joined += ",";
                    joined += item.as<std::string>();
                }
                set_key(cfg, section, key, joined);
                continue;
            }
            set_key(cfg, section, key, kv.second.as<std::string>());
        }
    }

    // Resolve relative paths against the config file location.
    cfg.paths.manifest = resolve_path(base, cfg.paths.manifest);
    cfg.paths.labels = resolve_path(base, cfg.paths.labels);
    cfg.paths.study_area = resolve_path(base, cfg.paths.study_area);
    cfg.paths.workspace = resolve_path(base, cfg.paths.workspace);
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    auto dot = path.find('.');
    if (dot == std::string::npos)
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

void apply_env_overrides(PipelineConfig& cfg) {
    constexpr const char* prefix = "MANGROVE_";
    for (char** e = environ; *e != nullptr; ++e) {
        std::string entry(*e);
        if (entry.rfind(prefix, 0) != 0) continue;
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string name = entry.substr(std::string(prefix).size(), eq - std::string(prefix).size());
        std::string value = entry.substr(eq + 1);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        for (const auto& section : sections()) {
            if (name.rfind(section + "_", 0) == 0) {
                set_key(cfg, section, name.substr(section.size() + 1), value);
                break;
            }
        }
    }
}

} // namespace mangrove
