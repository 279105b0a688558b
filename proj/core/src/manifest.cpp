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
#include "mangrove/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mangrove/geotiff.hpp"

namespace mangrove {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::vector<ManifestEntry> Manifest::for_year(int year) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : scenes)
        if (e.year == year) out.push_back(e);
    return out;
}

std::vector<ManifestEntry> Manifest::for_month(int year, int month) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : scenes)
        if (e.year == year && e.month == month) out.push_back(e);
    return out;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_manifest: cannot open '" + path + "'");
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("load_manifest: '" + path + "' is not valid JSON");
    if (!doc.contains("scenes") || !doc["scenes"].is_array())
        throw SchemaError("load_manifest: '" + path + "' has no 'scenes' array");

    fs::path base = fs::path(path).parent_path();
    Manifest m;
    for (const auto& s : doc["scenes"]) {
        ManifestEntry e;
        if (!s.contains("path")) throw SchemaError("load_manifest: scene entry missing 'path'");
        e.id = s.value("id", std::string{});
        e.year = s.value("year", 0);
        e.month = s.value("month", 0);
        e.cloud_pct = s.value("cloud_pct", 0.0);
        e.qa_band = s.value("qa_band", std::string{"SCL"});
        fs::path p = s["path"].get<std::string>();
        e.path = p.is_absolute() ? p.string() : (base / p).string();
        if (e.id.empty()) e.id = p.stem().string();
        if (e.year <= 0 || e.month < 1 || e.month > 12)
            throw SchemaError("load_manifest: scene '" + e.id + "' has invalid year/month");
        if (e.cloud_pct < 0.0 || e.cloud_pct > 100.0)
            throw SchemaError("load_manifest: scene '" + e.id + "' cloud_pct outside [0,100]");
        m.scenes.push_back(std::move(e));
    }
    return m;
}

MultispectralScene load_scene(const ManifestEntry& entry) {
    MultispectralScene scene = read_scene_geotiff(entry.path, entry.qa_band);
    scene.id = entry.id;
    scene.year = entry.year;
    scene.month = entry.month;
    return scene;
}

} // namespace mangrove
