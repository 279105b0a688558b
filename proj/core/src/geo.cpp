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
#include "mangrove/geo.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mangrove {

bool crs_is_metric(const std::string& crs_id) {
    // Geographic (degree) systems we refuse to do area math in.
    static const std::set<std::string> degree_crs = {
        "EPSG:4326", "EPSG:4258", "EPSG:4269", "EPSG:4979", "CRS:84", "OGC:CRS84"};
    if (degree_crs.count(crs_id)) return false;
    return true;
}

double pixel_area_hectares(const GeoTransform& transform) {
    if (!crs_is_metric(transform.crs_id)) {
        throw UnsupportedCrsError("pixel_area_hectares: CRS '" + transform.crs_id +
                                  "' is degree-based; a metric CRS is required");
    }
    return std::abs(transform.pixel_width * transform.pixel_height) / 10000.0;
}

void RasterGrid::require_aligned_with(const RasterGrid& o, const std::string& what) const {
    std::ostringstream msg;
    if (width != o.width) {
        msg << what << ": width mismatch (" << width << " vs " << o.width << ")";
        throw AlignmentError(msg.str());
    }
    if (height != o.height) {
        msg << what << ": height mismatch (" << height << " vs " << o.height << ")";
        throw AlignmentError(msg.str());
    }
    if (!transform.same_grid(o.transform)) {
        msg << what << ": geotransform mismatch";
        throw AlignmentError(msg.str());
    }
}

size_t RasterGrid::valid_count() const {
    if (!nodata) return values.size();
    return static_cast<size_t>(
        std::count_if(values.begin(), values.end(), [&](double v) { return v != *nodata; }));
}

bool MultispectralScene::has_band(const std::string& name) const {
    return band_index(name) >= 0;
}

int MultispectralScene::band_index(const std::string& name) const {
    for (size_t i = 0; i < band_names.size(); ++i)
        if (band_names[i] == name) return static_cast<int>(i);
    return -1;
}

const RasterGrid& MultispectralScene::band(const std::string& name) const {
    int i = band_index(name);
    if (i < 0) throw SchemaError("scene '" + id + "' has no band named '" + name + "'");
    return bands[static_cast<size_t>(i)];
}

RasterGrid& MultispectralScene::band(const std::string& name) {
    int i = band_index(name);
    if (i < 0) throw SchemaError("scene '" + id + "' has no band named '" + name + "'");
    return bands[static_cast<size_t>(i)];
}

void MultispectralScene::validate() const {
    if (bands.empty()) throw SchemaError("scene '" + id + "' has no bands");
    if (band_names.size() != bands.size())
        throw SchemaError("scene '" + id + "': band_names count (" +
                          std::to_string(band_names.size()) + ") != band count (" +
                          std::to_string(bands.size()) + ")");
    std::set<std::string> seen;
    for (const auto& n : band_names)
        if (!seen.insert(n).second)
            throw SchemaError("scene '" + id + "': duplicate band name '" + n + "'");
    for (size_t i = 1; i < bands.size(); ++i)
        bands[i].require_aligned_with(bands[0], "scene '" + id + "' band '" + band_names[i] + "'");
    if (qa) qa->require_aligned_with(bands[0], "scene '" + id + "' QA band");
}

} // namespace mangrove
