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
#include "mangrove/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mangrove {

std::vector<ManifestEntry> filter_scenes(const std::vector<ManifestEntry>& entries,
                                         double max_cloud_pct) {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
        if (e.cloud_pct < max_cloud_pct) out.push_back(e);
    return out;
}

MultispectralScene cloud_mask(const MultispectralScene& scene, const QaConfig& qa) {
    scene.validate();
    if (!scene.qa)
        throw ConfigError("cloud_mask: scene '" + scene.id +
                          "' has no QA band; cloud masking needs one");

    MultispectralScene out = scene;
    const RasterGrid& q = *scene.qa;
    for (auto& band : out.bands) {
        if (!band.nodata) band.nodata = kDefaultNodata;
        const double nd = *band.nodata;
        for (size_t i = 0; i < band.values.size(); ++i) {
            double code = q.values[i];
            if (q.is_nodata(code)) continue;
            if (qa.cloudy_codes.count(static_cast<int>(std::llround(code))))
                band.values[i] = nd;
        }
    }
    return out;
}

RasterGrid ndwi(const RasterGrid& green, const RasterGrid& nir) {
    green.require_aligned_with(nir, "ndwi green vs nir");
    RasterGrid out(green.width, green.height, kDefaultNodata, kDefaultNodata);
    out.transform = green.transform;
    for (size_t i = 0; i < out.values.size(); ++i) {
        double g = green.values[i], n = nir.values[i];
        if (green.is_nodata(g) || nir.is_nodata(n)) continue;
        double denom = g + n;
        if (denom == 0.0) continue;
        out.values[i] = (g - n) / denom;
    }
    return out;
}

double water_area(const RasterGrid& ndwi_grid, double threshold, double pixel_ha) {
    size_t count = 0;
    for (double v : ndwi_grid.values) {
        if (ndwi_grid.is_nodata(v)) continue;
        if (v > threshold) ++count;
    }
    return static_cast<double>(count) * pixel_ha;
}

TideWindow select_tide_window(const std::vector<MonthlyWaterArea>& series) {
    if (series.size() < 2)
        throw ArgumentError("select_tide_window: need at least 2 monthly entries, got " +
                            std::to_string(series.size()));
    std::vector<MonthlyWaterArea> sorted = series;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MonthlyWaterArea& a, const MonthlyWaterArea& b) {
                         if (a.water_hectares != b.water_hectares)
                             return a.water_hectares < b.water_hectares;
                         if (a.year != b.year) return a.year < b.year;
                         return a.month < b.month;
                     });
    TideWindow w;
    w.months[0] = {sorted[0].year, sorted[0].month};
    w.months[1] = {sorted[1].year, sorted[1].month};
    if (w.months[1] < w.months[0]) std::swap(w.months[0], w.months[1]);
    return w;
}

MultispectralScene build_window_composite(
    const std::vector<ManifestEntry>& entries,
    const std::function<MultispectralScene(const ManifestEntry&)>& loader,
    const TideWindow& window, const std::optional<RegionMask>& region, const QaConfig& qa,
    Reducer reducer) {
    std::vector<MultispectralScene> masked;
    for (const auto& e : entries) {
        if (!window.contains(e.year, e.month)) continue;
        masked.push_back(cloud_mask(loader(e), qa));
    }
    if (masked.empty()) {
        std::ostringstream msg;
        msg << "build_window_composite: no qualifying scenes in window " << window.months[0].first
            << "-" << window.months[0].second << " / " << window.months[1].first << "-"
            << window.months[1].second;
        throw DataAvailabilityError(msg.str());
    }
    MultispectralScene composite = mosaic(masked, reducer);
    composite.year = window.months[0].first;
    composite.month = window.months[0].second;
    if (region) composite = clip_to_region(composite, *region);
    return composite;
}

PreprocessReport monthly_water_series(
    const std::vector<ManifestEntry>& year_entries,
    const std::function<MultispectralScene(const ManifestEntry&)>& loader, const QaConfig& qa,
    const std::string& green_band, const std::string& nir_band, double ndwi_threshold,
    const std::optional<RegionMask>& region) {
    PreprocessReport report;
    report.scenes_considered = static_cast<int>(year_entries.size());

    // Group entries per calendar month, keeping manifest order.
    std::vector<std::pair<int, std::vector<ManifestEntry>>> by_month;
    for (const auto& e : year_entries) {
        report.year = e.year;
        auto it = std::find_if(by_month.begin(), by_month.end(),
                               [&](const auto& p) { return p.first == e.month; });
        if (it == by_month.end())
            by_month.push_back({e.month, {e}});
        else
            it->second.push_back(e);
    }
    std::sort(by_month.begin(), by_month.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [month, entries] : by_month) {
        std::vector<MultispectralScene> masked;
        masked.reserve(entries.size());
        for (const auto& e : entries) masked.push_back(cloud_mask(loader(e), qa));
        MultispectralScene comp = mosaic(masked, Reducer::Median);
        if (region) comp = clip_to_region(comp, *region);
        RasterGrid w = ndwi(comp.band(green_band), comp.band(nir_band));
        double px_ha = pixel_area_hectares(comp.transform());
        MonthlyWaterArea m;
        m.year = report.year;
        m.month = month;
        m.water_hectares = water_area(w, ndwi_threshold, px_ha);
        m.scene_count = static_cast<int>(entries.size());
        report.monthly.push_back(m);
    }

    report.window = select_tide_window(report.monthly);
    for (const auto& e : year_entries)
        if (report.window.contains(e.year, e.month)) ++report.scenes_in_window;
    return report;
}

} // namespace mangrove
