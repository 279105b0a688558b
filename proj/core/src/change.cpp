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
#include "mangrove/change.hpp"

#include <cmath>

namespace mangrove {

void AreaSeries::validate() const {
    for (size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].second < 0.0)
            throw ArgumentError("AreaSeries '" + region + "': negative area at year " +
                                std::to_string(entries[i].first));
        if (i > 0 && entries[i].first <= entries[i - 1].first)
            throw ArgumentError("AreaSeries '" + region + "': years not strictly increasing");
    }
}

double area_hectares(const RasterGrid& mask, double pixel_ha) {
    if (pixel_ha <= 0.0) throw ArgumentError("area_hectares: pixel_ha must be positive");
    uint64_t count = 0;
    for (double v : mask.values) {
        if (mask.is_nodata(v)) continue;
        if (v != 0.0) ++count;
    }
    return static_cast<double>(count) * pixel_ha;
}

std::vector<ChangeRecord> annual_changes(const AreaSeries& series) {
    series.validate();
    if (series.entries.size() < 2)
        throw ArgumentError("annual_changes: need at least 2 years, got " +
                            std::to_string(series.entries.size()));
    std::vector<ChangeRecord> out;
    out.reserve(series.entries.size());
    for (size_t i = 0; i < series.entries.size(); ++i) {
        ChangeRecord rec;
        rec.year = series.entries[i].first;
        rec.area_ha = series.entries[i].second;
        if (i > 0) {
            double prev = series.entries[i - 1].second;
            rec.annual_change_ha = rec.area_ha - prev;
            if (prev != 0.0) rec.annual_change_pct = 100.0 * (rec.area_ha - prev) / prev;
        }
        out.push_back(rec);
    }
    return out;
}

GrowthSummary total_growth(const AreaSeries& series) {
    series.validate();
    if (series.entries.size() < 2)
        throw ArgumentError("total_growth: need at least 2 years");
    double first = series.entries.front().second;
    double last = series.entries.back().second;
    GrowthSummary g;
    g.delta_ha = last - first;
    if (first != 0.0) g.pct = 100.0 * (last - first) / first;
    return g;
}

double mean_annual_growth_rate(const AreaSeries& series, MeanRateKind kind) {
    series.validate();
    if (series.entries.size() < 2)
        throw ArgumentError("mean_annual_growth_rate: need at least 2 years");
    if (series.entries.front().second <= 0.0)
        throw ArgumentError("mean_annual_growth_rate: first-year area must be positive");

    if (kind == MeanRateKind::Geometric) {
        double first = series.entries.front().second;
        double last = series.entries.back().second;
        double steps = static_cast<double>(series.entries.size() - 1);
        return 100.0 * (std::pow(last / first, 1.0 / steps) - 1.0);
    }
    // Arithmetic mean of the per-year percentage rates.
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 1; i < series.entries.size(); ++i) {
        double prev = series.entries[i - 1].second;
        if (prev <= 0.0)
            throw ArgumentError("mean_annual_growth_rate: zero-area year inside series");
        sum += 100.0 * (series.entries[i].second - prev) / prev;
        ++n;
    }
    return sum / static_cast<double>(n);
}

CarbonEstimate carbon_estimate(double delta_ha, double density, double co2_factor) {
    if (density <= 0.0) throw ArgumentError("carbon_estimate: density must be positive");
    CarbonEstimate e;
    e.area_delta_ha = delta_ha;
    e.carbon_density_t_per_ha = density;
    e.co2_factor = co2_factor;
    e.carbon_t = delta_ha * density;
    e.co2_t = e.carbon_t * co2_factor;
    return e;
}

ChangeMap change_map(const RasterGrid& earlier, const RasterGrid& later) {
    earlier.require_aligned_with(later, "change_map earlier vs later");
    ChangeMap cm;
    cm.classes = RasterGrid(earlier.width, earlier.height, 0.0, 255.0);
    cm.classes.transform = earlier.transform;
    for (size_t i = 0; i < earlier.values.size(); ++i) {
        double e = earlier.values[i], l = later.values[i];
        if (earlier.is_nodata(e) || later.is_nodata(l)) {
            cm.classes.values[i] = 255.0;
            continue;
        }
        bool eb = e != 0.0, lb = l != 0.0;
        ChangeClass c;
        if (eb && lb) {
            c = ChangeClass::StablePresent;
            ++cm.stable_present;
        } else if (!eb && lb) {
            c = ChangeClass::Gain;
            ++cm.gain;
        } else if (eb && !lb) {
            c = ChangeClass::Loss;
            ++cm.loss;
        } else {
            c = ChangeClass::StableAbsent;
            ++cm.stable_absent;
        }
        cm.classes.values[i] = static_cast<double>(static_cast<uint8_t>(c));
    }
    return cm;
}

std::map<std::string, AreaSeries> per_region_series(
    const std::map<int, RasterGrid>& masks_by_year, const std::vector<RegionMask>& regions,
    double pixel_ha) {
    std::map<std::string, AreaSeries> out;
    for (const auto& region : regions) {
        AreaSeries series;
        series.region = region.name;
        for (const auto& [year, mask] : masks_by_year) {
            mask.require_aligned_with(region.mask, "per_region_series '" + region.name + "'");
            uint64_t count = 0;
            for (size_t i = 0; i < mask.values.size(); ++i) {
                double v = mask.values[i];
                if (mask.is_nodata(v) || v == 0.0) continue;
                if (region.mask.values[i] != 0.0) ++count;
            }
            series.entries.push_back({year, static_cast<double>(count) * pixel_ha});
        }
        out[region.name] = std::move(series);
    }
    return out;
}

AreaSeries global_series(const std::map<int, RasterGrid>& masks_by_year, double pixel_ha) {
    AreaSeries series;
    series.region = "total";
    for (const auto& [year, mask] : masks_by_year)
        series.entries.push_back({year, area_hectares(mask, pixel_ha)});
    return series;
}

std::array<std::array<uint8_t, 3>, 4> change_map_colors() {
    // indexed by ChangeClass: stable-absent, gain, loss, stable-present
    return {{{235, 235, 235}, {215, 25, 28}, {43, 85, 210}, {128, 48, 160}}};
}

} // namespace mangrove
