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
#ifndef MANGROVE_CHANGE_HPP
#define MANGROVE_CHANGE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mangrove/geo.hpp"

namespace mangrove {

/// Stoichiometric CO2/C molecular-mass ratio.
constexpr double kCo2PerCarbon = 44.0 / 12.0;

/// Default mangrove carbon density for the study region, t C / ha.
constexpr double kDefaultCarbonDensityTPerHa = 94.3;

/// Ordered (year, hectares) series for one region.
struct AreaSeries {
    std::string region = "total";
    std::vector<std::pair<int, double>> entries; // years strictly increasing

    void validate() const;
};

/// One row of the annual-change table. Change fields are absent for the
/// first year; rate is absent when the previous year's area is zero.
struct ChangeRecord {
    int year = 0;
    double area_ha = 0.0;
    std::optional<double> annual_change_ha;
    std::optional<double> annual_change_pct;
};

struct GrowthSummary {
    double delta_ha = 0.0;
    std::optional<double> pct; // relative to the first year
};

struct CarbonEstimate {
    double area_delta_ha = 0.0;
    double carbon_density_t_per_ha = kDefaultCarbonDensityTPerHa;
    double co2_factor = kCo2PerCarbon;
    double carbon_t = 0.0;
    double co2_t = 0.0;
};

enum class ChangeClass : uint8_t {
    StableAbsent = 0,
    Gain = 1,
    Loss = 2,
    StablePresent = 3,
};

/// Per-pixel gain/loss/stable classification between two dated masks.
/// Values are ChangeClass codes; pixels invalid in either input are nodata.
struct ChangeMap {
    RasterGrid classes;
    uint64_t gain = 0, loss = 0, stable_present = 0, stable_absent = 0;
};

/// Positive-pixel count times pixel_ha. Nodata pixels never count.
double area_hectares(const RasterGrid& mask, double pixel_ha);

/// A(t) - A(t-1) and its percentage of A(t-1), at full precision.
/// Rounding to the published 2 decimals happens only at serialization.
std::vector<ChangeRecord> annual_changes(const AreaSeries& series);

/// Last minus first year, and the percentage relative to the first.
GrowthSummary total_growth(const AreaSeries& series);

enum class MeanRateKind { Geometric, Arithmetic };

/// Mean annual growth rate in percent. Geometric (compound) by default:
/// 100 * ((A_last / A_first)^(1 / (n_years - 1)) - 1). The arithmetic mean
/// of the per-year rates is available behind the flag.
double mean_annual_growth_rate(const AreaSeries& series,
                               MeanRateKind kind = MeanRateKind::Geometric);

CarbonEstimate carbon_estimate(double delta_ha, double density = kDefaultCarbonDensityTPerHa,
                               double co2_factor = kCo2PerCarbon);

ChangeMap change_map(const RasterGrid& earlier, const RasterGrid& later);

/// Per region, per year: area of (mask AND region). Regions with no positive
/// pixels in any year yield an all-zero series.
std::map<std::string, AreaSeries> per_region_series(
    const std::map<int, RasterGrid>& masks_by_year, const std::vector<RegionMask>& regions,
    double pixel_ha);

/// Global series over all years (no region restriction).
AreaSeries global_series(const std::map<int, RasterGrid>& masks_by_year, double pixel_ha);

/// Declared colors for the change-map GeoTIFF palette, indexed by
/// ChangeClass code: blue marks the earlier extent (loss), red the later
/// extent (gain), purple where both agree.
std::array<std::array<uint8_t, 3>, 4> change_map_colors();

} // namespace mangrove

#endif
