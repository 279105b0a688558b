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
#ifndef MANGROVE_PREPROCESS_HPP
#define MANGROVE_PREPROCESS_HPP

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mangrove/manifest.hpp"
#include "mangrove/raster_ops.hpp"

namespace mangrove {

/// Detected open-water area for one calendar month.
struct MonthlyWaterArea {
    int year = 0;
    int month = 0;
    double water_hectares = 0.0;
    int scene_count = 0; // scenes contributing to the monthly composite
};

/// The two lowest-water months of a year, i.e. the low-tide imaging window.
struct TideWindow {
    std::array<std::pair<int, int>, 2> months; // (year, month), chronological

    bool contains(int year, int month) const {
        return (months[0].first == year && months[0].second == month) ||
               (months[1].first == year && months[1].second == month);
    }
};

/// QA-band decoding: which class codes mean cloud / cirrus / shadow.
/// Defaults follow the Level-2A scene classification (3 = cloud shadow,
/// 8 = cloud medium prob., 9 = cloud high prob., 10 = thin cirrus).
struct QaConfig {
    std::set<int> cloudy_codes = {3, 8, 9, 10};
};

/// Keeps entries with cloud cover strictly below the threshold, preserving
/// order. max_cloud_pct is in percent (paper default 10).
std::vector<ManifestEntry> filter_scenes(const std::vector<ManifestEntry>& entries,
                                         double max_cloud_pct);

/// Sets every band pixel whose QA code is in the cloudy set to nodata.
/// Throws ConfigError when the scene has no QA band.
MultispectralScene cloud_mask(const MultispectralScene& scene, const QaConfig& qa);

/// (green - nir) / (green + nir); nodata where either input is nodata or the
/// denominator is zero. Output nodata sentinel is kDefaultNodata.
RasterGrid ndwi(const RasterGrid& green, const RasterGrid& nir);

/// Hectares of valid pixels with ndwi strictly above the threshold.
double water_area(const RasterGrid& ndwi_grid, double threshold, double pixel_ha);

/// The two entries with minimal water area; ties broken by earlier
/// (year, month). Result is in chronological order.
TideWindow select_tide_window(const std::vector<MonthlyWaterArea>& series);

/// Cloud-masks every manifest scene falling inside the window months,
/// median-mosaics them and clips to the region (when given). Scenes are
/// loaded lazily through `loader` so tests can feed in-memory scenes.
/// Throws DataAvailabilityError naming the window when nothing qualifies.
MultispectralScene build_window_composite(
    const std::vector<ManifestEntry>& entries,
    const std::function<MultispectralScene(const ManifestEntry&)>& loader,
    const TideWindow& window, const std::optional<RegionMask>& region, const QaConfig& qa,
    Reducer reducer = Reducer::Median);

/// Everything cmd_preprocess reports for one year.
struct PreprocessReport {
    int year = 0;
    std::vector<MonthlyWaterArea> monthly; // chronological
    TideWindow window;
    int scenes_considered = 0; // after cloud filtering
    int scenes_in_window = 0;
};

/// Full per-year workflow: cloud filter -> monthly composites -> NDWI water
/// areas -> tide window. Water areas are measured on the cloud-masked
/// monthly composite. Bands used for NDWI are named by green/nir.
PreprocessReport monthly_water_series(
    const std::vector<ManifestEntry>& year_entries,
    const std::function<MultispectralScene(const ManifestEntry&)>& loader, const QaConfig& qa,
    const std::string& green_band, const std::string& nir_band, double ndwi_threshold,
    const std::optional<RegionMask>& region);

} // namespace mangrove

#endif
