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
#ifndef MANGROVE_RASTER_OPS_HPP
#define MANGROVE_RASTER_OPS_HPP

#include <vector>

#include "mangrove/geo.hpp"

namespace mangrove {

enum class Reducer { Median, Mean, First };

Reducer reducer_from_string(const std::string& s); // "median" | "mean" | "first"
std::string to_string(Reducer r);

/// Pixels outside the region become nodata in every band (and QA); shape and
/// transform are unchanged. The region must share the scene grid.
MultispectralScene clip_to_region(const MultispectralScene& scene, const RegionMask& region);

/// Composite scenes onto the union bounding box at the common resolution.
/// Scenes must share CRS, resolution, band names, and sit on one pixel
/// lattice (integer offsets). Nodata never participates in the reduction;
/// pixels with no contributor stay nodata.
MultispectralScene mosaic(const std::vector<MultispectralScene>& scenes, Reducer reducer);

enum class ResampleMethod { Nearest, Bilinear };

/// Resample onto an explicit target grid. Nearest picks the source pixel
/// containing each target center; bilinear blends the four neighbours with
/// nodata-aware weight renormalization, so outputs stay within the source
/// min/max. Target centers outside the source extent become nodata.
RasterGrid resample_to(const RasterGrid& grid, const GeoTransform& target_transform,
                       int target_width, int target_height, ResampleMethod method);

/// Convenience overload: target size chosen to cover the source extent.
RasterGrid resample_to(const RasterGrid& grid, const GeoTransform& target_transform,
                       ResampleMethod method);

/// Median of a scratch vector (sorts in place; mean of the two middles for
/// even sizes). Exposed for reuse and for oracle tests.
double median_inplace(std::vector<double>& v);

} // namespace mangrove

#endif
