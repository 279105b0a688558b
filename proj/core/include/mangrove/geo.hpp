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
#ifndef MANGROVE_GEO_HPP
#define MANGROVE_GEO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mangrove/errors.hpp"

namespace mangrove {

/// Default sentinel for missing observations. Sits far outside the physical
/// surface-reflectance range so it can never collide with real data.
constexpr double kDefaultNodata = -9999.0;

/// North-up affine georeferencing: map = origin + pixel * resolution.
/// pixel_width > 0 and pixel_height < 0 for north-up grids, both in meters
/// for metric CRS. No rotation terms; inputs are assumed co-registered.
struct GeoTransform {
    double origin_x = 0.0;   ///< map x of the outer top-left corner
    double origin_y = 0.0;   ///< map y of the outer top-left corner
    double pixel_width = 10.0;
    double pixel_height = -10.0;
    std::string crs_id = "EPSG:32640"; // UTM 40N, meters

    /// Map coordinates of the center of pixel (row, col).
    void pixel_center(double row, double col, double& x, double& y) const {
        x = origin_x + (col + 0.5) * pixel_width;
        y = origin_y + (row + 0.5) * pixel_height;
    }

    /// Fractional pixel indices of a map point (inverse affine).
    void map_to_pixel(double x, double y, double& row, double& col) const {
        col = (x - origin_x) / pixel_width;
        row = (y - origin_y) / pixel_height;
    }

    bool same_grid(const GeoTransform& o, double tol = 1e-6) const {
        return std::abs(origin_x - o.origin_x) <= tol &&
               std::abs(origin_y - o.origin_y) <= tol &&
               std::abs(pixel_width - o.pixel_width) <= tol &&
               std::abs(pixel_height - o.pixel_height) <= tol &&
               crs_id == o.crs_id;
    }

    bool same_resolution(const GeoTransform& o, double tol = 1e-6) const {
        return std::abs(pixel_width - o.pixel_width) <= tol &&
               std::abs(pixel_height - o.pixel_height) <= tol;
    }

    /// Transform shifted by whole pixels (used for tiles and mosaics).
    GeoTransform shifted(int row_off, int col_off) const {
        GeoTransform t = *this;
        t.origin_x += col_off * pixel_width;
        t.origin_y += row_off * pixel_height;
        return t;
    }
};

/// True when the CRS is expressed in meters. Geographic (degree) systems are
/// recognized by their common EPSG codes; everything else is taken as metric.
bool crs_is_metric(const std::string& crs_id);

/// Pixel area in hectares: |pixel_width * pixel_height| / 10000.
/// Throws UnsupportedCrsError for degree-based CRS.
double pixel_area_hectares(const GeoTransform& transform);

/// Single-band georeferenced raster, row-major, north-up.
struct RasterGrid {
    int width = 0;
    int height = 0;
    GeoTransform transform;
    std::vector<double> values;           // height * width
    std::optional<double> nodata;

    RasterGrid() = default;
    RasterGrid(int w, int h, double fill = 0.0, std::optional<double> nd = std::nullopt)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill), nodata(nd) {}

    double& at(int row, int col) { return values[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return values[static_cast<size_t>(row) * width + col]; }

    size_t size() const { return values.size(); }

    bool is_nodata(double v) const { return nodata && v == *nodata; }
    bool is_nodata_at(int row, int col) const { return is_nodata(at(row, col)); }

    bool same_shape(const RasterGrid& o) const { return width == o.width && height == o.height; }

    bool same_grid(const RasterGrid& o, double tol = 1e-6) const {
        return same_shape(o) && transform.same_grid(o.transform, tol);
    }

    /// Throws AlignmentError naming the mismatching dimension/grid component.
    void require_aligned_with(const RasterGrid& o, const std::string& what) const;

    /// Count of non-nodata pixels.
    size_t valid_count() const;
};

/// Ordered stack of named bands on one grid, plus an optional QA band.
struct MultispectralScene {
    std::string id;
    int year = 0;
    int month = 0;
    std::vector<std::string> band_names;   // unique, same order as bands
    std::vector<RasterGrid> bands;
    std::optional<RasterGrid> qa;

    int width() const { return bands.empty() ? 0 : bands.front().width; }
    int height() const { return bands.empty() ? 0 : bands.front().height; }
    const GeoTransform& transform() const { return bands.front().transform; }

    bool has_band(const std::string& name) const;
    int band_index(const std::string& name) const;       // -1 if absent
    const RasterGrid& band(const std::string& name) const; // throws SchemaError
    RasterGrid& band(const std::string& name);

    /// Validates the type invariants: non-empty, unique names, one shape and
    /// transform across bands and qa. Throws SchemaError / AlignmentError.
    void validate() const;
};

/// Named binary membership raster ({0,1}{ pixels), e.g. one emirate.
struct RegionMask {
    std::string name;
    RasterGrid mask;
};

} // namespace mangrove

#endif
