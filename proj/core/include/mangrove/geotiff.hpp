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
#ifndef MANGROVE_GEOTIFF_HPP
#define MANGROVE_GEOTIFF_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mangrove/geo.hpp"

namespace mangrove {

// Self-contained GeoTIFF I/O. Covers the subset this toolkit needs:
// little-endian, uncompressed, striped files with any mix of uint8/16/32,
// int16/32, float32/64 samples, chunky or planar interleave, the GeoTIFF
// georeferencing keys (pixel scale + tiepoint + CRS), the GDAL nodata tag,
// and an optional palette for categorical rasters. Tiled or compressed
// TIFFs are rejected with a clear error.

enum class TiffDataType { UInt8, UInt16, Int16, UInt32, Int32, Float32, Float64 };

struct ColorEntry {
    uint8_t r = 0, g = 0, b = 0;
};

struct GeoTiffWriteOptions {
    TiffDataType dtype = TiffDataType::Float32;
    /// Palette for single-band uint8 rasters (index -> color).
    std::optional<std::vector<ColorEntry>> color_table;
    /// Extra metadata (JSON object text) merged into the ImageDescription tag.
    std::string metadata_json;
};

struct GeoTiffFile {
    std::vector<std::string> band_names;
    std::vector<RasterGrid> bands;       // all share shape + transform
    std::string metadata_json;           // ImageDescription payload ("" if none)
    std::optional<std::vector<ColorEntry>> color_table;
};

void write_geotiff(const std::string& path, const std::vector<const RasterGrid*>& bands,
                   const std::vector<std::string>& band_names,
                   const GeoTiffWriteOptions& opts = {});

void write_geotiff(const std::string& path, const RasterGrid& grid,
                   const GeoTiffWriteOptions& opts = {});

/// Writes scene bands plus, when present, the QA band appended under
/// `qa_band_name`. Scene id / timestamp go into the metadata JSON.
void write_scene_geotiff(const std::string& path, const MultispectralScene& scene,
                         const std::string& qa_band_name = "SCL",
                         const GeoTiffWriteOptions& opts = {});

GeoTiffFile read_geotiff(const std::string& path);

/// Reads a scene written by write_scene_geotiff (or any multiband GeoTIFF).
/// A band named `qa_band_name` is split out into scene.qa.
MultispectralScene read_scene_geotiff(const std::string& path,
                                      const std::string& qa_band_name = "SCL");

} // namespace mangrove

#endif
