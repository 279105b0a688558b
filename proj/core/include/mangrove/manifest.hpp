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
#ifndef MANGROVE_MANIFEST_HPP
#define MANGROVE_MANIFEST_HPP

#include <string>
#include <vector>

#include "mangrove/geo.hpp"

namespace mangrove {

/// One acquisition in the local scene manifest. The manifest replaces
/// cloud-platform querying: it lists per-acquisition GeoTIFF paths,
/// timestamps and cloud-cover percentages.
struct ManifestEntry {
    std::string id;
    int year = 0;
    int month = 0;
    double cloud_pct = 0.0;      // [0, 100]
    std::string path;            // resolved to an absolute/relative-to-cwd path on load
    std::string qa_band = "SCL"; // band name holding the QA layer inside the file
};

struct Manifest {
    std::vector<ManifestEntry> scenes;

    std::vector<ManifestEntry> for_year(int year) const;
    std::vector<ManifestEntry> for_month(int year, int month) const;
};

/// Parses a manifest JSON file. Relative scene paths are resolved against
/// the manifest's directory. Throws IoError / SchemaError.
Manifest load_manifest(const std::string& path);

/// Loads the scene raster referenced by a manifest entry.
MultispectralScene load_scene(const ManifestEntry& entry);

} // namespace mangrove

#endif
