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
#ifndef MANGROVE_PLOT_HPP
#define MANGROVE_PLOT_HPP

#include <array>
#include <string>
#include <vector>

#include "mangrove/geo.hpp"

namespace mangrove {

using Rgb = std::array<uint8_t, 3>;

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& rgb);

struct PlotSeries {
    std::string label;
    Rgb color{0, 0, 0};
    std::vector<std::pair<double, double>> points; // (x, y)
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    int width = 960;
    int height = 600;
};

/// Renders a simple line chart (axes, ticks, grid, legend) to a PNG.
void render_line_plot(const LinePlot& plot, const std::string& png_path);

/// Side-by-side panel: false-color composite | truth mask | prediction mask.
/// Bands are stretched to their 2nd..98th percentile range.
void render_triptych(const RasterGrid& red, const RasterGrid& green, const RasterGrid& blue,
                     const RasterGrid& truth, const RasterGrid& prediction,
                     const std::string& png_path);

} // namespace mangrove

#endif
