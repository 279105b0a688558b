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
#include "mangrove/raster_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mangrove {

Reducer reducer_from_string(const std::string& s) {
    if (s == "median") return Reducer::Median;
    if (s == "mean") return Reducer::Mean;
    if (s == "first") return Reducer::First;
    throw ArgumentError("unknown reducer '" + s + "' (expected median|mean|first)");
}

std::string to_string(Reducer r) {
    switch (r) {
        case Reducer::Median: return "median";
        case Reducer::Mean: return "mean";
        case Reducer::First: return "first";
    }
    return "?";
}

MultispectralScene clip_to_region(const MultispectralScene& scene, const RegionMask& region) {
    scene.validate();
    region.mask.require_aligned_with(scene.bands[0], "region '" + region.name + "'");

    MultispectralScene out = scene;
    for (auto& band : out.bands) {
        if (!band.nodata) band.nodata = kDefaultNodata;
        const double nd = *band.nodata;
        for (size_t i = 0; i < band.values.size(); ++i)
            if (region.mask.values[i] == 0.0) band.values[i] = nd;
    }
    if (out.qa) {
        if (!out.qa->nodata) out.qa->nodata = kDefaultNodata;
        const double nd = *out.qa->nodata;
        for (size_t i = 0; i < out.qa->values.size(); ++i)
            if (region.mask.values[i] == 0.0) out.qa->values[i] = nd;
    }
    return out;
}

double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

// Integer pixel offset of a scene grid relative to an anchor origin.
// Throws when the scene is not on the anchor lattice.
void lattice_offset(const GeoTransform& anchor, const GeoTransform& t, const std::string& id,
                    long& row_off, long& col_off) {
    double fc = (t.origin_x - anchor.origin_x) / anchor.pixel_width;
    double fr = (t.origin_y - anchor.origin_y) / anchor.pixel_height;
    double rc = std::round(fc), rr = std::round(fr);
    if (std::abs(fc - rc) > 1e-6 || std::abs(fr - rr) > 1e-6) {
        throw AlignmentError("mosaic: scene '" + id +
                             "' is not on the common pixel lattice (sub-pixel offset)");
    }
    col_off = static_cast<long>(rc);
    row_off = static_cast<long>(rr);
}

} // namespace

MultispectralScene mosaic(const std::vector<MultispectralScene>& scenes, Reducer reducer) {
    if (scenes.empty()) throw ArgumentError("mosaic: scene list is empty");
    for (const auto& s : scenes) s.validate();

    const auto& ref = scenes.front();
    for (const auto& s : scenes) {
        if (s.band_names != ref.band_names) {
            throw SchemaError("mosaic: band names of scene '" + s.id +
                              "' do not match scene '" + ref.id + "'");
        }
        if (s.transform().crs_id != ref.transform().crs_id)
            throw AlignmentError("mosaic: CRS mismatch between '" + s.id + "' and '" + ref.id + "'");
        if (!s.transform().same_resolution(ref.transform()))
            throw AlignmentError("mosaic: resolution mismatch between '" + s.id + "' and '" +
                                 ref.id + "'");
    }

    // Union bounding box in lattice coordinates anchored at the first scene.
    long min_r = 0, min_c = 0, max_r = ref.height(), max_c = ref.width();
    std::vector<std::pair<long, long>> offsets(scenes.size());
    for (size_t i = 0; i < scenes.size(); ++i) {
        lattice_offset(ref.transform(), scenes[i].transform(), scenes[i].id,
                       offsets[i].first, offsets[i].second);
        min_r = std::min(min_r, offsets[i].first);
        min_c = std::min(min_c, offsets[i].second);
        max_r = std::max(max_r, offsets[i].first + scenes[i].height());
        max_c = std::max(max_c, offsets[i].second + scenes[i].width());
    }
    const int out_h = static_cast<int>(max_r - min_r);
    const int out_w = static_cast<int>(max_c - min_c);

    MultispectralScene out;
    out.id = "mosaic(" + to_string(reducer) + ")";
    out.year = ref.year;
    out.month = ref.month;
    out.band_names = ref.band_names;
    out.bands.reserve(ref.bands.size());

    GeoTransform out_t = ref.transform();
    out_t.origin_x += min_c * out_t.pixel_width;
    out_t.origin_y += min_r * out_t.pixel_height;

    std::vector<double> acc;
    for (size_t b = 0; b < ref.bands.size(); ++b) {
        RasterGrid grid(out_w, out_h, kDefaultNodata, kDefaultNodata);
        grid.transform = out_t;
        for (int r = 0; r < out_h; ++r) {
            for (int c = 0; c < out_w; ++c) {
                acc.clear();
                for (size_t i = 0; i < scenes.size(); ++i) {
                    long sr = r + min_r - offsets[i].first;
                    long sc = c + min_c - offsets[i].second;
                    if (sr < 0 || sc < 0 || sr >= scenes[i].height() || sc >= scenes[i].width())
                        continue;
                    const auto& band = scenes[i].bands[b];
                    double v = band.at(static_cast<int>(sr), static_cast<int>(sc));
                    if (band.is_nodata(v)) continue;
                    acc.push_back(v);
                    if (reducer == Reducer::First) break;
                }
                if (acc.empty()) continue;
                double v;
                switch (reducer) {
                    case Reducer::Median: v = median_inplace(acc); break;
                    case Reducer::Mean: {
                        double s = 0.0;
                        for (double x : acc) s += x;
                        v = s / static_cast<double>(acc.size());
                        break;
                    }
                    case Reducer::First: v = acc.front(); break;
                    default: v = acc.front();
                }
                grid.at(r, c) = v;
            }
        }
        out.bands.push_back(std::move(grid));
    }
    return out;
}

RasterGrid resample_to(const RasterGrid& grid, const GeoTransform& target_transform,
                       int target_width, int target_height, ResampleMethod method) {
    if (target_width <= 0 || target_height <= 0)
        throw ArgumentError("resample_to: degenerate target size " +
                            std::to_string(target_width) + "x" + std::to_string(target_height));
    if (grid.width <= 0 || grid.height <= 0)
        throw ArgumentError("resample_to: source grid is empty");

    RasterGrid out(target_width, target_height, kDefaultNodata,
                   grid.nodata ? grid.nodata : std::optional<double>(kDefaultNodata));
    out.transform = target_transform;

    for (int r = 0; r < target_height; ++r) {
        for (int c = 0; c < target_width; ++c) {
            double x, y;
            target_transform.pixel_center(r, c, x, y);
            double sr, sc;
            grid.transform.map_to_pixel(x, y, sr, sc);
            if (method == ResampleMethod::Nearest) {
                int ir = static_cast<int>(std::floor(sr));
                int ic = static_cast<int>(std::floor(sc));
                if (ir < 0 || ic < 0 || ir >= grid.height || ic >= grid.width) continue;
                double v = grid.at(ir, ic);
                if (!grid.is_nodata(v)) out.at(r, c) = v;
            } else {
                // Bilinear between the four surrounding pixel centers.
                double fr = sr - 0.5, fc = sc - 0.5;
                int r0 = static_cast<int>(std::floor(fr));
                int c0 = static_cast<int>(std::floor(fc));
                double wr = fr - r0, wc = fc - c0;
                double wsum = 0.0, vsum = 0.0;
                for (int dr = 0; dr <= 1; ++dr) {
                    for (int dc = 0; dc <= 1; ++dc) {
                        int rr = r0 + dr, cc = c0 + dc;
                        if (rr < 0 || cc < 0 || rr >= grid.height || cc >= grid.width) continue;
                        double v = grid.at(rr, cc);
                        if (grid.is_nodata(v)) continue;
                        double w = (dr ? wr : 1.0 - wr) * (dc ? wc : 1.0 - wc);
                        wsum += w;
                        vsum += w * v;
                    }
                }
                if (wsum > 1e-12) out.at(r, c) = vsum / wsum;
            }
        }
    }
    return out;
}

RasterGrid resample_to(const RasterGrid& grid, const GeoTransform& target_transform,
                       ResampleMethod method) {
    double ext_x = grid.width * grid.transform.pixel_width;
    double ext_y = grid.height * grid.transform.pixel_height;
    int tw = static_cast<int>(std::llround(ext_x / target_transform.pixel_width));
    int th = static_cast<int>(std::llround(ext_y / target_transform.pixel_height));
    return resample_to(grid, target_transform, tw, th, method);
}

} // namespace mangrove
