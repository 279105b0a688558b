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
#include "mangrove/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <png.h>

namespace mangrove {

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& rgb) {
    if (rgb.size() != static_cast<size_t>(width) * height * 3)
        throw ArgumentError("write_png_rgb: buffer size mismatch");
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("write_png_rgb: cannot open '" + path + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("write_png_rgb: libpng failure for '" + path + "'");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

namespace {

// 5x7 bitmap glyphs, one 5-bit row per byte, top to bottom.
const std::map<char, std::array<uint8_t, 7>>& font() {
    static const std::map<char, std::array<uint8_t, 7>> f = {
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
        {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
        {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
        {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
        {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
        {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
        {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
        {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
        {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
        {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
        {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
        {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
        {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
        {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
        {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
        {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
        {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
        {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
        {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
        {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
        {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
        {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
        {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
        {'%', {0x19, 0x1A, 0x02, 0x04, 0x08, 0x0B, 0x13}},
        {'/', {0x01, 0x02, 0x02, 0x04, 0x08, 0x08, 0x10}},
        {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
        {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
        {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
        {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
        {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
        {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    };
    return f;
}

class Canvas {
public:
    Canvas(int w, int h, Rgb bg = {255, 255, 255}) : w_(w), h_(h), buf_(static_cast<size_t>(w) * h * 3) {
        for (size_t i = 0; i < buf_.size(); i += 3) {
            buf_[i] = bg[0];
            buf_[i + 1] = bg[1];
            buf_[i + 2] = bg[2];
        }
    }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        size_t i = (static_cast<size_t>(y) * w_ + x) * 3;
        buf_[i] = c[0];
        buf_[i + 1] = c[1];
        buf_[i + 2] = c[2];
    }

    void line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1) {
        int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            for (int t = -(thickness / 2); t <= thickness / 2; ++t) {
                if (dx >= -dy)
                    set(x0, y0 + t, c);
                else
                    set(x0 + t, y0, c);
            }
            if (x0 == x1 && y0 == y1) break;
            int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void fill_rect(int x, int y, int w, int h, Rgb c) {
        for (int yy = y; yy < y + h; ++yy)
            for (int xx = x; xx < x + w; ++xx) set(xx, yy, c);
    }

    void text(int x, int y, const std::string& s, Rgb c, int scale = 1) {
        const auto& f = font();
        int cx = x;
        for (char raw : s) {
            char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            auto it = f.find(ch);
            if (it != f.end()) {
                for (int row = 0; row < 7; ++row) {
                    for (int col = 0; col < 5; ++col) {
                        if (it->second[static_cast<size_t>(row)] & (1 << (4 - col)))
                            fill_rect(cx + col * scale, y + row * scale, scale, scale, c);
                    }
                }
            }
            cx += 6 * scale;
        }
    }

    static int text_width(const std::string& s, int scale = 1) {
        return static_cast<int>(s.size()) * 6 * scale;
    }

    void save(const std::string& path) const { write_png_rgb(path, w_, h_, buf_); }

private:
    int w_, h_;
    std::vector<uint8_t> buf_;
};

std::string format_tick(double v) {
    char buf[32];
    double a = std::abs(v);
    if (v == 0.0)
        std::snprintf(buf, sizeof buf, "0");
    else if (a >= 10000.0 || a < 0.001)
        std::snprintf(buf, sizeof buf, "%.2e", v);
    else if (a >= 100.0)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

void render_line_plot(const LinePlot& plot, const std::string& png_path) {
    const int W = plot.width, H = plot.height;
    const int ml = 78, mr = 24, mt = 40, mb = 58;
    Canvas cv(W, H);

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : plot.series) {
        for (auto [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        return ml + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (W - ml - mr)));
    };
    auto py = [&](double y) {
        return H - mb - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * (H - mt - mb)));
    };

    const Rgb axis{40, 40, 40}, grid{225, 225, 225}, text_c{30, 30, 30};

    // grid + ticks
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        double fx = xmin + (xmax - xmin) * i / nticks;
        double fy = ymin + (ymax - ymin) * i / nticks;
        cv.line(px(fx), mt, px(fx), H - mb, grid);
        cv.line(ml, py(fy), W - mr, py(fy), grid);
        std::string xs = format_tick(fx);
        cv.text(px(fx) - Canvas::text_width(xs) / 2, H - mb + 8, xs, text_c);
        std::string ys = format_tick(fy);
        cv.text(ml - Canvas::text_width(ys) - 6, py(fy) - 3, ys, text_c);
    }
    cv.line(ml, H - mb, W - mr, H - mb, axis);
    cv.line(ml, mt, ml, H - mb, axis);

    cv.text((W - Canvas::text_width(plot.title, 2)) / 2, 10, plot.title, text_c, 2);
    cv.text((W - Canvas::text_width(plot.x_label)) / 2, H - 22, plot.x_label, text_c);
    cv.text(6, mt - 16, plot.y_label, text_c);

    // series
    for (const auto& s : plot.series) {
        for (size_t i = 1; i < s.points.size(); ++i) {
            cv.line(px(s.points[i - 1].first), py(s.points[i - 1].second), px(s.points[i].first),
                    py(s.points[i].second), s.color, 2);
        }
        for (const auto& [x, y] : s.points) cv.fill_rect(px(x) - 1, py(y) - 1, 3, 3, s.color);
    }

    // legend
    int ly = mt + 8;
    for (const auto& s : plot.series) {
        int lx = W - mr - 150;
        cv.line(lx, ly + 3, lx + 22, ly + 3, s.color, 2);
        cv.text(lx + 28, ly, s.label, text_c);
        ly += 14;
    }

    cv.save(png_path);
}

namespace {

// Percentile stretch of a band to 0..255.
std::vector<uint8_t> stretch(const RasterGrid& g) {
    std::vector<double> vals;
    vals.reserve(g.values.size());
    for (double v : g.values)
        if (!g.is_nodata(v)) vals.push_back(v);
    double lo = 0.0, hi = 1.0;
    if (!vals.empty()) {
        std::sort(vals.begin(), vals.end());
        lo = vals[static_cast<size_t>(0.02 * (vals.size() - 1))];
        hi = vals[static_cast<size_t>(0.98 * (vals.size() - 1))];
        if (hi <= lo) hi = lo + 1.0;
    }
    std::vector<uint8_t> out(g.values.size(), 0);
    for (size_t i = 0; i < g.values.size(); ++i) {
        double v = g.values[i];
        if (g.is_nodata(v)) continue;
        double t = (v - lo) / (hi - lo);
        out[i] = static_cast<uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
    return out;
}

} // namespace

void render_triptych(const RasterGrid& red, const RasterGrid& green, const RasterGrid& blue,
                     const RasterGrid& truth, const RasterGrid& prediction,
                     const std::string& png_path) {
    red.require_aligned_with(truth, "render_triptych");
    red.require_aligned_with(prediction, "render_triptych");
    const int W = red.width, H = red.height, gap = 4;
    auto r8 = stretch(red), g8 = stretch(green), b8 = stretch(blue);

    Canvas cv(3 * W + 2 * gap, H, {60, 60, 60});
    auto mask_color = [](double v) -> Rgb {
        if (v == 255.0) return {128, 128, 128};
        return v != 0.0 ? Rgb{20, 160, 60} : Rgb{238, 238, 238};
    };
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            size_t i = static_cast<size_t>(y) * W + x;
            cv.set(x, y, {r8[i], g8[i], b8[i]});
            double tv = truth.is_nodata(truth.values[i]) ? 255.0 : truth.values[i];
            cv.set(W + gap + x, y, mask_color(tv));
            double pv = prediction.is_nodata(prediction.values[i]) ? 255.0 : prediction.values[i];
            cv.set(2 * (W + gap) + x, y, mask_color(pv));
        }
    }
    cv.save(png_path);
}

} // namespace mangrove
