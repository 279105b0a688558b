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
#include <doctest.h>

#include "mangrove/geotiff.hpp"
#include "mangrove/manifest.hpp"
#include "mangrove/raster_ops.hpp"
#include "testutil.hpp"

#include <fstream>

using namespace mangrove;
using namespace mangrove::test;

TEST_CASE("geotransform maps pixel centers and back") {
    GeoTransform t = utm_10m(500000.0, 2600000.0);
    double x, y;
    t.pixel_center(0, 0, x, y);
    CHECK(x == doctest::Approx(500005.0));
    CHECK(y == doctest::Approx(2599995.0));
    double row, col;
    t.map_to_pixel(x, y, row, col);
    CHECK(row == doctest::Approx(0.5));
    CHECK(col == doctest::Approx(0.5));
}

TEST_CASE("pixel_area_hectares") {
    GeoTransform t = utm_10m();
    CHECK(pixel_area_hectares(t) == doctest::Approx(0.01));

    t.pixel_width = 100.0;
    t.pixel_height = -100.0;
    CHECK(pixel_area_hectares(t) == doctest::Approx(1.0));

    t.pixel_width = 20.0;
    t.pixel_height = -10.0;
    CHECK(pixel_area_hectares(t) == doctest::Approx(0.02));

    SUBCASE("invariant to the sign of pixel_height") {
        GeoTransform up = utm_10m();
        GeoTransform down = utm_10m();
        down.pixel_height = 10.0;
        CHECK(pixel_area_hectares(up) == pixel_area_hectares(down));
    }

    SUBCASE("degree CRS refused") {
        GeoTransform deg = utm_10m();
        deg.crs_id = "EPSG:4326";
        CHECK_THROWS_AS(pixel_area_hectares(deg), UnsupportedCrsError);
    }
}

namespace {

MultispectralScene two_band_scene(const std::string& id, int w, int h, double v0, double v1,
                                  int year = 2020, int month = 1) {
    return make_scene(id, year, month, {"B3", "B8"},
                      {const_grid(w, h, v0, kDefaultNodata), const_grid(w, h, v1, kDefaultNodata)});
}

} // namespace

TEST_CASE("clip_to_region") {
    MultispectralScene scene = two_band_scene("s", 4, 4, 7.0, 9.0);

    SUBCASE("all-ones region is the identity") {
        RegionMask all{"all", const_grid(4, 4, 1.0)};
        MultispectralScene out = clip_to_region(scene, all);
        CHECK(out.bands[0].values == scene.bands[0].values);
        CHECK(out.bands[1].values == scene.bands[1].values);
    }

    SUBCASE("all-zeros region blanks every pixel") {
        RegionMask none{"none", const_grid(4, 4, 0.0)};
        MultispectralScene out = clip_to_region(scene, none);
        for (const auto& band : out.bands)
            for (double v : band.values) CHECK(band.is_nodata(v));
    }

    SUBCASE("left two columns kept") {
        RasterGrid m = const_grid(4, 4, 0.0);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 2; ++c) m.at(r, c) = 1.0;
        MultispectralScene out = clip_to_region(scene, {"west", m});
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                if (c < 2) {
                    CHECK(out.bands[0].at(r, c) == 7.0);
                } else {
                    CHECK(out.bands[0].is_nodata_at(r, c));
                }
            }
        }
    }

    SUBCASE("idempotent") {
        Rng rng(7);
        RasterGrid m = const_grid(4, 4, 0.0);
        for (double& v : m.values) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        RegionMask region{"rand", m};
        MultispectralScene once = clip_to_region(scene, region);
        MultispectralScene twice = clip_to_region(once, region);
        CHECK(once.bands[0].values == twice.bands[0].values);
        CHECK(once.bands[1].values == twice.bands[1].values);
    }

    SUBCASE("misaligned region names the dimension") {
        RegionMask bad{"bad", const_grid(3, 4, 1.0)};
        CHECK_THROWS_WITH_AS(clip_to_region(scene, bad),
                             doctest::Contains("width mismatch"), AlignmentError);
    }
}

TEST_CASE("mosaic") {
    SUBCASE("single scene is identity over its extent") {
        MultispectralScene s = two_band_scene("a", 3, 2, 4.0, 5.0);
        MultispectralScene out = mosaic({s}, Reducer::Median);
        CHECK(out.width() == 3);
        CHECK(out.height() == 2);
        CHECK(out.bands[0].values == s.bands[0].values);
    }

    SUBCASE("mean of 10 and 20 is 15") {
        auto a = two_band_scene("a", 2, 2, 10.0, 1.0);
        auto b = two_band_scene("b", 2, 2, 20.0, 3.0);
        MultispectralScene out = mosaic({a, b}, Reducer::Mean);
        CHECK(out.bands[0].at(0, 0) == doctest::Approx(15.0));
        CHECK(out.bands[1].at(1, 1) == doctest::Approx(2.0));
    }

    SUBCASE("median of {3,9,5} is 5, against a sort oracle") {
        auto a = two_band_scene("a", 1, 1, 3.0, 0.0);
        auto b = two_band_scene("b", 1, 1, 9.0, 0.0);
        auto c = two_band_scene("c", 1, 1, 5.0, 0.0);
        MultispectralScene out = mosaic({a, b, c}, Reducer::Median);
        std::vector<double> vals = {3.0, 9.0, 5.0};
        std::sort(vals.begin(), vals.end());
        CHECK(out.bands[0].at(0, 0) == vals[1]);
        CHECK(out.bands[0].at(0, 0) == 5.0);
    }

    SUBCASE("median over an odd number of identical scenes returns the common scene") {
        auto s = two_band_scene("s", 2, 3, 8.0, 2.0);
        auto s2 = s, s3 = s;
        s2.id = "s2";
        s3.id = "s3";
        MultispectralScene out = mosaic({s, s2, s3}, Reducer::Median);
        CHECK(out.bands[0].values == s.bands[0].values);
        CHECK(out.bands[1].values == s.bands[1].values);
    }

    SUBCASE("union bounding box with offset scenes") {
        auto a = two_band_scene("a", 2, 2, 1.0, 1.0);
        auto b = two_band_scene("b", 2, 2, 2.0, 2.0);
        for (auto& g : b.bands) g.transform = g.transform.shifted(2, 2);
        MultispectralScene out = mosaic({a, b}, Reducer::First);
        CHECK(out.width() == 4);
        CHECK(out.height() == 4);
        CHECK(out.bands[0].at(0, 0) == 1.0);
        CHECK(out.bands[0].at(3, 3) == 2.0);
        CHECK(out.bands[0].is_nodata_at(0, 3)); // no contributor
        CHECK(out.bands[0].is_nodata_at(3, 0));
    }

    SUBCASE("nodata pixels never contribute") {
        auto a = two_band_scene("a", 1, 1, 10.0, 0.0);
        a.bands[0].at(0, 0) = kDefaultNodata;
        auto b = two_band_scene("b", 1, 1, 30.0, 0.0);
        MultispectralScene out = mosaic({a, b}, Reducer::Mean);
        CHECK(out.bands[0].at(0, 0) == 30.0);
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(mosaic({}, Reducer::Median), ArgumentError);
        auto a = two_band_scene("a", 2, 2, 1.0, 1.0);
        auto bad = make_scene("b", 2020, 1, {"B3", "B9"},
                              {const_grid(2, 2, 1.0), const_grid(2, 2, 1.0)});
        CHECK_THROWS_AS(mosaic({a, bad}, Reducer::Median), SchemaError);
        auto sub = two_band_scene("c", 2, 2, 1.0, 1.0);
        for (auto& g : sub.bands) g.transform.origin_x += 3.0; // 0.3 px: off-lattice
        CHECK_THROWS_AS(mosaic({a, sub}, Reducer::Median), AlignmentError);
    }
}

TEST_CASE("resample_to") {
    SUBCASE("identical transform is the identity") {
        RasterGrid g = grid_of(3, 2, {1, 2, 3, 4, 5, 6});
        RasterGrid out = resample_to(g, g.transform, 3, 2, ResampleMethod::Nearest);
        CHECK(out.values == g.values);
        RasterGrid outb = resample_to(g, g.transform, 3, 2, ResampleMethod::Bilinear);
        for (size_t i = 0; i < g.values.size(); ++i)
            CHECK(outb.values[i] == doctest::Approx(g.values[i]));
    }

    SUBCASE("2x nearest upsample of a constant grid stays constant") {
        RasterGrid g = const_grid(2, 2, 3.5);
        GeoTransform t = g.transform;
        t.pixel_width = 5.0;
        t.pixel_height = -5.0;
        RasterGrid out = resample_to(g, t, ResampleMethod::Nearest);
        CHECK(out.width == 4);
        CHECK(out.height == 4);
        for (double v : out.values) CHECK(v == 3.5);
    }

    SUBCASE("bilinear midpoint between columns carrying 0 and 2 gives 1.0") {
        RasterGrid g = grid_of(2, 2, {0, 2, 0, 2});
        g.transform.pixel_width = 1.0;
        g.transform.pixel_height = -1.0;
        GeoTransform t = g.transform;
        t.origin_x += 0.5; // target centers fall on source-center midpoints
        RasterGrid out = resample_to(g, t, 1, 2, ResampleMethod::Bilinear);
        CHECK(out.at(0, 0) == doctest::Approx(1.0));
    }

    SUBCASE("bilinear output bounded by source range") {
        Rng rng(11);
        RasterGrid g = const_grid(8, 8, 0.0);
        for (double& v : g.values) v = rng.uniform(-5.0, 5.0);
        double lo = *std::min_element(g.values.begin(), g.values.end());
        double hi = *std::max_element(g.values.begin(), g.values.end());
        GeoTransform t = g.transform;
        t.pixel_width = 3.0;
        t.pixel_height = -3.0;
        RasterGrid out = resample_to(g, t, 20, 20, ResampleMethod::Bilinear);
        for (double v : out.values) {
            if (out.is_nodata(v)) continue;
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
        }
    }

    SUBCASE("nearest preserves the exact value set") {
        RasterGrid g = grid_of(2, 2, {1.25, -3.5, 7.0, 0.125});
        GeoTransform t = g.transform;
        t.pixel_width = 4.0;
        t.pixel_height = -4.0;
        RasterGrid out = resample_to(g, t, ResampleMethod::Nearest);
        for (double v : out.values) {
            if (out.is_nodata(v)) continue;
            CHECK((v == 1.25 || v == -3.5 || v == 7.0 || v == 0.125));
        }
    }

    SUBCASE("degenerate target errors") {
        RasterGrid g = const_grid(2, 2, 1.0);
        CHECK_THROWS_AS(resample_to(g, g.transform, 0, 2, ResampleMethod::Nearest),
                        ArgumentError);
    }
}

TEST_CASE("geotiff round trip: float32 multiband") {
    TempDir dir("gtiff");
    RasterGrid b1 = grid_of(3, 2, {100, 200, 300, 400, 500, kDefaultNodata}, kDefaultNodata);
    RasterGrid b2 = grid_of(3, 2, {7, 6, 5, 4, 3, 2}, kDefaultNodata);
    b1.transform.origin_x = 321000.0;
    b1.transform.origin_y = 2750000.0;
    b2.transform = b1.transform;

    GeoTiffWriteOptions opts;
    opts.metadata_json = R"({"note":"fixture"})";
    write_geotiff(dir.str("two.tif"), {&b1, &b2}, {"B3", "B8"}, opts);

    GeoTiffFile f = read_geotiff(dir.str("two.tif"));
    REQUIRE(f.bands.size() == 2);
    CHECK(f.band_names == std::vector<std::string>{"B3", "B8"});
    CHECK(f.bands[0].width == 3);
    CHECK(f.bands[0].height == 2);
    CHECK(f.bands[0].values == b1.values);
    CHECK(f.bands[1].values == b2.values);
    CHECK(f.bands[0].nodata == kDefaultNodata);
    CHECK(f.bands[0].transform.origin_x == doctest::Approx(321000.0));
    CHECK(f.bands[0].transform.origin_y == doctest::Approx(2750000.0));
    CHECK(f.bands[0].transform.pixel_width == doctest::Approx(10.0));
    CHECK(f.bands[0].transform.pixel_height == doctest::Approx(-10.0));
    CHECK(f.bands[0].transform.crs_id == "EPSG:32640");
    CHECK(f.metadata_json.find("fixture") != std::string::npos);
}

TEST_CASE("geotiff round trip: uint8 palette") {
    TempDir dir("palette");
    RasterGrid g = grid_of(2, 2, {0, 1, 2, 3}, 255.0);
    GeoTiffWriteOptions opts;
    opts.dtype = TiffDataType::UInt8;
    opts.color_table = std::vector<ColorEntry>{{235, 235, 235}, {215, 25, 28},
                                                {43, 85, 210}, {128, 48, 160}};
    write_geotiff(dir.str("cmap.tif"), g, opts);

    GeoTiffFile f = read_geotiff(dir.str("cmap.tif"));
    CHECK(f.bands[0].values == g.values);
    REQUIRE(f.color_table.has_value());
    CHECK((*f.color_table)[1].r == 215);
    CHECK((*f.color_table)[2].b == 210);
    CHECK(f.bands[0].nodata == 255.0);
}

TEST_CASE("geotiff scene round trip keeps QA and timestamps") {
    TempDir dir("scene");
    MultispectralScene s = make_scene("S2_2020_03", 2020, 3, {"B3", "B8"},
                                      {const_grid(4, 4, 900.0, kDefaultNodata),
                                       const_grid(4, 4, 400.0, kDefaultNodata)},
                                      const_grid(4, 4, 4.0));
    write_scene_geotiff(dir.str("scene.tif"), s, "SCL");
    MultispectralScene back = read_scene_geotiff(dir.str("scene.tif"), "SCL");
    CHECK(back.id == "S2_2020_03");
    CHECK(back.year == 2020);
    CHECK(back.month == 3);
    CHECK(back.band_names == std::vector<std::string>{"B3", "B8"});
    REQUIRE(back.qa.has_value());
    CHECK(back.qa->at(2, 2) == 4.0);
}

TEST_CASE("geotiff rejects non-tiff and missing input") {
    TempDir dir("bad");
    {
        std::ofstream f(dir.str("not.tif"), std::ios::binary);
        f << "plainly not a tiff";
    }
    CHECK_THROWS_AS(read_geotiff(dir.str("not.tif")), IoError);
    CHECK_THROWS_AS(read_geotiff(dir.str("missing.tif")), IoError);
}

TEST_CASE("manifest parsing and scene loading") {
    TempDir dir("manifest");
    MultispectralScene s = make_scene("a", 2021, 4, {"B3", "B8"},
                                      {const_grid(2, 2, 1000.0, kDefaultNodata),
                                       const_grid(2, 2, 500.0, kDefaultNodata)},
                                      const_grid(2, 2, 4.0));
    write_scene_geotiff(dir.str("a.tif"), s, "SCL");
    {
        std::ofstream f(dir.str("manifest.json"));
        f << R"({"scenes":[{"id":"a","year":2021,"month":4,"cloud_pct":3.5,"path":"a.tif"}]})";
    }
    Manifest m = load_manifest(dir.str("manifest.json"));
    REQUIRE(m.scenes.size() == 1);
    CHECK(m.scenes[0].cloud_pct == doctest::Approx(3.5));
    CHECK(m.for_year(2021).size() == 1);
    CHECK(m.for_year(2020).empty());
    CHECK(m.for_month(2021, 4).size() == 1);

    MultispectralScene loaded = load_scene(m.scenes[0]);
    CHECK(loaded.year == 2021);
    CHECK(loaded.band("B3").at(0, 0) == 1000.0);
    REQUIRE(loaded.qa.has_value());

    SUBCASE("invalid entries are rejected") {
        std::ofstream f(dir.str("bad.json"));
        f << R"({"scenes":[{"id":"x","year":2021,"month":13,"cloud_pct":1,"path":"a.tif"}]})";
        f.close();
        CHECK_THROWS_AS(load_manifest(dir.str("bad.json")), SchemaError);
    }
}

TEST_CASE("scene validate catches structural breakage") {
    MultispectralScene s = two_band_scene("s", 2, 2, 1.0, 2.0);
    s.band_names[1] = "B3"; // duplicate
    CHECK_THROWS_AS(s.validate(), SchemaError);
    s.band_names[1] = "B8";
    s.bands[1] = const_grid(3, 2, 2.0);
    CHECK_THROWS_AS(s.validate(), AlignmentError);
}
