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
#include "mangrove/geotiff.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mangrove {

namespace {

using json = nlohmann::json;

// TIFF tag ids
constexpr uint16_t kTagImageWidth = 256;
constexpr uint16_t kTagImageLength = 257;
constexpr uint16_t kTagBitsPerSample = 258;
constexpr uint16_t kTagCompression = 259;
constexpr uint16_t kTagPhotometric = 262;
constexpr uint16_t kTagImageDescription = 270;
constexpr uint16_t kTagStripOffsets = 273;
constexpr uint16_t kTagSamplesPerPixel = 277;
constexpr uint16_t kTagRowsPerStrip = 278;
constexpr uint16_t kTagStripByteCounts = 279;
constexpr uint16_t kTagPlanarConfig = 284;
constexpr uint16_t kTagColorMap = 320;
constexpr uint16_t kTagTileWidth = 322;
constexpr uint16_t kTagSampleFormat = 339;
constexpr uint16_t kTagModelPixelScale = 33550;
constexpr uint16_t kTagModelTiepoint = 33922;
constexpr uint16_t kTagGeoKeyDirectory = 34735;
constexpr uint16_t kTagGeoAsciiParams = 34737;
constexpr uint16_t kTagGdalNodata = 42113;

// TIFF field types
constexpr uint16_t kTypeByte = 1;
constexpr uint16_t kTypeAscii = 2;
constexpr uint16_t kTypeShort = 3;
constexpr uint16_t kTypeLong = 4;
constexpr uint16_t kTypeDouble = 12;

size_t type_size(uint16_t t) {
    switch (t) {
        case kTypeByte:
        case kTypeAscii: return 1;
        case kTypeShort: return 2;
        case kTypeLong: return 4;
        case kTypeDouble: return 8;
        case 5: return 8;   // RATIONAL
        case 6: return 1;   // SBYTE
        case 8: return 2;   // SSHORT
        case 9: return 4;   // SLONG
        case 11: return 4;  // FLOAT
        default: return 0;
    }
}

struct SampleLayout {
    uint16_t bits = 32;
    uint16_t format = 3; // 1=uint, 2=int, 3=float
};

SampleLayout layout_for(TiffDataType dt) {
    switch (dt) {
        case TiffDataType::UInt8: return {8, 1};
        case TiffDataType::UInt16: return {16, 1};
        case TiffDataType::Int16: return {16, 2};
        case TiffDataType::UInt32: return {32, 1};
        case TiffDataType::Int32: return {32, 2};
        case TiffDataType::Float32: return {32, 3};
        case TiffDataType::Float64: return {64, 3};
    }
    return {32, 3};
}

void append_sample(std::vector<uint8_t>& out, double v, TiffDataType dt) {
    auto put = [&](const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    };
    switch (dt) {
        case TiffDataType::UInt8: {
            uint8_t x = static_cast<uint8_t>(std::llround(std::min(255.0, std::max(0.0, v))));
            put(&x, 1);
            break;
        }
        case TiffDataType::UInt16: {
            uint16_t x = static_cast<uint16_t>(std::llround(std::min(65535.0, std::max(0.0, v))));
            put(&x, 2);
            break;
        }
        case TiffDataType::Int16: {
            int16_t x = static_cast<int16_t>(std::llround(std::min(32767.0, std::max(-32768.0, v))));
            put(&x, 2);
            break;
        }
        case TiffDataType::UInt32: {
            uint32_t x = static_cast<uint32_t>(std::llround(std::max(0.0, v)));
            put(&x, 4);
            break;
        }
        case TiffDataType::Int32: {
            int32_t x = static_cast<int32_t>(std::llround(v));
            put(&x, 4);
            break;
        }
        case TiffDataType::Float32: {
            float x = static_cast<float>(v);
            put(&x, 4);
            break;
        }
        case TiffDataType::Float64: {
            put(&v, 8);
            break;
        }
    }
}

struct TagEntry {
    uint16_t tag = 0;
    uint16_t type = 0;
    uint32_t count = 0;
    std::vector<uint8_t> payload;  // raw little-endian value bytes
};

template <typename T>
std::vector<uint8_t> pack(const std::vector<T>& vals) {
    std::vector<uint8_t> out(vals.size() * sizeof(T));
    std::memcpy(out.data(), vals.data(), out.size());
    return out;
}

TagEntry shorts(uint16_t tag, std::vector<uint16_t> v) {
    return {tag, kTypeShort, static_cast<uint32_t>(v.size()), pack(v)};
}
TagEntry longs(uint16_t tag, std::vector<uint32_t> v) {
    return {tag, kTypeLong, static_cast<uint32_t>(v.size()), pack(v)};
}
TagEntry doubles(uint16_t tag, std::vector<double> v) {
    return {tag, kTypeDouble, static_cast<uint32_t>(v.size()), pack(v)};
}
TagEntry ascii(uint16_t tag, std::string s) {
    s.push_back('\0');
    std::vector<uint8_t> p(s.begin(), s.end());
    return {tag, kTypeAscii, static_cast<uint32_t>(p.size()), std::move(p)};
}

bool parse_epsg(const std::string& crs_id, uint16_t& code) {
    if (crs_id.rfind("EPSG:", 0) != 0) return false;
    long v = 0;
    try {
        v = std::stol(crs_id.substr(5));
    } catch (...) {
        return false;
    }
    if (v <= 0 || v > 65535) return false;
    code = static_cast<uint16_t>(v);
    return true;
}

std::string format_nodata(double nd) {
    std::ostringstream os;
    os.precision(17);
    os << nd;
    return os.str();
}

} // namespace

void write_geotiff(const std::string& path, const std::vector<const RasterGrid*>& bands,
                   const std::vector<std::string>& band_names, const GeoTiffWriteOptions& opts) {
    if (bands.empty()) throw ArgumentError("write_geotiff: no bands");
    if (!band_names.empty() && band_names.size() != bands.size())
        throw ArgumentError("write_geotiff: band_names count != band count");
    const RasterGrid& ref = *bands.front();
    if (ref.width <= 0 || ref.height <= 0)
        throw ArgumentError("write_geotiff: empty raster");
    for (const auto* b : bands) b->require_aligned_with(ref, "write_geotiff band");
    if (opts.color_table && (bands.size() != 1 || opts.dtype != TiffDataType::UInt8))
        throw ArgumentError("write_geotiff: color table requires a single uint8 band");

    const SampleLayout lay = layout_for(opts.dtype);
    const size_t n_bands = bands.size();
    const size_t plane_bytes = static_cast<size_t>(ref.width) * ref.height * (lay.bits / 8);

    // Band planes (planar configuration 2): one strip per band.
    std::vector<uint8_t> data;
    data.reserve(plane_bytes * n_bands);
    for (const auto* b : bands)
        for (double v : b->values) append_sample(data, v, opts.dtype);

    // ImageDescription metadata
    json desc = opts.metadata_json.empty() ? json::object() : json::parse(opts.metadata_json);
    if (!band_names.empty()) desc["band_names"] = band_names;

    // GeoKey directory
    std::vector<uint16_t> geokeys;
    std::string geo_ascii = ref.transform.crs_id + "|";
    {
        uint16_t epsg = 0;
        bool have_epsg = parse_epsg(ref.transform.crs_id, epsg);
        bool geographic = !crs_is_metric(ref.transform.crs_id);
        std::vector<std::array<uint16_t, 4>> keys;
        keys.push_back({1024, 0, 1, static_cast<uint16_t>(geographic ? 2 : 1)}); // model type
        keys.push_back({1025, 0, 1, 1});                                         // pixel is area
        keys.push_back({1026, kTagGeoAsciiParams, static_cast<uint16_t>(geo_ascii.size()), 0});
        if (have_epsg) {
            if (geographic)
                keys.push_back({2048, 0, 1, epsg});
            else
                keys.push_back({3072, 0, 1, epsg});
        }
        geokeys = {1, 1, 0, static_cast<uint16_t>(keys.size())};
        for (const auto& k : keys) geokeys.insert(geokeys.end(), k.begin(), k.end());
    }

    std::vector<TagEntry> tags;
    tags.push_back(longs(kTagImageWidth, {static_cast<uint32_t>(ref.width)}));
    tags.push_back(longs(kTagImageLength, {static_cast<uint32_t>(ref.height)}));
    tags.push_back(shorts(kTagBitsPerSample, std::vector<uint16_t>(n_bands, lay.bits)));
    tags.push_back(shorts(kTagCompression, {1}));
    tags.push_back(shorts(kTagPhotometric, {static_cast<uint16_t>(opts.color_table ? 3 : 1)}));
    tags.push_back(ascii(kTagImageDescription, desc.dump()));
    std::vector<uint32_t> strip_offsets(n_bands, 0); // patched below
    tags.push_back(longs(kTagStripOffsets, strip_offsets));
    tags.push_back(shorts(kTagSamplesPerPixel, {static_cast<uint16_t>(n_bands)}));
    tags.push_back(longs(kTagRowsPerStrip, {static_cast<uint32_t>(ref.height)}));
    tags.push_back(longs(kTagStripByteCounts,
                         std::vector<uint32_t>(n_bands, static_cast<uint32_t>(plane_bytes))));
    tags.push_back(shorts(kTagPlanarConfig, {2}));
    if (opts.color_table) {
        std::vector<uint16_t> cmap(3 * 256, 0);
        for (size_t i = 0; i < opts.color_table->size() && i < 256; ++i) {
            cmap[i] = static_cast<uint16_t>((*opts.color_table)[i].r * 257);
            cmap[256 + i] = static_cast<uint16_t>((*opts.color_table)[i].g * 257);
            cmap[512 + i] = static_cast<uint16_t>((*opts.color_table)[i].b * 257);
        }
        tags.push_back(shorts(kTagColorMap, cmap));
    }
    tags.push_back(shorts(kTagSampleFormat, std::vector<uint16_t>(n_bands, lay.format)));
    tags.push_back(doubles(kTagModelPixelScale,
                           {ref.transform.pixel_width, std::abs(ref.transform.pixel_height), 0.0}));
    tags.push_back(doubles(kTagModelTiepoint,
                           {0.0, 0.0, 0.0, ref.transform.origin_x, ref.transform.origin_y, 0.0}));
    tags.push_back(shorts(kTagGeoKeyDirectory, geokeys));
    tags.push_back(ascii(kTagGeoAsciiParams, geo_ascii));
    if (ref.nodata) tags.push_back(ascii(kTagGdalNodata, format_nodata(*ref.nodata)));

    std::sort(tags.begin(), tags.end(),
              [](const TagEntry& a, const TagEntry& b) { return a.tag < b.tag; });

    // Layout: header | band data | IFD | external payloads
    const uint32_t data_off = 8;
    uint32_t ifd_off = static_cast<uint32_t>(data_off + data.size());
    if (ifd_off % 2) ++ifd_off;
    const uint32_t ifd_bytes = 2 + static_cast<uint32_t>(tags.size()) * 12 + 4;
    uint32_t ext_off = ifd_off + ifd_bytes;

    // Patch strip offsets now that layout is known.
    for (size_t b = 0; b < n_bands; ++b) {
        uint32_t off = data_off + static_cast<uint32_t>(b * plane_bytes);
        for (auto& t : tags)
            if (t.tag == kTagStripOffsets)
                std::memcpy(t.payload.data() + 4 * b, &off, 4);
    }

    std::vector<uint8_t> out;
    out.reserve(ext_off + 1024);
    auto put16 = [&](uint16_t v) { out.insert(out.end(), reinterpret_cast<uint8_t*>(&v),
                                              reinterpret_cast<uint8_t*>(&v) + 2); };
    auto put32 = [&](uint32_t v) { out.insert(out.end(), reinterpret_cast<uint8_t*>(&v),
                                              reinterpret_cast<uint8_t*>(&v) + 4); };

    out.push_back('I');
    out.push_back('I');
    put16(42);
    put32(ifd_off);
    out.insert(out.end(), data.begin(), data.end());
    while (out.size() < ifd_off) out.push_back(0);

    std::vector<uint8_t> ext;
    put16(static_cast<uint16_t>(tags.size()));
    for (const auto& t : tags) {
        put16(t.tag);
        put16(t.type);
        put32(t.count);
        if (t.payload.size() <= 4) {
            uint8_t v[4] = {0, 0, 0, 0};
            std::memcpy(v, t.payload.data(), t.payload.size());
            out.insert(out.end(), v, v + 4);
        } else {
            uint32_t off = ext_off + static_cast<uint32_t>(ext.size());
            put32(off);
            ext.insert(ext.end(), t.payload.begin(), t.payload.end());
            if (ext.size() % 2) ext.push_back(0);
        }
    }
    put32(0); // no next IFD
    out.insert(out.end(), ext.begin(), ext.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("write_geotiff: cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write_geotiff: short write to '" + path + "'");
}

void write_geotiff(const std::string& path, const RasterGrid& grid,
                   const GeoTiffWriteOptions& opts) {
    write_geotiff(path, {&grid}, {}, opts);
}

void write_scene_geotiff(const std::string& path, const MultispectralScene& scene,
                         const std::string& qa_band_name, const GeoTiffWriteOptions& opts) {
    scene.validate();
    std::vector<const RasterGrid*> bands;
    std::vector<std::string> names = scene.band_names;
    for (const auto& b : scene.bands) bands.push_back(&b);
    if (scene.qa) {
        bands.push_back(&*scene.qa);
        names.push_back(qa_band_name);
    }
    GeoTiffWriteOptions o = opts;
    json meta = o.metadata_json.empty() ? json::object() : json::parse(o.metadata_json);
    meta["id"] = scene.id;
    meta["year"] = scene.year;
    meta["month"] = scene.month;
    o.metadata_json = meta.dump();
    write_geotiff(path, bands, names, o);
}

namespace {

struct RawEntry {
    uint16_t type = 0;
    uint32_t count = 0;
    std::vector<uint8_t> payload;
};

class TiffParser {
public:
    explicit TiffParser(const std::string& path) : path_(path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("read_geotiff: cannot open '" + path + "'");
        buf_.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
        if (buf_.size() < 8) throw IoError("read_geotiff: '" + path + "' is not a TIFF (too short)");
        if (buf_[0] == 'M' && buf_[1] == 'M')
            throw IoError("read_geotiff: '" + path + "' is big-endian; only little-endian TIFFs are supported");
        if (buf_[0] != 'I' || buf_[1] != 'I' || rd16(2) != 42)
            throw IoError("read_geotiff: '" + path + "' is not a TIFF");
        uint32_t ifd = rd32(4);
        parse_ifd(ifd);
    }

    const std::map<uint16_t, RawEntry>& entries() const { return entries_; }

    uint16_t rd16(size_t off) const {
        check(off, 2);
        uint16_t v;
        std::memcpy(&v, buf_.data() + off, 2);
        return v;
    }
    uint32_t rd32(size_t off) const {
        check(off, 4);
        uint32_t v;
        std::memcpy(&v, buf_.data() + off, 4);
        return v;
    }

    std::vector<uint64_t> get_uints(uint16_t tag) const {
        auto it = entries_.find(tag);
        if (it == entries_.end()) return {};
        const RawEntry& e = it->second;
        std::vector<uint64_t> out(e.count);
        for (uint32_t i = 0; i < e.count; ++i) {
            switch (e.type) {
                case kTypeByte: out[i] = e.payload[i]; break;
                case kTypeShort: {
                    uint16_t v;
                    std::memcpy(&v, e.payload.data() + 2 * i, 2);
                    out[i] = v;
                    break;
                }
                case kTypeLong: {
                    uint32_t v;
                    std::memcpy(&v, e.payload.data() + 4 * i, 4);
                    out[i] = v;
                    break;
                }
                default:
                    throw IoError("read_geotiff: unexpected type for tag " + std::to_string(tag));
            }
        }
        return out;
    }

    std::vector<double> get_doubles(uint16_t tag) const {
        auto it = entries_.find(tag);
        if (it == entries_.end()) return {};
        const RawEntry& e = it->second;
        if (e.type != kTypeDouble)
            throw IoError("read_geotiff: tag " + std::to_string(tag) + " is not DOUBLE");
        std::vector<double> out(e.count);
        std::memcpy(out.data(), e.payload.data(), e.count * 8);
        return out;
    }

    std::string get_ascii(uint16_t tag) const {
        auto it = entries_.find(tag);
        if (it == entries_.end()) return {};
        const RawEntry& e = it->second;
        std::string s(e.payload.begin(), e.payload.end());
        while (!s.empty() && s.back() == '\0') s.pop_back();
        return s;
    }

    const uint8_t* at(size_t off, size_t len) const {
        check(off, len);
        return buf_.data() + off;
    }

private:
    void parse_ifd(uint32_t off) {
        uint16_t n = rd16(off);
        for (uint16_t i = 0; i < n; ++i) {
            size_t e = off + 2 + static_cast<size_t>(i) * 12;
            uint16_t tag = rd16(e);
            uint16_t type = rd16(e + 2);
            uint32_t count = rd32(e + 4);
            size_t sz = type_size(type) * count;
            RawEntry entry{type, count, {}};
            if (sz == 0) continue; // unknown type; skip
            if (sz <= 4) {
                entry.payload.assign(buf_.data() + e + 8, buf_.data() + e + 8 + sz);
            } else {
                uint32_t voff = rd32(e + 8);
                check(voff, sz);
                entry.payload.assign(buf_.data() + voff, buf_.data() + voff + sz);
            }
            entries_[tag] = std::move(entry);
        }
    }

    void check(size_t off, size_t len) const {
        if (off + len > buf_.size())
            throw IoError("read_geotiff: '" + path_ + "' is truncated");
    }

    std::string path_;
    std::vector<uint8_t> buf_;
    std::map<uint16_t, RawEntry> entries_;
};

double read_sample(const uint8_t* p, uint16_t bits, uint16_t format) {
    if (format == 3) {
        if (bits == 32) {
            float v;
            std::memcpy(&v, p, 4);
            return v;
        }
        double v;
        std::memcpy(&v, p, 8);
        return v;
    }
    if (format == 2) {
        if (bits == 16) {
            int16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        int32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    switch (bits) {
        case 8: return *p;
        case 16: {
            uint16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        default: {
            uint32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
    }
}

} // namespace

GeoTiffFile read_geotiff(const std::string& path) {
    TiffParser tp(path);

    if (tp.entries().count(kTagTileWidth))
        throw IoError("read_geotiff: '" + path + "' is tiled; only striped TIFFs are supported");
    auto comp = tp.get_uints(kTagCompression);
    if (!comp.empty() && comp[0] != 1)
        throw IoError("read_geotiff: '" + path + "' is compressed (code " +
                      std::to_string(comp[0]) + "); only uncompressed TIFFs are supported");

    auto wv = tp.get_uints(kTagImageWidth);
    auto hv = tp.get_uints(kTagImageLength);
    if (wv.empty() || hv.empty()) throw IoError("read_geotiff: '" + path + "' missing dimensions");
    const int width = static_cast<int>(wv[0]);
    const int height = static_cast<int>(hv[0]);

    auto spp_v = tp.get_uints(kTagSamplesPerPixel);
    const int n_bands = spp_v.empty() ? 1 : static_cast<int>(spp_v[0]);
    auto bits_v = tp.get_uints(kTagBitsPerSample);
    const uint16_t bits = bits_v.empty() ? 8 : static_cast<uint16_t>(bits_v[0]);
    auto fmt_v = tp.get_uints(kTagSampleFormat);
    const uint16_t format = fmt_v.empty() ? 1 : static_cast<uint16_t>(fmt_v[0]);
    if (!(format == 1 || format == 2 || format == 3) || (bits != 8 && bits != 16 && bits != 32 && bits != 64))
        throw IoError("read_geotiff: unsupported sample layout in '" + path + "'");
    if ((format == 3 && bits < 32) || (format != 3 && bits == 64))
        throw IoError("read_geotiff: unsupported sample layout in '" + path + "'");
    const size_t bytes_per = bits / 8;

    auto planar_v = tp.get_uints(kTagPlanarConfig);
    const int planar = planar_v.empty() ? 1 : static_cast<int>(planar_v[0]);
    auto rps_v = tp.get_uints(kTagRowsPerStrip);
    const long rows_per_strip = rps_v.empty() ? height : static_cast<long>(rps_v[0]);
    auto offsets = tp.get_uints(kTagStripOffsets);
    auto counts = tp.get_uints(kTagStripByteCounts);
    if (offsets.empty()) throw IoError("read_geotiff: '" + path + "' has no strip offsets");
    const long strips_per_plane = (height + rows_per_strip - 1) / rows_per_strip;

    // Georeferencing
    GeoTransform t;
    auto scale = tp.get_doubles(kTagModelPixelScale);
    auto tie = tp.get_doubles(kTagModelTiepoint);
    if (scale.size() >= 2 && tie.size() >= 6) {
        t.pixel_width = scale[0];
        t.pixel_height = -scale[1];
        // tiepoint: raster (i,j,k) -> model (x,y,z); our writer uses (0,0).
        t.origin_x = tie[3] - tie[0] * t.pixel_width;
        t.origin_y = tie[4] - tie[1] * t.pixel_height;
    }
    // CRS from geokeys
    auto gk = tp.get_uints(kTagGeoKeyDirectory);
    std::string geo_ascii = tp.get_ascii(kTagGeoAsciiParams);
    if (gk.size() >= 4) {
        size_t nk = gk[3];
        std::string citation;
        uint16_t epsg = 0;
        for (size_t k = 0; k < nk && 4 + 4 * k + 3 < gk.size(); ++k) {
            uint16_t key = static_cast<uint16_t>(gk[4 + 4 * k]);
            uint16_t loc = static_cast<uint16_t>(gk[4 + 4 * k + 1]);
            uint16_t cnt = static_cast<uint16_t>(gk[4 + 4 * k + 2]);
            uint16_t val = static_cast<uint16_t>(gk[4 + 4 * k + 3]);
            if ((key == 3072 || key == 2048) && loc == 0) epsg = val;
            if (key == 1026 && loc == kTagGeoAsciiParams && val + cnt <= geo_ascii.size())
                citation = geo_ascii.substr(val, cnt);
        }
        while (!citation.empty() && (citation.back() == '|' || citation.back() == '\0'))
            citation.pop_back();
        if (epsg != 0)
            t.crs_id = "EPSG:" + std::to_string(epsg);
        else if (!citation.empty())
            t.crs_id = citation;
    }

    // Nodata
    std::optional<double> nodata;
    std::string nd_s = tp.get_ascii(kTagGdalNodata);
    if (!nd_s.empty()) {
        try {
            nodata = std::stod(nd_s);
        } catch (...) {
        }
    }

    GeoTiffFile out;
    out.metadata_json = tp.get_ascii(kTagImageDescription);
    for (int b = 0; b < n_bands; ++b) {
        RasterGrid g(width, height, 0.0, nodata);
        g.transform = t;
        out.bands.push_back(std::move(g));
    }

    // Decode strips.
    auto byte_count = [&](size_t i) -> size_t {
        if (i < counts.size()) return static_cast<size_t>(counts[i]);
        // Fall back to the nominal strip size for writers that omit counts.
        long rows = std::min<long>(rows_per_strip, height);
        return static_cast<size_t>(rows) * width * bytes_per * (planar == 1 ? n_bands : 1);
    };

    if (planar == 2) {
        for (int b = 0; b < n_bands; ++b) {
            for (long s = 0; s < strips_per_plane; ++s) {
                size_t idx = static_cast<size_t>(b) * strips_per_plane + s;
                if (idx >= offsets.size()) throw IoError("read_geotiff: missing strips in '" + path + "'");
                long row0 = s * rows_per_strip;
                long nrows = std::min<long>(rows_per_strip, height - row0);
                const uint8_t* p = tp.at(offsets[idx], byte_count(idx));
                for (long r = 0; r < nrows; ++r)
                    for (int c = 0; c < width; ++c)
                        out.bands[b].at(static_cast<int>(row0 + r), c) =
                            read_sample(p + (static_cast<size_t>(r) * width + c) * bytes_per, bits, format);
            }
        }
    } else {
        for (long s = 0; s < strips_per_plane; ++s) {
            if (static_cast<size_t>(s) >= offsets.size())
                throw IoError("read_geotiff: missing strips in '" + path + "'");
            long row0 = s * rows_per_strip;
            long nrows = std::min<long>(rows_per_strip, height - row0);
            const uint8_t* p = tp.at(offsets[static_cast<size_t>(s)], byte_count(static_cast<size_t>(s)));
            for (long r = 0; r < nrows; ++r)
                for (int c = 0; c < width; ++c)
                    for (int b = 0; b < n_bands; ++b)
                        out.bands[b].at(static_cast<int>(row0 + r), c) = read_sample(
                            p + ((static_cast<size_t>(r) * width + c) * n_bands + b) * bytes_per,
                            bits, format);
        }
    }

    // Band names from metadata
    if (!out.metadata_json.empty() && out.metadata_json.front() == '{') {
        auto meta = json::parse(out.metadata_json, nullptr, false);
        if (!meta.is_discarded() && meta.contains("band_names") && meta["band_names"].is_array()) {
            for (const auto& n : meta["band_names"]) out.band_names.push_back(n.get<std::string>());
        }
    }
    if (out.band_names.size() != static_cast<size_t>(n_bands)) {
        out.band_names.clear();
        for (int b = 0; b < n_bands; ++b) out.band_names.push_back("band_" + std::to_string(b + 1));
    }

    // Palette
    auto cmap = tp.get_uints(kTagColorMap);
    if (!cmap.empty() && cmap.size() % 3 == 0) {
        size_t n = cmap.size() / 3;
        std::vector<ColorEntry> ct(n);
        for (size_t i = 0; i < n; ++i) {
            ct[i].r = static_cast<uint8_t>(cmap[i] / 257);
            ct[i].g = static_cast<uint8_t>(cmap[n + i] / 257);
            ct[i].b = static_cast<uint8_t>(cmap[2 * n + i] / 257);
        }
        out.color_table = std::move(ct);
    }

    return out;
}

MultispectralScene read_scene_geotiff(const std::string& path, const std::string& qa_band_name) {
    GeoTiffFile f = read_geotiff(path);
    MultispectralScene scene;
    if (!f.metadata_json.empty() && f.metadata_json.front() == '{') {
        auto meta = json::parse(f.metadata_json, nullptr, false);
        if (!meta.is_discarded()) {
            scene.id = meta.value("id", std::string{});
            scene.year = meta.value("year", 0);
            scene.month = meta.value("month", 0);
        }
    }
    if (scene.id.empty()) scene.id = path;
    for (size_t i = 0; i < f.bands.size(); ++i) {
        if (!qa_band_name.empty() && f.band_names[i] == qa_band_name) {
            scene.qa = std::move(f.bands[i]);
        } else {
            scene.band_names.push_back(f.band_names[i]);
            scene.bands.push_back(std::move(f.bands[i]));
        }
    }
    scene.validate();
    return scene;
}

} // namespace mangrove
