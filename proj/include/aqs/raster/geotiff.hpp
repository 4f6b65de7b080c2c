#pragma once

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/raster/errors.hpp"
#include "aqs/raster/layer.hpp"

namespace aqs::raster {

// Single-band GeoTIFF reader/writer for geographic (lon/lat) rasters.
//
// Reads classic (non-Big) TIFF in either byte order, striped or tiled, with
// no compression, LZW, Deflate or PackBits, horizontal or floating-point
// predictors, and 8/16/32/64-bit integer or float samples. Georeferencing
// comes from ModelPixelScale+ModelTiepoint or ModelTransformation; nodata
// from the GDAL_NODATA tag.
namespace geotiff {

namespace tag {
inline constexpr std::uint16_t kImageWidth = 256;
inline constexpr std::uint16_t kImageLength = 257;
inline constexpr std::uint16_t kBitsPerSample = 258;
inline constexpr std::uint16_t kCompression = 259;
inline constexpr std::uint16_t kPhotometric = 262;
inline constexpr std::uint16_t kStripOffsets = 273;
inline constexpr std::uint16_t kSamplesPerPixel = 277;
inline constexpr std::uint16_t kRowsPerStrip = 278;
inline constexpr std::uint16_t kStripByteCounts = 279;
inline constexpr std::uint16_t kPlanarConfig = 284;
inline constexpr std::uint16_t kPredictor = 317;
inline constexpr std::uint16_t kTileWidth = 322;
inline constexpr std::uint16_t kTileLength = 323;
inline constexpr std::uint16_t kTileOffsets = 324;
inline constexpr std::uint16_t kTileByteCounts = 325;
inline constexpr std::uint16_t kSampleFormat = 339;
inline constexpr std::uint16_t kModelPixelScale = 33550;
inline constexpr std::uint16_t kModelTiepoint = 33922;
inline constexpr std::uint16_t kModelTransformation = 34264;
inline constexpr std::uint16_t kGeoKeyDirectory = 34735;
inline constexpr std::uint16_t kGdalNodata = 42113;
}  // namespace tag

enum class Compression : std::uint16_t { none = 1, lzw = 5, deflate = 8, packbits = 32773 };

struct WriteOptions {
  bool tiled = false;
  std::uint32_t tile_size = 256;  // multiple of 16
  Compression compression = Compression::none;
};

namespace detail {

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::uint32_t entry_pos = 0;     // file position of the 4-byte value field
};

inline std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class Reader {
 public:
  Reader(std::string bytes, std::string source) : data_(std::move(bytes)), source_(std::move(source)) {
    if (data_.size() < 8) fail("file too short for a TIFF header");
    if (data_[0] == 'I' && data_[1] == 'I') {
      swap_ = std::endian::native != std::endian::little;
    } else if (data_[0] == 'M' && data_[1] == 'M') {
      swap_ = std::endian::native != std::endian::big;
    } else {
      fail("not a TIFF file (bad byte-order mark)");
    }
    const auto magic = u16(2);
    if (magic == 43) fail("BigTIFF is not supported");
    if (magic != 42) fail("not a TIFF file (bad magic number)");
    const auto ifd = u32(4);
    need(ifd, 2);
    const auto n = u16(ifd);
    need(ifd + 2, std::size_t{n} * 12);
    for (std::uint16_t i = 0; i < n; ++i) {
      const std::uint32_t pos = ifd + 2 + 12u * i;
      Entry e;
      e.type = u16(pos + 2);
      e.count = u32(pos + 4);
      e.entry_pos = pos + 8;
      entries_[u16(pos)] = e;
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw RasterReadError(source_, what); }

  void need(std::size_t pos, std::size_t len) const {
    if (pos > data_.size() || len > data_.size() - pos) fail("truncated file (offset beyond end)");
  }

  template <typename T>
  T raw(std::size_t pos) const {
    need(pos, sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos, sizeof(T));
    if (swap_) v = byteswap_value(v);
    return v;
  }
  std::uint16_t u16(std::size_t pos) const { return raw<std::uint16_t>(pos); }
  std::uint32_t u32(std::size_t pos) const { return raw<std::uint32_t>(pos); }

  bool has(std::uint16_t t) const { return entries_.count(t) != 0; }

  // Values of a numeric tag as doubles.
  std::vector<double> numbers(std::uint16_t t) const {
    auto it = entries_.find(t);
    if (it == entries_.end()) return {};
    const Entry& e = it->second;
    const std::size_t sz = type_size(e.type);
    if (sz == 0) fail("tag " + std::to_string(t) + " has unsupported type " + std::to_string(e.type));
    const std::size_t total = sz * e.count;
    const std::size_t base = total <= 4 ? e.entry_pos : u32(e.entry_pos);
    need(base, total);
    std::vector<double> out;
    out.reserve(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
      const std::size_t p = base + i * sz;
      switch (e.type) {
        case 1: case 7: out.push_back(static_cast<unsigned char>(data_[p])); break;
        case 6: out.push_back(static_cast<signed char>(data_[p])); break;
        case 3: out.push_back(u16(p)); break;
        case 8: out.push_back(raw<std::int16_t>(p)); break;
        case 4: out.push_back(u32(p)); break;
        case 9: out.push_back(raw<std::int32_t>(p)); break;
        case 5: out.push_back(static_cast<double>(u32(p)) / u32(p + 4)); break;
        case 10: out.push_back(static_cast<double>(raw<std::int32_t>(p)) / raw<std::int32_t>(p + 4)); break;
        case 11: out.push_back(raw<float>(p)); break;
        case 12: out.push_back(raw<double>(p)); break;
        default: fail("tag " + std::to_string(t) + " is not numeric");
      }
    }
    return out;
  }

  std::optional<double> scalar(std::uint16_t t) const {
    auto v = numbers(t);
    if (v.empty()) return std::nullopt;
    return v.front();
  }

  std::optional<std::string> ascii(std::uint16_t t) const {
    auto it = entries_.find(t);
    if (it == entries_.end()) return std::nullopt;
    const Entry& e = it->second;
    const std::size_t base = e.count <= 4 ? e.entry_pos : u32(e.entry_pos);
    need(base, e.count);
    std::string s(data_.data() + base, e.count);
    while (!s.empty() && s.back() == '\0') s.pop_back();
    return s;
  }

  std::span<const unsigned char> bytes(std::size_t pos, std::size_t len) const {
    need(pos, len);
    return {reinterpret_cast<const unsigned char*>(data_.data()) + pos, len};
  }

  bool swap() const { return swap_; }
  const std::string& source() const { return source_; }

 private:
  template <typename T>
  static T byteswap_value(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }

  std::string data_;
  std::string source_;
  bool swap_ = false;
  std::map<std::uint16_t, Entry> entries_;
};

// TIFF LZW (MSB-first codes, early change).
inline std::vector<unsigned char> lzw_decode(std::span<const unsigned char> in, std::size_t expected,
                                             const Reader& r) {
  constexpr int kClear = 256;
  constexpr int kEoi = 257;
  std::vector<std::vector<unsigned char>> table;
  const auto reset = [&] {
    table.assign(258, {});
    for (int i = 0; i < 256; ++i) table[i] = {static_cast<unsigned char>(i)};
  };
  reset();
  std::vector<unsigned char> out;
  out.reserve(expected);
  std::size_t bitpos = 0;
  int width = 9;
  const auto next_code = [&]() -> int {
    if (bitpos + width > in.size() * 8) return kEoi;
    int code = 0;
    for (int i = 0; i < width; ++i) {
      const std::size_t b = bitpos + i;
      code = (code << 1) | ((in[b >> 3] >> (7 - (b & 7))) & 1);
    }
    bitpos += width;
    return code;
  };
  int prev = -1;
  for (;;) {
    const int code = next_code();
    if (code == kEoi) break;
    if (code == kClear) {
      reset();
      width = 9;
      prev = -1;
      continue;
    }
    std::vector<unsigned char> entry;
    if (code < static_cast<int>(table.size())) {
      entry = table[code];
      if (prev >= 0) {
        auto added = table[prev];
        added.push_back(entry.front());
        table.push_back(std::move(added));
      }
    } else if (code == static_cast<int>(table.size()) && prev >= 0) {
      entry = table[prev];
      entry.push_back(entry.front());
      table.push_back(entry);
    } else {
      r.fail("corrupt LZW stream");
    }
    out.insert(out.end(), entry.begin(), entry.end());
    prev = code;
    const auto next = table.size() + 1;  // early change
    if (next >= 4096) width = 12;
    else if (next >= 2048) width = 12;
    else if (next >= 1024) width = 11;
    else if (next >= 512) width = 10;
  }
  return out;
}

inline std::vector<unsigned char> packbits_decode(std::span<const unsigned char> in) {
  std::vector<unsigned char> out;
  std::size_t i = 0;
  while (i < in.size()) {
    const auto n = static_cast<signed char>(in[i++]);
    if (n >= 0) {
      const std::size_t len = static_cast<std::size_t>(n) + 1;
      const std::size_t take = std::min(len, in.size() - i);
      out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(i),
                 in.begin() + static_cast<std::ptrdiff_t>(i + take));
      i += take;
    } else if (n != -128) {
      if (i >= in.size()) break;
      out.insert(out.end(), static_cast<std::size_t>(1 - n), in[i++]);
    }
  }
  return out;
}

inline std::vector<unsigned char> inflate(std::span<const unsigned char> in, std::size_t expected,
                                          const Reader& r) {
  std::vector<unsigned char> out(expected);
  uLongf out_len = static_cast<uLongf>(expected);
  const int rc = ::uncompress(out.data(), &out_len, in.data(), static_cast<uLong>(in.size()));
  if (rc != Z_OK && rc != Z_BUF_ERROR) r.fail("corrupt Deflate stream");
  out.resize(out_len);
  return out;
}

inline std::vector<unsigned char> deflate(std::span<const unsigned char> in) {
  uLongf out_len = ::compressBound(static_cast<uLong>(in.size()));
  std::vector<unsigned char> out(out_len);
  if (::compress2(out.data(), &out_len, in.data(), static_cast<uLong>(in.size()), 6) != Z_OK)
    throw Error("zlib compression failed");
  out.resize(out_len);
  return out;
}

struct SampleLayout {
  unsigned bits = 0;
  unsigned format = 1;  // 1 uint, 2 int, 3 float
  std::size_t bytes() const { return bits / 8; }
};

// Reverses predictor 2 or 3 on one decoded chunk (rows of `width` samples).
inline void undo_predictor(std::vector<unsigned char>& buf, unsigned predictor, std::size_t width,
                           std::size_t rows, const SampleLayout& s, bool swap, const Reader& r) {
  const std::size_t bps = s.bytes();
  const std::size_t row_bytes = width * bps;
  if (predictor == 2) {
    for (std::size_t row = 0; row < rows; ++row) {
      unsigned char* p = buf.data() + row * row_bytes;
      const auto acc = [&]<typename T>(T) {
        for (std::size_t i = 1; i < width; ++i) {
          T prev, cur;
          std::memcpy(&prev, p + (i - 1) * sizeof(T), sizeof(T));
          std::memcpy(&cur, p + i * sizeof(T), sizeof(T));
          if (swap) {
            std::reverse(reinterpret_cast<unsigned char*>(&prev), reinterpret_cast<unsigned char*>(&prev) + sizeof(T));
            std::reverse(reinterpret_cast<unsigned char*>(&cur), reinterpret_cast<unsigned char*>(&cur) + sizeof(T));
          }
          cur = static_cast<T>(cur + prev);
          if (swap) std::reverse(reinterpret_cast<unsigned char*>(&cur), reinterpret_cast<unsigned char*>(&cur) + sizeof(T));
          std::memcpy(p + i * sizeof(T), &cur, sizeof(T));
        }
      };
      switch (bps) {
        case 1: acc(std::uint8_t{}); break;
        case 2: acc(std::uint16_t{}); break;
        case 4: acc(std::uint32_t{}); break;
        case 8: acc(std::uint64_t{}); break;
        default: r.fail("unsupported sample size for horizontal predictor");
      }
    }
  } else if (predictor == 3) {
    if (s.format != 3) r.fail("floating-point predictor on non-float samples");
    std::vector<unsigned char> tmp(row_bytes);
    for (std::size_t row = 0; row < rows; ++row) {
      unsigned char* p = buf.data() + row * row_bytes;
      for (std::size_t i = 1; i < row_bytes; ++i) p[i] = static_cast<unsigned char>(p[i] + p[i - 1]);
      // Byte planes are stored most significant first; rebuild file-order
      // samples so the generic decoder applies its byte swap.
      const bool file_little = swap == (std::endian::native == std::endian::big);
      for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t b = 0; b < bps; ++b) {
          const unsigned char byte = p[b * width + i];  // b = 0 is the MSB
          const std::size_t dst = file_little ? (bps - 1 - b) : b;
          tmp[i * bps + dst] = byte;
        }
      }
      std::memcpy(p, tmp.data(), row_bytes);
    }
  } else if (predictor != 1) {
    r.fail("unsupported Predictor " + std::to_string(predictor));
  }
}

inline double decode_sample(const unsigned char* p, const SampleLayout& s, bool swap) {
  unsigned char b[8];
  std::memcpy(b, p, s.bytes());
  if (swap) std::reverse(b, b + s.bytes());
  const auto as = [&]<typename T>(T) {
    T v;
    std::memcpy(&v, b, sizeof(T));
    return static_cast<double>(v);
  };
  switch (s.format) {
    case 1:
      switch (s.bits) {
        case 8: return as(std::uint8_t{});
        case 16: return as(std::uint16_t{});
        case 32: return as(std::uint32_t{});
        case 64: return as(std::uint64_t{});
      }
      break;
    case 2:
      switch (s.bits) {
        case 8: return as(std::int8_t{});
        case 16: return as(std::int16_t{});
        case 32: return as(std::int32_t{});
        case 64: return as(std::int64_t{});
      }
      break;
    case 3:
      if (s.bits == 32) return as(float{});
      if (s.bits == 64) return as(double{});
      break;
  }
  return kMissing;
}

}  // namespace detail

inline RasterLayer parse(std::string bytes, const std::string& source, Variable variable, Temporal temporal) {
  using namespace detail;
  Reader r(std::move(bytes), source);

  const auto width = r.scalar(tag::kImageWidth);
  const auto height = r.scalar(tag::kImageLength);
  if (!width || !height || *width < 1 || *height < 1) r.fail("missing or invalid ImageWidth/ImageLength");
  const auto cols = static_cast<std::size_t>(*width);
  const auto rows = static_cast<std::size_t>(*height);

  const auto spp = static_cast<unsigned>(r.scalar(tag::kSamplesPerPixel).value_or(1));
  if (spp != 1) throw UnsupportedBandCount(source, spp);
  if (r.scalar(tag::kPhotometric).value_or(1) == 3) r.fail("palette-color rasters are not supported");

  SampleLayout sample;
  sample.bits = static_cast<unsigned>(r.scalar(tag::kBitsPerSample).value_or(1));
  sample.format = static_cast<unsigned>(r.scalar(tag::kSampleFormat).value_or(1));
  if (sample.bits != 8 && sample.bits != 16 && sample.bits != 32 && sample.bits != 64)
    r.fail("unsupported BitsPerSample " + std::to_string(sample.bits));
  if (sample.format < 1 || sample.format > 3 || (sample.format == 3 && sample.bits < 32))
    r.fail("unsupported SampleFormat " + std::to_string(sample.format));
  const auto compression = static_cast<unsigned>(r.scalar(tag::kCompression).value_or(1));
  const auto predictor = static_cast<unsigned>(r.scalar(tag::kPredictor).value_or(1));

  // Georeferencing.
  double west = 0.0, north = 0.0, sx = 0.0, sy = 0.0;
  const auto scale = r.numbers(tag::kModelPixelScale);
  const auto tie = r.numbers(tag::kModelTiepoint);
  const auto xform = r.numbers(tag::kModelTransformation);
  if (scale.size() >= 2 && tie.size() >= 6) {
    sx = scale[0];
    sy = scale[1];
    west = tie[3] - tie[0] * sx;
    north = tie[4] + tie[1] * sy;
  } else if (xform.size() >= 16) {
    if (xform[1] != 0.0 || xform[4] != 0.0) r.fail("rotated ModelTransformation is not supported");
    sx = xform[0];
    sy = -xform[5];
    west = xform[3];
    north = xform[7];
  } else if (!scale.empty() || !tie.empty()) {
    throw MissingGeoreference(source, scale.empty() ? "ModelPixelScaleTag" : "ModelTiepointTag");
  } else {
    throw MissingGeoreference(source, "ModelPixelScaleTag/ModelTiepointTag");
  }
  if (!(sx > 0.0) || !(sy > 0.0)) r.fail("non-positive pixel scale");

  // GeoKey directory: reject projected CRSs, honour PixelIsPoint.
  const auto keys = r.numbers(tag::kGeoKeyDirectory);
  if (keys.size() >= 4) {
    const auto n = static_cast<std::size_t>(keys[3]);
    for (std::size_t k = 0; k < n && 4 + 4 * k + 3 < keys.size(); ++k) {
      const auto id = static_cast<int>(keys[4 + 4 * k]);
      const auto loc = static_cast<int>(keys[4 + 4 * k + 1]);
      const double val = keys[4 + 4 * k + 3];
      if (loc != 0) continue;
      if (id == 1024 && val == 1) r.fail("projected coordinate systems are not supported");
      if (id == 1025 && val == 2) {
        west -= 0.5 * sx;
        north += 0.5 * sy;
      }
    }
  }

  std::optional<double> nodata;
  if (auto s = r.ascii(tag::kGdalNodata)) {
    const auto t = text::lower(text::trim(*s));
    if (t == "nan") nodata = kMissing;
    else if (auto v = text::parse_double(t)) nodata = *v;
  }

  // Pixel data: strips or tiles.
  const bool tiled = r.has(tag::kTileWidth);
  std::size_t chunk_w = cols;
  std::size_t chunk_h = 0;
  std::vector<double> offsets, counts;
  if (tiled) {
    chunk_w = static_cast<std::size_t>(r.scalar(tag::kTileWidth).value_or(0));
    chunk_h = static_cast<std::size_t>(r.scalar(tag::kTileLength).value_or(0));
    offsets = r.numbers(tag::kTileOffsets);
    counts = r.numbers(tag::kTileByteCounts);
  } else {
    chunk_h = static_cast<std::size_t>(r.scalar(tag::kRowsPerStrip).value_or(static_cast<double>(rows)));
    chunk_h = std::min(chunk_h, rows);
    offsets = r.numbers(tag::kStripOffsets);
    counts = r.numbers(tag::kStripByteCounts);
  }
  if (chunk_w == 0 || chunk_h == 0) r.fail("invalid strip/tile dimensions");
  const std::size_t across = (cols + chunk_w - 1) / chunk_w;
  const std::size_t down = (rows + chunk_h - 1) / chunk_h;
  if (offsets.size() < across * down) r.fail("missing strip/tile offsets");
  if (counts.size() < offsets.size()) r.fail("missing strip/tile byte counts");

  const std::size_t bps = sample.bytes();
  std::vector<double> values(rows * cols, kMissing);
  for (std::size_t cy = 0; cy < down; ++cy) {
    for (std::size_t cx = 0; cx < across; ++cx) {
      const std::size_t k = cy * across + cx;
      const std::size_t chunk_rows = tiled ? chunk_h : std::min(chunk_h, rows - cy * chunk_h);
      const std::size_t expected = chunk_rows * chunk_w * bps;
      auto in = r.bytes(static_cast<std::size_t>(offsets[k]), static_cast<std::size_t>(counts[k]));
      std::vector<unsigned char> buf;
      switch (compression) {
        case 1: buf.assign(in.begin(), in.end()); break;
        case 5: buf = lzw_decode(in, expected, r); break;
        case 8:
        case 32946: buf = inflate(in, expected, r); break;
        case 32773: buf = packbits_decode(in); break;
        default: r.fail("unsupported Compression " + std::to_string(compression));
      }
      if (buf.size() < expected) r.fail("strip/tile " + std::to_string(k) + " decodes short");
      undo_predictor(buf, predictor, chunk_w, chunk_rows, sample, r.swap(), r);
      for (std::size_t y = 0; y < chunk_rows; ++y) {
        const std::size_t row = cy * chunk_h + y;
        if (row >= rows) break;
        for (std::size_t x = 0; x < chunk_w; ++x) {
          const std::size_t col = cx * chunk_w + x;
          if (col >= cols) break;
          double v = decode_sample(buf.data() + (y * chunk_w + x) * bps, sample, r.swap());
          if (nodata && (v == *nodata || (std::isnan(*nodata) && std::isnan(v)))) v = kMissing;
          values[row * cols + col] = v;
        }
      }
    }
  }

  GridSpec grid;
  grid.bounds = GeoBounds{west, west + sx * static_cast<double>(cols), north - sy * static_cast<double>(rows), north};
  grid.cell_size_m = sy * kMetersPerDegreeLat;
  grid.rows = rows;
  grid.cols = cols;
  return RasterLayer(variable, temporal, grid, std::move(values),
                     nodata && !std::isnan(*nodata) ? *nodata : -9999.0);
}

inline RasterLayer read(const std::filesystem::path& path, Variable variable, Temporal temporal) {
  std::string bytes;
  try {
    bytes = files::read_text(path);
  } catch (const DataError&) {
    throw RasterReadError(path.string(), "cannot open file");
  }
  return parse(std::move(bytes), path.string(), variable, temporal);
}

// Little-endian float64 GeoTIFF with WGS84 geographic GeoKeys.
inline std::string format(const RasterLayer& layer, const WriteOptions& opt = {}) {
  using detail::deflate;
  if (opt.compression != Compression::none && opt.compression != Compression::deflate)
    throw UsageError("GeoTIFF writer supports only no compression or Deflate");
  if (opt.tiled && (opt.tile_size == 0 || opt.tile_size % 16 != 0))
    throw UsageError("tile size must be a positive multiple of 16");
  const auto& g = layer.grid;
  const std::size_t rows = g.rows, cols = g.cols;

  std::string out;
  const auto put = [&](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  const auto put16 = [&](std::uint16_t v) { unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)}; put(b, 2); };
  const auto put32 = [&](std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put(b, 4);
  };
  const auto pad = [&] { if (out.size() % 2) out.push_back('\0'); };

  out = "II";
  put16(42);
  put32(0);  // IFD offset, patched below

  // Pixel chunks.
  const std::size_t chunk_w = opt.tiled ? opt.tile_size : cols;
  const std::size_t chunk_h = opt.tiled ? opt.tile_size : std::max<std::size_t>(1, std::min<std::size_t>(rows, 8192 / (cols * 8) + 1));
  const std::size_t across = (cols + chunk_w - 1) / chunk_w;
  const std::size_t down = (rows + chunk_h - 1) / chunk_h;
  std::vector<std::uint32_t> offsets, counts;
  for (std::size_t cy = 0; cy < down; ++cy) {
    for (std::size_t cx = 0; cx < across; ++cx) {
      const std::size_t chunk_rows = opt.tiled ? chunk_h : std::min(chunk_h, rows - cy * chunk_h);
      std::vector<unsigned char> raw;
      raw.reserve(chunk_rows * chunk_w * 8);
      for (std::size_t y = 0; y < chunk_rows; ++y) {
        for (std::size_t x = 0; x < chunk_w; ++x) {
          const std::size_t row = cy * chunk_h + y, col = cx * chunk_w + x;
          double v = layer.nodata;
          if (row < rows && col < cols) {
            v = layer.at(row, col);
            if (is_missing(v)) v = layer.nodata;
          }
          const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
          for (int i = 0; i < 8; ++i) raw.push_back(static_cast<unsigned char>(u >> (8 * i)));
        }
      }
      if (opt.compression == Compression::deflate) raw = deflate(raw);
      pad();
      offsets.push_back(static_cast<std::uint32_t>(out.size()));
      counts.push_back(static_cast<std::uint32_t>(raw.size()));
      put(raw.data(), raw.size());
    }
  }

  // Out-of-line tag payloads.
  struct Tag {
    std::uint16_t id, type;
    std::uint32_t count;
    std::uint32_t inline_value;
    std::string payload;  // non-empty => written out of line
  };
  std::vector<Tag> tags;
  const auto longs = [](const std::vector<std::uint32_t>& v) {
    std::string s;
    for (auto x : v)
      for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(x >> (8 * i)));
    return s;
  };
  const auto doubles = [](std::initializer_list<double> v) {
    std::string s;
    for (double d : v) {
      const std::uint64_t u = std::bit_cast<std::uint64_t>(d);
      for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(u >> (8 * i)));
    }
    return s;
  };
  const auto shorts = [](std::initializer_list<std::uint16_t> v) {
    std::string s;
    for (auto x : v) {
      s.push_back(static_cast<char>(x));
      s.push_back(static_cast<char>(x >> 8));
    }
    return s;
  };
  const auto add_short = [&](std::uint16_t id, std::uint16_t v) { tags.push_back({id, 3, 1, v, {}}); };
  const auto add_long = [&](std::uint16_t id, std::uint32_t v) { tags.push_back({id, 4, 1, v, {}}); };
  const auto add_longs = [&](std::uint16_t id, const std::vector<std::uint32_t>& v) {
    if (v.size() == 1) tags.push_back({id, 4, 1, v[0], {}});
    else tags.push_back({id, 4, static_cast<std::uint32_t>(v.size()), 0, longs(v)});
  };

  add_long(tag::kImageWidth, static_cast<std::uint32_t>(cols));
  add_long(tag::kImageLength, static_cast<std::uint32_t>(rows));
  add_short(tag::kBitsPerSample, 64);
  add_short(tag::kCompression, static_cast<std::uint16_t>(opt.compression));
  add_short(tag::kPhotometric, 1);
  if (!opt.tiled) add_longs(tag::kStripOffsets, offsets);
  add_short(tag::kSamplesPerPixel, 1);
  if (!opt.tiled) {
    add_long(tag::kRowsPerStrip, static_cast<std::uint32_t>(chunk_h));
    add_longs(tag::kStripByteCounts, counts);
  }
  add_short(tag::kPlanarConfig, 1);
  if (opt.tiled) {
    add_long(tag::kTileWidth, opt.tile_size);
    add_long(tag::kTileLength, opt.tile_size);
    add_longs(tag::kTileOffsets, offsets);
    add_longs(tag::kTileByteCounts, counts);
  }
  add_short(tag::kSampleFormat, 3);
  tags.push_back({tag::kModelPixelScale, 12, 3, 0, doubles({g.cell_width_deg(), g.cell_height_deg(), 0.0})});
  tags.push_back({tag::kModelTiepoint, 12, 6, 0, doubles({0.0, 0.0, 0.0, g.bounds.min_lon, g.bounds.max_lat, 0.0})});
  // Version 1.1.0, 3 keys: model type geographic, PixelIsArea, WGS84.
  tags.push_back({tag::kGeoKeyDirectory, 3, 16, 0,
                  shorts({1, 1, 0, 3, 1024, 0, 1, 2, 1025, 0, 1, 1, 2048, 0, 1, 4326})});
  std::string nodata = text::format_double(layer.nodata);
  nodata.push_back('\0');
  tags.push_back({tag::kGdalNodata, 2, static_cast<std::uint32_t>(nodata.size()), 0, nodata});

  std::sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) { return a.id < b.id; });
  std::vector<std::uint32_t> payload_offsets(tags.size(), 0);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto& t = tags[i];
    if (t.payload.size() > 4) {
      pad();
      payload_offsets[i] = static_cast<std::uint32_t>(out.size());
      out += t.payload;
    }
  }
  pad();
  const auto ifd = static_cast<std::uint32_t>(out.size());
  put16(static_cast<std::uint16_t>(tags.size()));
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& t = tags[i];
    put16(t.id);
    put16(t.type);
    put32(t.count);
    if (t.payload.size() > 4) {
      put32(payload_offsets[i]);
    } else if (!t.payload.empty()) {
      std::string v = t.payload;
      v.resize(4, '\0');
      put(v.data(), 4);
    } else if (t.type == 3) {
      put16(static_cast<std::uint16_t>(t.inline_value));
      put16(0);
    } else {
      put32(t.inline_value);
    }
  }
  put32(0);
  for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<char>(ifd >> (8 * i));
  return out;
}

inline void write(const RasterLayer& layer, const std::filesystem::path& path, const WriteOptions& opt = {}) {
  files::write_atomic(path, format(layer, opt));
}

}  // namespace geotiff
}  // namespace aqs::raster
