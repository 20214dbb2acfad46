#pragma once

#include <zlib.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pvse/grid.hpp"
#include "pvse/level_set.hpp"

namespace pvse {

/// 8-bit raster, 1 (gray) or 3 (RGB) channels, rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

inline std::uint32_t crc32_of(const std::uint8_t* data, size_t len, std::uint32_t seed = 0) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320U ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  std::uint32_t c = seed ^ 0xffffffffU;
  for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffU;
}

inline std::uint32_t adler32_of(const std::uint8_t* data, size_t len) {
  std::uint32_t a = 1, b = 0;
  for (size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521;
    b = (b + a) % 65521;
  }
  return (b << 16) | a;
}

inline void push_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                       const std::vector<std::uint8_t>& payload) {
  push_u32be(out, static_cast<std::uint32_t>(payload.size()));
  std::vector<std::uint8_t> body(type, type + 4);
  body.insert(body.end(), payload.begin(), payload.end());
  out.insert(out.end(), body.begin(), body.end());
  push_u32be(out, crc32_of(body.data(), body.size()));
}

/// zlib container with uncompressed (stored) deflate blocks: byte-identical
/// output regardless of the zlib version, which keeps golden files stable.
inline std::vector<std::uint8_t> zlib_stored(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> out;
  out.push_back(0x78);
  out.push_back(0x01);
  size_t pos = 0;
  do {
    const size_t n = std::min<size_t>(raw.size() - pos, 65535);
    const bool final = pos + n == raw.size();
    out.push_back(final ? 1 : 0);
    out.push_back(static_cast<std::uint8_t>(n & 0xff));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(~n & 0xff));
    out.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xff));
    out.insert(out.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
               raw.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  } while (pos < raw.size());
  push_u32be(out, adler32_of(raw.data(), raw.size()));
  return out;
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace detail

/// PNG encoder for 8-bit grayscale/RGB, non-interlaced, filter 0 rows.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error(ErrorCode::IoError, "png encoder supports 1 or 3 channels");
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

  std::vector<std::uint8_t> ihdr;
  detail::push_u32be(ihdr, static_cast<std::uint32_t>(img.width));
  detail::push_u32be(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                   // bit depth
  ihdr.push_back(img.channels == 1 ? 0 : 2);           // color type
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::push_chunk(out, "IHDR", ihdr);

  const size_t stride = static_cast<size_t>(img.width) * img.channels;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), img.data.begin() + static_cast<std::ptrdiff_t>(y * stride),
               img.data.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  detail::push_chunk(out, "IDAT", detail::zlib_stored(raw));
  detail::push_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const std::string& path, const Image& img) {
  detail::write_file(path, encode_png(img));
}

/// PNG decoder: 8-bit grayscale, RGB or RGBA (alpha dropped), non-interlaced.
/// Anything else is rejected.
inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
    throw Error(ErrorCode::IoError, "not a png file");

  int width = 0, height = 0, bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<std::uint8_t> idat;
  size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = (bytes[pos] << 24) | (bytes[pos + 1] << 16) |
                              (bytes[pos + 2] << 8) | bytes[pos + 3];
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    if (pos + 12 + len > bytes.size()) throw Error(ErrorCode::IoError, "truncated png");
    const std::uint8_t* payload = &bytes[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      width = (payload[0] << 24) | (payload[1] << 16) | (payload[2] << 8) | payload[3];
      height = (payload[4] << 24) | (payload[5] << 16) | (payload[6] << 8) | payload[7];
      bit_depth = payload[8];
      color_type = payload[9];
      interlace = payload[12];
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0) throw Error(ErrorCode::IoError, "bad png header");
  if (bit_depth != 8) throw Error(ErrorCode::IoError, "only 8-bit png supported");
  if (interlace != 0) throw Error(ErrorCode::IoError, "interlaced png not supported");
  int src_channels;
  switch (color_type) {
    case 0: src_channels = 1; break;
    case 2: src_channels = 3; break;
    case 6: src_channels = 4; break;
    default: throw Error(ErrorCode::IoError, "unsupported png color type");
  }

  const size_t stride = static_cast<size_t>(width) * src_channels;
  std::vector<std::uint8_t> raw((stride + 1) * static_cast<size_t>(height));
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw Error(ErrorCode::IoError, "png inflate failed");

  // Undo per-row filters in place.
  std::vector<std::uint8_t> pixels(stride * static_cast<size_t>(height));
  const int bpp = src_channels;
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[static_cast<size_t>(y) * (stride + 1)];
    const std::uint8_t* src = &raw[static_cast<size_t>(y) * (stride + 1) + 1];
    std::uint8_t* dst = &pixels[static_cast<size_t>(y) * stride];
    const std::uint8_t* up = y > 0 ? &pixels[static_cast<size_t>(y - 1) * stride] : nullptr;
    for (size_t x = 0; x < stride; ++x) {
      const int a = x >= static_cast<size_t>(bpp) ? dst[x - static_cast<size_t>(bpp)] : 0;
      const int b = up ? up[x] : 0;
      const int c = (up && x >= static_cast<size_t>(bpp)) ? up[x - static_cast<size_t>(bpp)] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += detail::paeth(a, b, c); break;
        default: throw Error(ErrorCode::IoError, "unknown png filter");
      }
      dst[x] = static_cast<std::uint8_t>(v & 0xff);
    }
  }

  Image img;
  img.width = width;
  img.height = height;
  img.channels = src_channels == 1 ? 1 : 3;
  img.data.resize(static_cast<size_t>(width) * height * img.channels);
  if (src_channels == img.channels) {
    img.data = std::move(pixels);
  } else {  // drop alpha
    for (size_t p = 0; p < static_cast<size_t>(width) * height; ++p)
      for (int ch = 0; ch < 3; ++ch)
        img.data[p * 3 + static_cast<size_t>(ch)] = pixels[p * 4 + static_cast<size_t>(ch)];
  }
  return img;
}

inline Image read_png(const std::string& path) { return decode_png(detail::read_file(path)); }

/// Binary PGM (P5), maxval up to 255.
inline Image read_pgm(const std::string& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) { ++pos; continue; }
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") throw Error(ErrorCode::IoError, "not a binary pgm (P5)");
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw Error(ErrorCode::IoError, "unsupported pgm header");
  ++pos;  // single whitespace after maxval
  if (bytes.size() - pos < static_cast<size_t>(w) * h)
    throw Error(ErrorCode::IoError, "truncated pgm");
  Image img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos) + w * h);
  return img;
}

inline void write_pgm(const std::string& path, const Image& img) {
  if (img.channels != 1) throw Error(ErrorCode::IoError, "pgm requires grayscale");
  std::vector<std::uint8_t> out;
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  detail::write_file(path, out);
}

inline Image read_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") return read_pgm(path);
  return read_png(path);
}

/// Grayscale feature image: luminance for RGB inputs, or one selected channel.
inline ScalarGrid image_to_grid(const Image& img, const GridSpec& spec, int channel = -1) {
  if (img.width != spec.width || img.height != spec.height)
    throw Error(ErrorCode::DimensionMismatch, "image does not match grid");
  ScalarGrid g(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) {
      double v;
      if (img.channels == 1) {
        v = img.at(i, j);
      } else if (channel >= 0 && channel < 3) {
        v = img.at(i, j, channel);
      } else {
        v = 0.299 * img.at(i, j, 0) + 0.587 * img.at(i, j, 1) + 0.114 * img.at(i, j, 2);
      }
      g.at(i, j) = v;
    }
  return g;
}

/// Masks: 0 background, 255 foreground on disk; threshold 128 when reading.
inline MaskGrid image_to_mask(const Image& img, const GridSpec& spec) {
  const ScalarGrid g = image_to_grid(img, spec);
  MaskGrid m(spec, 0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) m.at(i, j) = g.at(i, j) >= 128.0 ? 1 : 0;
  return m;
}

inline Image mask_to_image(const MaskGrid& mask) {
  Image img;
  img.width = mask.spec().width;
  img.height = mask.spec().height;
  img.channels = 1;
  img.data.resize(static_cast<size_t>(img.width) * img.height);
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i)
      img.data[static_cast<size_t>(j) * img.width + i] = mask.at(i, j) ? 255 : 0;
  return img;
}

/// Level-set raster: 16-byte header (magic "PVSEFLD0", u32 width, u32 height,
/// little endian) followed by row-major float32 values. Spacing and origin
/// travel in a JSON sidecar next to the raster.
inline void write_field_raster(const std::string& path, const LevelSetField& field) {
  std::vector<std::uint8_t> out;
  const char magic[8] = {'P', 'V', 'S', 'E', 'F', 'L', 'D', '0'};
  out.insert(out.end(), magic, magic + 8);
  auto push_u32le = [&](std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
  };
  push_u32le(static_cast<std::uint32_t>(field.spec().width));
  push_u32le(static_cast<std::uint32_t>(field.spec().height));
  for (double v : field.values.data()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    push_u32le(bits);
  }
  detail::write_file(path, out);
}

inline LevelSetField read_field_raster(const std::string& path, double spacing = 1.0,
                                       Vec2 origin = {0.0, 0.0}) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "PVSEFLD0", 8) != 0)
    throw Error(ErrorCode::IoError, "bad field raster magic");
  auto u32le = [&](size_t at) {
    return static_cast<std::uint32_t>(bytes[at]) | (bytes[at + 1] << 8) |
           (bytes[at + 2] << 16) | (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
  };
  const int w = static_cast<int>(u32le(8));
  const int h = static_cast<int>(u32le(12));
  if (bytes.size() != 16 + static_cast<size_t>(w) * h * 4)
    throw Error(ErrorCode::IoError, "field raster size mismatch");
  LevelSetField field(GridSpec(w, h, spacing, origin));
  for (size_t k = 0; k < static_cast<size_t>(w) * h; ++k) {
    const std::uint32_t bits = u32le(16 + k * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    field.values.data()[k] = f;
  }
  return field;
}

}  // namespace pvse
