#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "pvse/contour.hpp"
#include "pvse/image_io.hpp"

namespace pvse {

struct OverlayStyle {
  std::string stroke = "#e3342f";
  double stroke_width = 0.8;
};

namespace detail {

inline std::string base64(const std::vector<std::uint8_t>& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Contour overlay as a standalone SVG document: the raster is embedded as a
/// base64 PNG (stored-deflate, so the bytes are reproducible) and each contour
/// becomes one closed path. Output bytes are deterministic for fixed inputs.
inline std::string render_overlay(const Image& image, const GridSpec& spec,
                                  const std::vector<Contour>& contours,
                                  const OverlayStyle& style = {}) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(image.width) + "\" height=\"" + std::to_string(image.height) +
         "\" viewBox=\"0 0 " + std::to_string(image.width) + " " +
         std::to_string(image.height) + "\">\n";
  svg += "<image width=\"" + std::to_string(image.width) + "\" height=\"" +
         std::to_string(image.height) +
         "\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64," +
         detail::base64(encode_png(image)) + "\"/>\n";
  for (const Contour& c : contours) {
    if (c.points.empty()) continue;
    std::string d;
    for (size_t k = 0; k < c.points.size(); ++k) {
      const Vec2 g = spec.to_grid(c.points[k]);
      d += (k == 0 ? "M" : " L");
      d += detail::fmt2(g.x + 0.5) + "," + detail::fmt2(g.y + 0.5);
    }
    d += " Z";
    svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + style.stroke +
           "\" stroke-width=\"" + detail::fmt2(style.stroke_width) + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pvse
