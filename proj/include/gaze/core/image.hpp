#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gaze/core/json.hpp"

namespace gaze {

/// Axis-aligned pixel box; x/y are the top-left corner.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return std::max(0.0, w) * std::max(0.0, h); }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  bool empty() const { return !(w > 0.0 && h > 0.0); }
  friend bool operator==(const Box&, const Box&) = default;
};

double iou(const Box& a, const Box& b);
Box bounding_union(const Box& a, const Box& b);

Json to_json(const Box& b);
Box box_from_json(const Json& j);

/// Interleaved 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* pixel(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  friend bool operator==(const Image&, const Image&) = default;
};

/// round(0.299 R + 0.587 G + 0.114 B), computed exactly in integers.
inline int luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) { return (299 * r + 587 * g + 114 * b + 500) / 1000; }

std::vector<std::uint8_t> luma_plane(const Image& img);

/// Copy of the pixels under `box` (clipped to the raster).
Image crop(const Image& img, const Box& box);

struct Frame {
  Image image;
  double t_seconds = 0.0;
};

}  // namespace gaze
