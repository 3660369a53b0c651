#include "gaze/core/image.hpp"

#include <cmath>

namespace gaze {

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box bounding_union(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const double x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right()), y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

Json to_json(const Box& b) { return Json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

Box box_from_json(const Json& j) {
  if (j.is_array()) {
    if (j.size() != 4) fail(Errc::SchemaViolation, "box array needs 4 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  }
  Box b{field<double>(j, "x"), field<double>(j, "y"), field<double>(j, "w"), field<double>(j, "h")};
  if (b.w < 0 || b.h < 0) fail(Errc::SchemaViolation, "box with negative extent");
  return b;
}

std::vector<std::uint8_t> luma_plane(const Image& img) {
  std::vector<std::uint8_t> out(img.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* p = img.rgb.data() + i * 3;
    out[i] = static_cast<std::uint8_t>(luma(p[0], p[1], p[2]));
  }
  return out;
}

Image crop(const Image& img, const Box& box) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x)), 0, img.width);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y)), 0, img.height);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.right())), 0, img.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.bottom())), 0, img.height);
  Image out(std::max(0, x1 - x0), std::max(0, y1 - y0));
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const auto* s = img.pixel(x, y);
      out.set(x - x0, y - y0, s[0], s[1], s[2]);
    }
  return out;
}

}  // namespace gaze
