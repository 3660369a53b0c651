#pragma once

// Hand-written sphere and lens math used as oracles; deliberately does not
// call the library's geometry helpers.

#include <array>
#include <cmath>
#include <numbers>

namespace gaze::test {

struct Dir {
  double x, y, z;
};

inline Dir erp_dir(double u, double v, int w, int h) {
  const double lon = 2.0 * std::numbers::pi * ((u + 0.5) / w) - std::numbers::pi;
  const double lat = std::numbers::pi / 2.0 - std::numbers::pi * ((v + 0.5) / h);
  return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

/// Equidistant lens pointing at yaw 0 (+z) or yaw 180 (-z).
inline Dir fisheye_dir(double x, double y, double cx, double cy, double radius, double fov_deg, bool back) {
  const double f = radius / (fov_deg * std::numbers::pi / 360.0);
  const double dx = x - cx, dy = cy - y;
  const double theta = std::hypot(dx, dy) / f;
  const double psi = std::atan2(dy, dx);
  Dir d{std::sin(theta) * std::cos(psi), std::sin(theta) * std::sin(psi), std::cos(theta)};
  if (back) d = {-d.x, d.y, -d.z};
  return d;
}

/// Smooth color field on the sphere.
inline std::array<double, 3> smooth_field(const Dir& d) {
  return {128.0 + 90.0 * d.x, 128.0 + 90.0 * d.y, 128.0 + 80.0 * d.z + 20.0 * d.x * d.y};
}

inline std::array<std::uint8_t, 3> quantize(const std::array<double, 3>& c) {
  return {static_cast<std::uint8_t>(std::lround(c[0])), static_cast<std::uint8_t>(std::lround(c[1])),
          static_cast<std::uint8_t>(std::lround(c[2]))};
}

}  // namespace gaze::test
