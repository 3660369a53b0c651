#pragma once

// Sphere parameterizations used by the dewarp and view renderers.
//
// World frame: +z forward (longitude 0, latitude 0), +x right (longitude
// +90 deg), +y up. Pixel-index coordinates put the center of pixel i at i.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "gaze/core/error.hpp"

namespace gaze::projection {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// (longitude, latitude) in radians.
template <typename Scalar>
using LonLat = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

/// Center of ERP pixel (u, v) -> (lon, lat); lon in [-pi, pi), lat in [-pi/2, pi/2].
template <typename Scalar>
LonLat<Scalar> erp_pixel_to_direction(Scalar u, Scalar v, int width, int height) {
  if (width <= 0 || height <= 0 || !(u >= 0) || !(v >= 0) || u >= width || v >= height)
    fail(Errc::OutOfBounds, "ERP pixel outside raster");
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar lon = Scalar(2) * pi * ((u + Scalar(0.5)) / Scalar(width)) - pi;
  const Scalar lat = pi / Scalar(2) - pi * ((v + Scalar(0.5)) / Scalar(height));
  return {lon, lat};
}

/// Inverse of erp_pixel_to_direction in continuous pixel-index coordinates.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> direction_to_erp_pixel(const LonLat<Scalar>& ll, int width, int height) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  return {(ll.x() + pi) / (Scalar(2) * pi) * Scalar(width) - Scalar(0.5),
          (pi / Scalar(2) - ll.y()) / pi * Scalar(height) - Scalar(0.5)};
}

template <typename Scalar>
Vec3<Scalar> unit_vector(const LonLat<Scalar>& ll) {
  const Scalar c = std::cos(ll.y());
  return {c * std::sin(ll.x()), std::sin(ll.y()), c * std::cos(ll.x())};
}

template <typename Scalar>
LonLat<Scalar> lonlat(const Vec3<Scalar>& d) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar n = d.norm();
  Scalar lon = std::atan2(d.x(), d.z());
  if (lon >= pi) lon -= Scalar(2) * pi;
  const Scalar s = std::clamp(d.y() / n, Scalar(-1), Scalar(1));
  return {lon, std::asin(s)};
}

/// Rotation taking the camera frame of a view at (yaw, pitch) into the world frame.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> view_rotation(Scalar yaw_rad, Scalar pitch_rad) {
  using Axis = Eigen::AngleAxis<Scalar>;
  return (Axis(yaw_rad, Vec3<Scalar>::UnitY()) * Axis(-pitch_rad, Vec3<Scalar>::UnitX())).toRotationMatrix();
}

/// One circular equidistant fisheye image (r = f * theta).
struct FisheyeLens {
  double cx = 0.0;  // pixel-index coordinates
  double cy = 0.0;
  double radius = 0.0;
  double fov_deg = 190.0;
  double yaw_deg = 0.0;

  double focal() const { return radius / (deg2rad(fov_deg) / 2.0); }
  Vec3<double> axis() const { return view_rotation(deg2rad(yaw_deg), 0.0) * Vec3<double>::UnitZ(); }
};

/// Direction -> lens image point. Returns false when outside the lens field of view.
template <typename Scalar>
bool direction_to_fisheye(const FisheyeLens& lens, const Vec3<Scalar>& d, Scalar& x, Scalar& y) {
  const Vec3<Scalar> local =
      view_rotation<Scalar>(-deg2rad(Scalar(lens.yaw_deg)), Scalar(0)) * d.normalized();
  const Scalar theta = std::acos(std::clamp(local.z(), Scalar(-1), Scalar(1)));
  if (theta > deg2rad(Scalar(lens.fov_deg)) / Scalar(2)) return false;
  const Scalar r = Scalar(lens.focal()) * theta;
  const Scalar psi = std::atan2(local.y(), local.x());
  x = Scalar(lens.cx) + r * std::cos(psi);
  y = Scalar(lens.cy) - r * std::sin(psi);
  return true;
}

template <typename Scalar>
Vec3<Scalar> fisheye_to_direction(const FisheyeLens& lens, Scalar x, Scalar y) {
  const Scalar dx = x - Scalar(lens.cx), dy = Scalar(lens.cy) - y;
  const Scalar theta = std::hypot(dx, dy) / Scalar(lens.focal());
  const Scalar psi = std::atan2(dy, dx);
  const Vec3<Scalar> local{std::sin(theta) * std::cos(psi), std::sin(theta) * std::sin(psi), std::cos(theta)};
  return view_rotation<Scalar>(deg2rad(Scalar(lens.yaw_deg)), Scalar(0)) * local;
}

}  // namespace gaze::projection
