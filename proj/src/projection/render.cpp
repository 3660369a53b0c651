#include "gaze/projection/render.hpp"

#include <cmath>

namespace gaze::projection {

void validate_layout(const FisheyeLayout& layout, int width, int height) {
  for (const auto& lens : layout.lenses) {
    if (!(lens.radius > 0.0)) fail(Errc::LayoutInvalid, "lens radius must be > 0");
    if (!(lens.fov_deg > 90.0 && lens.fov_deg < 220.0)) fail(Errc::LayoutInvalid, "lens FOV must be in (90, 220)");
    const double tol = 1.0;
    if (lens.cx - lens.radius < -0.5 - tol || lens.cx + lens.radius > width - 0.5 + tol ||
        lens.cy - lens.radius < -0.5 - tol || lens.cy + lens.radius > height - 0.5 + tol)
      fail(Errc::LayoutInvalid, "lens circle does not fit in the source raster");
  }
  double dyaw = std::fmod(std::abs(layout.lenses[0].yaw_deg - layout.lenses[1].yaw_deg), 360.0);
  if (std::abs(dyaw - 180.0) > 1e-6) fail(Errc::LayoutInvalid, "lenses must face opposite yaws");
}

Json to_json(const FisheyeLayout& layout) {
  Json lenses = Json::array();
  for (const auto& l : layout.lenses)
    lenses.push_back({{"cx", l.cx}, {"cy", l.cy}, {"radius", l.radius}, {"fov_deg", l.fov_deg}, {"yaw_deg", l.yaw_deg}});
  return Json{{"lenses", lenses}};
}

FisheyeLayout layout_from_json(const Json& j) {
  const auto lenses = field<Json>(j, "lenses", Errc::LayoutInvalid);
  if (!lenses.is_array() || lenses.size() != 2) fail(Errc::LayoutInvalid, "layout needs exactly two lenses");
  FisheyeLayout out;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& l = lenses[i];
    out.lenses[i] = FisheyeLens{field<double>(l, "cx", Errc::LayoutInvalid), field<double>(l, "cy", Errc::LayoutInvalid),
                                field<double>(l, "radius", Errc::LayoutInvalid),
                                field_or<double>(l, "fov_deg", 190.0, Errc::LayoutInvalid),
                                field_or<double>(l, "yaw_deg", i == 0 ? 0.0 : 180.0, Errc::LayoutInvalid)};
  }
  return out;
}

std::string_view to_string(ViewName v) {
  switch (v) {
    case ViewName::back: return "back";
    case ViewName::left: return "left";
    case ViewName::front: return "front";
    case ViewName::right: return "right";
  }
  return "front";
}

ViewName view_name_from_string(std::string_view s) {
  if (s == "back") return ViewName::back;
  if (s == "left") return ViewName::left;
  if (s == "front") return ViewName::front;
  if (s == "right") return ViewName::right;
  fail(Errc::SchemaViolation, "unknown view '" + std::string(s) + "'");
}

std::vector<ViewSpec> default_views(int width, int height, double hfov_deg) {
  return {{ViewName::back, 180.0, 0.0, hfov_deg, width, height},
          {ViewName::left, -90.0, 0.0, hfov_deg, width, height},
          {ViewName::front, 0.0, 0.0, hfov_deg, width, height},
          {ViewName::right, 90.0, 0.0, hfov_deg, width, height}};
}

namespace {

inline std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

std::array<std::uint8_t, 3> sample_bilinear(const Image& img, double x, double y, bool wrap_x) {
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  const double ax = x - fx0, ay = y - fy0;
  auto col = [&](long c) -> int {
    if (wrap_x) {
      long m = c % img.width;
      return static_cast<int>(m < 0 ? m + img.width : m);
    }
    return static_cast<int>(std::clamp<long>(c, 0, img.width - 1));
  };
  auto row = [&](long r) { return static_cast<int>(std::clamp<long>(r, 0, img.height - 1)); };
  const int x0 = col(static_cast<long>(fx0)), x1 = col(static_cast<long>(fx0) + 1);
  const int y0 = row(static_cast<long>(fy0)), y1 = row(static_cast<long>(fy0) + 1);
  const auto* p00 = img.pixel(x0, y0);
  const auto* p10 = img.pixel(x1, y0);
  const auto* p01 = img.pixel(x0, y1);
  const auto* p11 = img.pixel(x1, y1);
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double top = p00[c] + (p10[c] - p00[c]) * ax;
    const double bot = p01[c] + (p11[c] - p01[c]) * ax;
    out[c] = to_u8(top + (bot - top) * ay);
  }
  return out;
}

std::array<std::uint8_t, 3> sample_erp(const Image& erp, double lon, double lat) {
  const auto px = direction_to_erp_pixel<double>({lon, lat}, erp.width, erp.height);
  return sample_bilinear(erp, px.x(), px.y(), true);
}

Frame dewarp_fisheye_to_erp(const Frame& src, const FisheyeLayout& layout, int out_width, int out_height) {
  validate_layout(layout, src.image.width, src.image.height);
  if (out_width <= 0 || out_height <= 0) fail(Errc::LayoutInvalid, "output raster must be non-empty");
  const Vec3<double> axis0 = layout.lenses[0].axis(), axis1 = layout.lenses[1].axis();
  Frame out{Image(out_width, out_height), src.t_seconds};
  for (int v = 0; v < out_height; ++v) {
    for (int u = 0; u < out_width; ++u) {
      const Vec3<double> d = unit_vector(erp_pixel_to_direction<double>(u, v, out_width, out_height));
      const auto& lens = d.dot(axis0) >= d.dot(axis1) ? layout.lenses[0] : layout.lenses[1];
      double x = 0, y = 0;
      if (!direction_to_fisheye(lens, d, x, y)) continue;
      const auto rgb = sample_bilinear(src.image, x, y, false);
      out.image.set(u, v, rgb[0], rgb[1], rgb[2]);
    }
  }
  return out;
}

Vec3<double> view_pixel_ray(const ViewSpec& view, double x, double y) {
  const double f = (view.width / 2.0) / std::tan(deg2rad(view.hfov_deg) / 2.0);
  const Vec3<double> cam{(x + 0.5 - view.width / 2.0) / f, -(y + 0.5 - view.height / 2.0) / f, 1.0};
  return view_rotation(deg2rad(view.yaw_deg), deg2rad(view.pitch_deg)) * cam.normalized();
}

Frame render_rectilinear_view(const Frame& erp, const ViewSpec& view) {
  if (view.width <= 0 || view.height <= 0 || !(view.hfov_deg > 0.0 && view.hfov_deg < 180.0))
    fail(Errc::BadConfig, "invalid view spec");
  Frame out{Image(view.width, view.height), erp.t_seconds};
  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      const auto ll = lonlat(view_pixel_ray(view, x, y));
      const auto rgb = sample_erp(erp.image, ll.x(), ll.y());
      out.image.set(x, y, rgb[0], rgb[1], rgb[2]);
    }
  }
  return out;
}

std::vector<Box> view_box_to_erp(const ViewSpec& view, const Box& box, int erp_width, int erp_height) {
  if (box.empty()) return {};
  constexpr int kSteps = 16;
  std::vector<Eigen::Vector2d> pts;
  auto add = [&](double bx, double by) {
    // box edges are pixel boundaries; shift to pixel-index coordinates
    const auto ll = lonlat(view_pixel_ray(view, bx - 0.5, by - 0.5));
    pts.push_back(direction_to_erp_pixel<double>(ll, erp_width, erp_height));
  };
  for (int i = 0; i <= kSteps; ++i) {
    const double t = static_cast<double>(i) / kSteps;
    add(box.x + t * box.w, box.y);
    add(box.x + t * box.w, box.bottom());
    add(box.x, box.y + t * box.h);
    add(box.right(), box.y + t * box.h);
  }
  double ymin = pts[0].y(), ymax = pts[0].y();
  for (const auto& p : pts) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  // Unwrap longitudes relative to the first point so a seam crossing stays contiguous.
  const double ref = pts[0].x();
  double xmin = ref, xmax = ref;
  for (const auto& p : pts) {
    double x = p.x();
    while (x - ref > erp_width / 2.0) x -= erp_width;
    while (ref - x > erp_width / 2.0) x += erp_width;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  // back to pixel-edge coordinates, padded by one pixel for sampling spread
  const double y0 = std::max(0.0, std::floor(ymin + 0.5) - 1.0);
  const double y1 = std::min(static_cast<double>(erp_height), std::ceil(ymax + 0.5) + 1.0);
  double x0 = std::floor(xmin + 0.5) - 1.0, x1 = std::ceil(xmax + 0.5) + 1.0;
  if (x1 - x0 >= erp_width) return {Box{0, y0, static_cast<double>(erp_width), y1 - y0}};
  while (x0 < 0) {
    x0 += erp_width;
    x1 += erp_width;
  }
  while (x0 >= erp_width) {
    x0 -= erp_width;
    x1 -= erp_width;
  }
  if (x1 <= erp_width) return {Box{x0, y0, x1 - x0, y1 - y0}};
  return {Box{x0, y0, erp_width - x0, y1 - y0}, Box{0, y0, x1 - erp_width, y1 - y0}};
}

}  // namespace gaze::projection
