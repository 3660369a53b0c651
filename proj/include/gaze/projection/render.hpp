#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "gaze/core/image.hpp"
#include "gaze/projection/geometry.hpp"

namespace gaze::projection {

struct FisheyeLayout {
  std::array<FisheyeLens, 2> lenses;
};

/// Throws LayoutInvalid for radius <= 0, FOV outside (90, 220), non-opposite
/// yaws, or a circle that does not fit in a width x height raster.
void validate_layout(const FisheyeLayout& layout, int width, int height);

Json to_json(const FisheyeLayout& layout);
FisheyeLayout layout_from_json(const Json& j);

enum class ViewName { back, left, front, right };
std::string_view to_string(ViewName v);
ViewName view_name_from_string(std::string_view s);

struct ViewSpec {
  ViewName name = ViewName::front;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double hfov_deg = 90.0;
  int width = 0;
  int height = 0;
};

/// Back, Left, Front, Right at yaw 180, -90, 0, 90.
std::vector<ViewSpec> default_views(int width, int height, double hfov_deg = 90.0);

/// Bilinear sample at continuous pixel-index coordinates. ERP rasters wrap
/// horizontally; both kinds clamp vertically.
std::array<std::uint8_t, 3> sample_bilinear(const Image& img, double x, double y, bool wrap_x);

std::array<std::uint8_t, 3> sample_erp(const Image& erp, double lon, double lat);

/// Each ERP pixel samples the lens whose optical axis is angularly nearest;
/// directions outside that lens' field of view are black.
Frame dewarp_fisheye_to_erp(const Frame& dual_fisheye, const FisheyeLayout& layout, int out_width, int out_height);

/// Gnomonic view of an ERP frame; timestamp is carried over unchanged.
Frame render_rectilinear_view(const Frame& erp, const ViewSpec& view);

/// World direction through the center of view pixel (x, y) (pixel-index coordinates).
Vec3<double> view_pixel_ray(const ViewSpec& view, double x, double y);

/// Projects a box drawn in a view onto ERP pixel coordinates. Returns two
/// boxes when the footprint straddles the +-180 deg seam.
std::vector<Box> view_box_to_erp(const ViewSpec& view, const Box& box, int erp_width, int erp_height);

}  // namespace gaze::projection
