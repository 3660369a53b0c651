#pragma once

#include <span>
#include <string>
#include <vector>

#include "gaze/detect/evidence.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::detect {

struct MotionParams {
  double cell_s = 1.0;
  double idle_motion_below = 0.01;
  double silent_loudness_below = -60.0;
  double black_ratio_above = 0.9;
  double high_motion_above = 0.12;
  double scene_change_above = 0.35;
};

Json to_json(const MotionParams& p);
MotionParams motion_params_from_json(const Json& j);

/// Frame-differencing and loudness cues for one clip. `frames` carry session
/// timestamps and must lie inside the clip; `frame_uris` parallels `frames`;
/// `audio` covers the clip from its start. Emits idle (payload.reason one of
/// black, idle, silent), high_motion and scene_change items in clip time.
std::vector<EvidenceItem> run_motion_detector(const segment::ClipRecord& clip, std::span<const Frame> frames,
                                              std::span<const std::string> frame_uris, std::span<const float> audio,
                                              int sample_rate, const MotionParams& params,
                                              const segment::SegmenterConfig& seg);

}  // namespace gaze::detect
