#pragma once

#include <span>
#include <string>
#include <vector>

#include "gaze/core/image.hpp"
#include "gaze/core/interval.hpp"
#include "gaze/core/media_io.hpp"

namespace gaze::segment {

enum class StreamView { erp, front, right, back, left };
std::string_view to_string(StreamView v);
StreamView stream_view_from_string(std::string_view s);

enum class LensKind { rectilinear, fisheye };
std::string_view to_string(LensKind l);
LensKind lens_kind_from_string(std::string_view s);

struct Descriptors {
  double black_ratio = 0.0;
  double motion_energy = 0.0;
  double loudness = -90.0;
};

struct ClipRecord {
  std::string clip_id;
  StreamView view = StreamView::front;
  double t_start = 0.0;
  double t_end = 0.0;
  double fps = 0.0;
  std::string resolution;  // "WxH", free-form
  LensKind lens = LensKind::rectilinear;
  Descriptors descriptors;

  Span span() const { return {t_start, t_end}; }
};

Json to_json(const ClipRecord& c);
ClipRecord clip_from_json(const Json& j);

struct SegmenterConfig {
  double clip_len = 60.0;
  double overlap = 2.5;
  int black_luma_threshold = 16;
  double black_pixel_fraction = 0.98;
  double silence_floor_dbfs = -90.0;

  /// Throws BadConfig unless 0 < overlap < clip_len and the thresholds are in range.
  void validate() const;
};

Json to_json(const SegmenterConfig& c);
SegmenterConfig segmenter_config_from_json(const Json& j);

/// Windows start at k * (clip_len - overlap); the last one ends exactly at
/// `duration`, and a final window shorter than the overlap is folded into its
/// predecessor.
std::vector<Span> plan_windows(double duration, const SegmenterConfig& config);

bool is_black_frame(const Image& frame, const SegmenterConfig& config);

/// Fraction of frames that are black.
double compute_black_ratio(std::span<const Image> frames, const SegmenterConfig& config);

/// Mean absolute luma difference of two equally sized frames, scaled to [0, 1].
double frame_difference(const Image& a, const Image& b);

/// Mean frame_difference over consecutive pairs.
double compute_motion_energy(std::span<const Image> frames);

/// 20 log10(RMS) of normalized samples, clamped below at `floor_dbfs`.
double compute_loudness(std::span<const float> samples, double floor_dbfs = -90.0);

/// "<session>_<view>_<index06>"
std::string make_clip_id(const std::string& session_id, StreamView view, int index);

/// Plans windows over one view's frame stream and computes descriptors per
/// window (parallel across windows; output order is window order).
std::vector<ClipRecord> segment_stream(const std::string& session_id, StreamView view, LensKind lens,
                                       const FrameSequence& frames, const PcmAudio& audio, double duration,
                                       const SegmenterConfig& config, std::size_t workers);

}  // namespace gaze::segment
