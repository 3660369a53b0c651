#include "gaze/segment/segmenter.hpp"

#include <cmath>
#include <cstdio>

#include "gaze/core/thread_pool.hpp"

namespace gaze::segment {

std::string_view to_string(StreamView v) {
  switch (v) {
    case StreamView::erp: return "erp";
    case StreamView::front: return "front";
    case StreamView::right: return "right";
    case StreamView::back: return "back";
    case StreamView::left: return "left";
  }
  return "front";
}

StreamView stream_view_from_string(std::string_view s) {
  if (s == "erp") return StreamView::erp;
  if (s == "front") return StreamView::front;
  if (s == "right") return StreamView::right;
  if (s == "back") return StreamView::back;
  if (s == "left") return StreamView::left;
  fail(Errc::SchemaViolation, "unknown view '" + std::string(s) + "'");
}

std::string_view to_string(LensKind l) { return l == LensKind::fisheye ? "fisheye" : "rectilinear"; }

LensKind lens_kind_from_string(std::string_view s) {
  if (s == "fisheye") return LensKind::fisheye;
  if (s == "rectilinear") return LensKind::rectilinear;
  fail(Errc::SchemaViolation, "unknown lens '" + std::string(s) + "'");
}

Json to_json(const ClipRecord& c) {
  return Json{{"clip_id", c.clip_id},
              {"view", to_string(c.view)},
              {"t_start", c.t_start},
              {"t_end", c.t_end},
              {"fps", c.fps},
              {"resolution", c.resolution},
              {"lens", to_string(c.lens)},
              {"descriptors",
               {{"black_ratio", c.descriptors.black_ratio},
                {"motion_energy", c.descriptors.motion_energy},
                {"loudness", c.descriptors.loudness}}}};
}

ClipRecord clip_from_json(const Json& j) {
  ClipRecord c;
  c.clip_id = field<std::string>(j, "clip_id");
  c.view = stream_view_from_string(field<std::string>(j, "view"));
  c.t_start = field<double>(j, "t_start");
  c.t_end = field<double>(j, "t_end");
  c.fps = field<double>(j, "fps");
  c.resolution = field<std::string>(j, "resolution");
  c.lens = lens_kind_from_string(field<std::string>(j, "lens"));
  const auto d = field<Json>(j, "descriptors");
  c.descriptors = {field<double>(d, "black_ratio"), field<double>(d, "motion_energy"), field<double>(d, "loudness")};
  if (!(c.t_end > c.t_start)) fail(Errc::SchemaViolation, "clip " + c.clip_id + ": t_end must exceed t_start");
  if (c.descriptors.black_ratio < 0 || c.descriptors.black_ratio > 1 || c.descriptors.motion_energy < 0 ||
      c.descriptors.motion_energy > 1)
    fail(Errc::SchemaViolation, "clip " + c.clip_id + ": descriptor out of [0, 1]");
  return c;
}

void SegmenterConfig::validate() const {
  if (!(clip_len > 0.0)) fail(Errc::BadConfig, "clip_len must be > 0");
  if (!(overlap > 0.0 && overlap < clip_len)) fail(Errc::BadConfig, "overlap must satisfy 0 < overlap < clip_len");
  if (black_luma_threshold < 0 || black_luma_threshold > 255) fail(Errc::BadConfig, "black luma threshold out of range");
  if (!(black_pixel_fraction > 0.0 && black_pixel_fraction <= 1.0)) fail(Errc::BadConfig, "black pixel fraction out of range");
}

Json to_json(const SegmenterConfig& c) {
  return Json{{"clip_len", c.clip_len},
              {"overlap", c.overlap},
              {"black_luma_threshold", c.black_luma_threshold},
              {"black_pixel_fraction", c.black_pixel_fraction},
              {"silence_floor_dbfs", c.silence_floor_dbfs}};
}

SegmenterConfig segmenter_config_from_json(const Json& j) {
  SegmenterConfig c;
  c.clip_len = field_or<double>(j, "clip_len", c.clip_len, Errc::BadConfig);
  c.overlap = field_or<double>(j, "overlap", c.overlap, Errc::BadConfig);
  c.black_luma_threshold = field_or<int>(j, "black_luma_threshold", c.black_luma_threshold, Errc::BadConfig);
  c.black_pixel_fraction = field_or<double>(j, "black_pixel_fraction", c.black_pixel_fraction, Errc::BadConfig);
  c.silence_floor_dbfs = field_or<double>(j, "silence_floor_dbfs", c.silence_floor_dbfs, Errc::BadConfig);
  c.validate();
  return c;
}

std::vector<Span> plan_windows(double duration, const SegmenterConfig& config) {
  config.validate();
  if (!(duration > 0.0)) fail(Errc::BadConfig, "duration must be > 0");
  const double stride = config.clip_len - config.overlap;
  std::vector<Span> out;
  for (long k = 0;; ++k) {
    const double start = static_cast<double>(k) * stride;
    if (start >= duration) break;
    out.push_back({start, std::min(start + config.clip_len, duration)});
    if (out.back().end >= duration) break;
  }
  if (out.size() > 1 && out.back().length() < config.overlap) {
    out.pop_back();
    out.back().end = duration;
  }
  return out;
}

bool is_black_frame(const Image& frame, const SegmenterConfig& config) {
  const std::size_t n = frame.pixel_count();
  if (n == 0) return true;
  std::size_t dark = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = frame.rgb.data() + 3 * i;
    if (luma(p[0], p[1], p[2]) < config.black_luma_threshold) ++dark;
  }
  return static_cast<double>(dark) >= config.black_pixel_fraction * static_cast<double>(n);
}

double compute_black_ratio(std::span<const Image> frames, const SegmenterConfig& config) {
  if (frames.empty()) fail(Errc::EmptyWindow, "black ratio needs at least one frame");
  std::size_t black = 0;
  for (const auto& f : frames) black += is_black_frame(f, config) ? 1 : 0;
  return static_cast<double>(black) / static_cast<double>(frames.size());
}

double frame_difference(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) fail(Errc::BadConfig, "frame size changed within a stream");
  const std::size_t n = a.pixel_count();
  if (n == 0) return 0.0;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = a.rgb.data() + 3 * i;
    const auto* q = b.rgb.data() + 3 * i;
    sum += static_cast<std::uint64_t>(std::abs(luma(p[0], p[1], p[2]) - luma(q[0], q[1], q[2])));
  }
  return static_cast<double>(sum) / static_cast<double>(n) / 255.0;
}

double compute_motion_energy(std::span<const Image> frames) {
  if (frames.size() < 2) fail(Errc::TooFewFrames, "motion energy needs at least two frames");
  double total = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) total += frame_difference(frames[i - 1], frames[i]);
  return total / static_cast<double>(frames.size() - 1);
}

double compute_loudness(std::span<const float> samples, double floor_dbfs) {
  if (samples.empty()) fail(Errc::EmptyWindow, "loudness needs at least one sample");
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  const double rms = std::sqrt(acc / static_cast<double>(samples.size()));
  if (rms <= 0.0) return floor_dbfs;
  return std::max(floor_dbfs, 20.0 * std::log10(rms));
}

std::string make_clip_id(const std::string& session_id, StreamView view, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return session_id + "_" + std::string(to_string(view)) + "_" + buf;
}

std::vector<ClipRecord> segment_stream(const std::string& session_id, StreamView view, LensKind lens,
                                       const FrameSequence& frames, const PcmAudio& audio, double duration,
                                       const SegmenterConfig& config, std::size_t workers) {
  const auto windows = plan_windows(duration, config);
  std::string resolution = "0x0";
  if (frames.size() > 0) {
    const auto first = frames.load(0);
    resolution = std::to_string(first.image.width) + "x" + std::to_string(first.image.height);
  }
  const double fps = frames.fps();
  return parallel_map(windows.size(), workers, [&](std::size_t w) {
    const Span win = windows[w];
    ClipRecord c;
    c.clip_id = make_clip_id(session_id, view, static_cast<int>(w));
    c.view = view;
    c.t_start = win.start;
    c.t_end = win.end;
    c.fps = fps;
    c.resolution = resolution;
    c.lens = lens;

    std::vector<Image> images;
    for (auto i : frames.in_window(win.start, win.end)) images.push_back(frames.load(i).image);
    c.descriptors.black_ratio = images.empty() ? 1.0 : compute_black_ratio(images, config);
    c.descriptors.motion_energy = images.size() < 2 ? 0.0 : compute_motion_energy(images);

    const auto s0 = static_cast<std::size_t>(std::llround(win.start * audio.sample_rate));
    const auto s1 = static_cast<std::size_t>(std::llround(win.end * audio.sample_rate));
    const auto pcm = audio.normalized(s0, s1);
    c.descriptors.loudness = pcm.empty() ? config.silence_floor_dbfs : compute_loudness(pcm, config.silence_floor_dbfs);
    return c;
  });
}

}  // namespace gaze::segment
