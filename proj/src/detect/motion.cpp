#include "gaze/detect/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <tuple>

namespace gaze::detect {

Json to_json(const MotionParams& p) {
  return Json{{"cell_s", p.cell_s},
              {"idle_motion_below", p.idle_motion_below},
              {"silent_loudness_below", p.silent_loudness_below},
              {"black_ratio_above", p.black_ratio_above},
              {"high_motion_above", p.high_motion_above},
              {"scene_change_above", p.scene_change_above}};
}

MotionParams motion_params_from_json(const Json& j) {
  MotionParams p;
  p.cell_s = field_or<double>(j, "cell_s", p.cell_s, Errc::BadConfig);
  p.idle_motion_below = field_or<double>(j, "idle_motion_below", p.idle_motion_below, Errc::BadConfig);
  p.silent_loudness_below = field_or<double>(j, "silent_loudness_below", p.silent_loudness_below, Errc::BadConfig);
  p.black_ratio_above = field_or<double>(j, "black_ratio_above", p.black_ratio_above, Errc::BadConfig);
  p.high_motion_above = field_or<double>(j, "high_motion_above", p.high_motion_above, Errc::BadConfig);
  p.scene_change_above = field_or<double>(j, "scene_change_above", p.scene_change_above, Errc::BadConfig);
  if (!(p.cell_s > 0.0)) fail(Errc::BadConfig, "motion cell must be > 0");
  return p;
}

namespace {

struct Cell {
  Span span;  // clip time
  std::optional<double> black;
  std::optional<double> motion;
  std::optional<double> loudness;
  double peak_motion = 0.0;
  std::size_t first_frame = 0;
  bool has_frame = false;
};

const char* low_reason(const Cell& c, const MotionParams& p) {
  if (c.black && *c.black > p.black_ratio_above) return "black";
  if (c.motion && *c.motion < p.idle_motion_below) return "idle";
  if (c.loudness && *c.loudness < p.silent_loudness_below) return "silent";
  return nullptr;
}

}  // namespace

std::vector<EvidenceItem> run_motion_detector(const segment::ClipRecord& clip, std::span<const Frame> frames,
                                              std::span<const std::string> frame_uris, std::span<const float> audio,
                                              int sample_rate, const MotionParams& params,
                                              const segment::SegmenterConfig& seg) {
  const double len = clip.t_end - clip.t_start;
  const auto n_cells = static_cast<std::size_t>(std::ceil(len / params.cell_s - 1e-9));
  std::vector<Cell> cells(n_cells);
  for (std::size_t k = 0; k < n_cells; ++k)
    cells[k].span = {static_cast<double>(k) * params.cell_s, std::min(len, static_cast<double>(k + 1) * params.cell_s)};
  auto cell_of = [&](double t_clip) {
    return std::min(n_cells - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t_clip / params.cell_s))));
  };

  std::vector<double> diffs(frames.size(), 0.0);
  for (std::size_t i = 1; i < frames.size(); ++i) diffs[i] = segment::frame_difference(frames[i - 1].image, frames[i].image);

  std::vector<std::size_t> black_count(n_cells, 0), frame_count(n_cells, 0), pair_count(n_cells, 0);
  std::vector<double> motion_sum(n_cells, 0.0);
  for (std::size_t i = 0; i < frames.size() && n_cells > 0; ++i) {
    const auto k = cell_of(frames[i].t_seconds - clip.t_start);
    auto& c = cells[k];
    if (!c.has_frame) {
      c.has_frame = true;
      c.first_frame = i;
    }
    ++frame_count[k];
    black_count[k] += segment::is_black_frame(frames[i].image, seg) ? 1 : 0;
    if (i > 0) {
      ++pair_count[k];
      motion_sum[k] += diffs[i];
      c.peak_motion = std::max(c.peak_motion, diffs[i]);
    }
  }
  for (std::size_t k = 0; k < n_cells; ++k) {
    auto& c = cells[k];
    if (frame_count[k]) c.black = static_cast<double>(black_count[k]) / static_cast<double>(frame_count[k]);
    if (pair_count[k]) c.motion = motion_sum[k] / static_cast<double>(pair_count[k]);
    const auto s0 = static_cast<std::size_t>(std::llround(c.span.start * sample_rate));
    const auto s1 = std::min(audio.size(), static_cast<std::size_t>(std::llround(c.span.end * sample_rate)));
    if (s1 > s0) c.loudness = segment::compute_loudness(audio.subspan(s0, s1 - s0), seg.silence_floor_dbfs);
  }

  std::vector<EvidenceItem> out;
  auto make = [&](EvidenceClass cls, double t0, double t1, double conf, Action action) {
    EvidenceItem e;
    e.clip_id = clip.clip_id;
    e.view = clip.view;
    e.cls = cls;
    e.t_start = t0;
    e.t_end = t1;
    e.confidence = std::clamp(conf, 0.0, 1.0);
    e.suggested_action = action;
    return e;
  };

  // idle runs, split where the reason changes
  for (std::size_t k = 0; k < n_cells;) {
    const char* reason = low_reason(cells[k], params);
    if (!reason) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < n_cells) {
      const char* next = low_reason(cells[j + 1], params);
      if (!next || std::string_view(next) != reason) break;
      ++j;
    }
    auto e = make(EvidenceClass::idle, cells[k].span.start, cells[j].span.end, 1.0, Action::skip);
    e.payload = Json{{"reason", reason}};
    out.push_back(std::move(e));
    k = j + 1;
  }

  // high-motion runs
  for (std::size_t k = 0; k < n_cells;) {
    if (!(cells[k].motion && *cells[k].motion > params.high_motion_above)) {
      ++k;
      continue;
    }
    std::size_t j = k;
    double peak = cells[k].peak_motion;
    while (j + 1 < n_cells && cells[j + 1].motion && *cells[j + 1].motion > params.high_motion_above) {
      ++j;
      peak = std::max(peak, cells[j].peak_motion);
    }
    auto e = make(EvidenceClass::high_motion, cells[k].span.start, cells[j].span.end,
                  peak / (2.0 * params.high_motion_above), Action::none);
    e.payload = Json{{"peak_motion", peak}};
    if (cells[k].has_frame) e.evidence_uris.push_back(frame_uris[cells[k].first_frame]);
    else if (!frame_uris.empty()) e.evidence_uris.push_back(frame_uris.front());
    out.push_back(std::move(e));
    k = j + 1;
  }

  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (diffs[i] <= params.scene_change_above) continue;
    auto e = make(EvidenceClass::scene_change, frames[i - 1].t_seconds - clip.t_start, frames[i].t_seconds - clip.t_start,
                  diffs[i], Action::none);
    e.payload = Json{{"difference", diffs[i]}};
    e.evidence_uris = {frame_uris[i - 1], frame_uris[i]};
    out.push_back(std::move(e));
  }

  std::stable_sort(out.begin(), out.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
    return std::tie(a.cls, a.t_start, a.t_end) < std::tie(b.cls, b.t_start, b.t_end);
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", i);
    out[i].item_id = clip.clip_id + "/motion/" + buf;
  }
  return out;
}

}  // namespace gaze::detect
