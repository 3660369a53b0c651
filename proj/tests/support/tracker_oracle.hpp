#pragma once

// Exhaustive per-frame optimal assignment with the same scoring and lifetime
// rules as the tracker, plus a random scene generator.

#include <functional>
#include <vector>

#include "gaze/core/random.hpp"
#include "gaze/detect/tracker.hpp"

namespace gaze::test {

struct OracleTrack {
  std::vector<std::pair<int, Box>> points;
};

inline double box_iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline std::vector<OracleTrack> oracle_tracker(const std::vector<detect::FrameDetections>& frames, double iou_threshold,
                                               int age_out) {
  struct Live {
    std::size_t idx;
    int last_frame;
    Box last_box;
  };
  std::vector<OracleTrack> tracks;
  std::vector<Live> live;
  for (const auto& f : frames) {
    std::erase_if(live, [&](const Live& l) { return f.frame - l.last_frame > age_out + 1; });
    auto dets = f.detections;
    detect::canonical_sort(dets);

    std::vector<int> best(live.size(), -1), cur(live.size(), -1);
    double best_score = -1.0;
    std::vector<bool> used(dets.size(), false);
    std::function<void(std::size_t, double)> search = [&](std::size_t t, double score) {
      if (t == live.size()) {
        if (score > best_score + 1e-12) {
          best_score = score;
          best = cur;
        }
        return;
      }
      for (std::size_t d = 0; d < dets.size(); ++d) {
        if (used[d]) continue;
        const double s = box_iou(live[t].last_box, dets[d].box);
        if (s < iou_threshold) continue;
        used[d] = true;
        cur[t] = static_cast<int>(d);
        search(t + 1, score + s);
        used[d] = false;
      }
      cur[t] = -1;
      search(t + 1, score);
    };
    search(0, 0.0);

    std::vector<bool> taken(dets.size(), false);
    for (std::size_t t = 0; t < live.size(); ++t) {
      if (best[t] < 0) continue;
      taken[best[t]] = true;
      tracks[live[t].idx].points.push_back({f.frame, dets[best[t]].box});
      live[t].last_frame = f.frame;
      live[t].last_box = dets[best[t]].box;
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (taken[d]) continue;
      tracks.push_back({{{f.frame, dets[d].box}}});
      live.push_back({tracks.size() - 1, f.frame, dets[d].box});
    }
  }
  return tracks;
}

inline bool same_tracks(const std::vector<detect::Track>& got, const std::vector<OracleTrack>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].points.size() != want[i].points.size()) return false;
    for (std::size_t k = 0; k < got[i].points.size(); ++k)
      if (got[i].points[k].frame != want[i].points[k].first || !(got[i].points[k].box == want[i].points[k].second)) return false;
  }
  return true;
}

struct Scene {
  std::vector<detect::FrameDetections> frames;
  bool crossing_free = false;
};

/// Up to 4 objects over up to 60 frames. Crossing-free scenes keep every
/// object in its own lane; the others send objects through a shared area.
inline Scene random_scene(Rng& rng, bool crossing_free) {
  Scene s;
  s.crossing_free = crossing_free;
  const int n_frames = 10 + static_cast<int>(rng.uniform_index(51));
  const int n_obj = 1 + static_cast<int>(rng.uniform_index(4));
  struct Obj {
    double x, y, vx, vy, w, h;
    int first, last;
  };
  std::vector<Obj> objs;
  for (int i = 0; i < n_obj; ++i) {
    Obj o;
    o.w = rng.uniform(20, 36);
    o.h = rng.uniform(20, 36);
    o.first = static_cast<int>(rng.uniform_index(n_frames / 2 + 1));
    o.last = o.first + static_cast<int>(rng.uniform_index(n_frames - o.first));
    if (crossing_free) {
      o.x = rng.uniform(0, 100);
      o.y = 60.0 * i;
      o.vx = rng.uniform(-2.5, 2.5);
      o.vy = 0.0;
    } else {
      o.x = rng.uniform(0, 120);
      o.y = rng.uniform(0, 120);
      o.vx = rng.uniform(-3, 3);
      o.vy = rng.uniform(-3, 3);
    }
    objs.push_back(o);
  }
  for (int f = 0; f < n_frames; ++f) {
    detect::FrameDetections fd;
    fd.frame = f;
    fd.t = f / 10.0;
    for (const auto& o : objs) {
      if (f < o.first || f > o.last) continue;
      if (rng.uniform01() < 0.08) continue;  // missed detection
      const double jx = std::round(rng.uniform(-1, 1) * 4) / 4, jy = std::round(rng.uniform(-1, 1) * 4) / 4;
      fd.detections.push_back({{o.x + o.vx * f + jx, o.y + o.vy * f + jy, o.w, o.h}, 0.9, {}, std::nullopt});
    }
    s.frames.push_back(std::move(fd));
  }
  return s;
}

}  // namespace gaze::test
