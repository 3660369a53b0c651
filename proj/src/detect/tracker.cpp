#include "gaze/detect/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace gaze::detect {

void TrackerParams::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) fail(Errc::BadConfig, "iou_threshold must be in (0, 1)");
  if (age_out_frames < 1) fail(Errc::BadConfig, "age_out_frames must be >= 1");
  if (!(appearance_weight >= 0.0 && appearance_weight <= 1.0)) fail(Errc::BadConfig, "appearance_weight must be in [0, 1]");
}

Json to_json(const TrackerParams& p) {
  return Json{{"iou_threshold", p.iou_threshold},
              {"age_out_frames", p.age_out_frames},
              {"appearance_weight", p.appearance_weight}};
}

TrackerParams tracker_params_from_json(const Json& j) {
  TrackerParams p;
  p.iou_threshold = field_or<double>(j, "iou_threshold", p.iou_threshold, Errc::BadConfig);
  p.age_out_frames = field_or<int>(j, "age_out_frames", p.age_out_frames, Errc::BadConfig);
  p.appearance_weight = field_or<double>(j, "appearance_weight", p.appearance_weight, Errc::BadConfig);
  p.validate();
  return p;
}

Box Track::union_box() const {
  if (points.empty()) return {};
  Box b = points.front().box;
  for (const auto& p : points) b = bounding_union(b, p.box);
  return b;
}

std::vector<double> Track::ages() const {
  std::vector<double> out;
  for (const auto& p : points)
    if (p.age) out.push_back(*p.age);
  return out;
}

Json to_json(const Track& t) {
  Json boxes = Json::array();
  for (const auto& p : t.points) boxes.push_back({{"frame", p.frame}, {"t", p.t}, {"box", to_json(p.box)}, {"score", p.score}});
  Json emb = Json::array();
  for (Eigen::Index i = 0; i < t.embedding.size(); ++i) emb.push_back(static_cast<double>(t.embedding[i]));
  return Json{{"track_id", t.track_id},
              {"boxes", boxes},
              {"t_start", t.t_start},
              {"t_end", t.t_end},
              {"keyframes", {{"entrance", t.keyframes.entrance}, {"peak", t.keyframes.peak}, {"exit", t.keyframes.exit}}},
              {"dwell_time", t.dwell_time},
              {"reentry_count", t.reentry_count},
              {"embedding", emb}};
}

double match_score(const Box& track_box, const Eigen::VectorXf& track_emb, const Box& det_box,
                   const Eigen::VectorXf& det_emb, double appearance_weight) {
  const double overlap = iou(track_box, det_box);
  if (track_emb.size() == 0 || det_emb.size() == 0 || track_emb.size() != det_emb.size()) return overlap;
  const double denom = static_cast<double>(track_emb.norm()) * det_emb.norm();
  const double cosine = denom > 0.0 ? static_cast<double>(track_emb.dot(det_emb)) / denom : 0.0;
  return (1.0 - appearance_weight) * overlap + appearance_weight * cosine;
}

void canonical_sort(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    const auto ka = std::tie(a.box.x, a.box.y, a.box.w, a.box.h, a.score);
    const auto kb = std::tie(b.box.x, b.box.y, b.box.w, b.box.h, b.score);
    if (ka != kb) return ka < kb;
    return std::lexicographical_compare(a.embedding.data(), a.embedding.data() + a.embedding.size(),
                                        b.embedding.data(), b.embedding.data() + b.embedding.size());
  });
}

namespace {

struct LiveTrack {
  Track track;
  int last_frame = 0;
  Box last_box;
  Eigen::VectorXf last_embedding;
  Eigen::VectorXf embedding_sum;
};

void extend(LiveTrack& lt, const FrameDetections& f, const Detection& d) {
  lt.track.points.push_back({f.frame, f.t, d.box, d.score, d.age});
  lt.last_frame = f.frame;
  lt.last_box = d.box;
  if (d.embedding.size() > 0) {
    lt.last_embedding = d.embedding;
    if (lt.embedding_sum.size() == 0) lt.embedding_sum = Eigen::VectorXf::Zero(d.embedding.size());
    if (lt.embedding_sum.size() == d.embedding.size()) lt.embedding_sum += d.embedding;
  }
}

void finish(Track& t, const Eigen::VectorXf& embedding_sum) {
  t.t_start = t.points.front().t;
  t.t_end = t.points.back().t;
  t.dwell_time = t.t_end - t.t_start;
  t.keyframes.entrance = t.points.front().frame;
  t.keyframes.exit = t.points.back().frame;
  double best = -1.0;
  for (const auto& p : t.points) {
    if (p.box.area() > best) {
      best = p.box.area();
      t.keyframes.peak = p.frame;
    }
  }
  t.reentry_count = 0;
  if (embedding_sum.size() > 0 && embedding_sum.norm() > 0.0f) t.embedding = embedding_sum.normalized();
}

}  // namespace

std::vector<Track> run_tracker(const std::vector<FrameDetections>& frames, const TrackerParams& params) {
  params.validate();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame <= frames[i - 1].frame || frames[i].t < frames[i - 1].t)
      fail(Errc::UnorderedInput, "tracker input frames must strictly increase");
  }

  std::vector<LiveTrack> live;
  std::vector<Track> done;
  int next_id = 1;
  const int reach = params.age_out_frames + 1;

  for (const auto& f : frames) {
    // Retire tracks that can no longer match.
    for (auto it = live.begin(); it != live.end();) {
      if (f.frame - it->last_frame > reach) {
        finish(it->track, it->embedding_sum);
        done.push_back(std::move(it->track));
        it = live.erase(it);
      } else {
        ++it;
      }
    }

    auto dets = f.detections;
    canonical_sort(dets);

    struct Candidate {
      double score;
      int track_id;
      std::size_t track_pos;
      std::size_t det;
    };
    std::vector<Candidate> candidates;
    for (std::size_t ti = 0; ti < live.size(); ++ti) {
      for (std::size_t di = 0; di < dets.size(); ++di) {
        if (iou(live[ti].last_box, dets[di].box) < params.iou_threshold) continue;
        candidates.push_back({match_score(live[ti].last_box, live[ti].last_embedding, dets[di].box, dets[di].embedding,
                                          params.appearance_weight),
                              live[ti].track.track_id, ti, di});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.track_id != b.track_id) return a.track_id < b.track_id;
      return a.det < b.det;
    });

    std::vector<bool> track_used(live.size(), false), det_used(dets.size(), false);
    for (const auto& c : candidates) {
      if (track_used[c.track_pos] || det_used[c.det]) continue;
      track_used[c.track_pos] = det_used[c.det] = true;
      extend(live[c.track_pos], f, dets[c.det]);
    }
    for (std::size_t di = 0; di < dets.size(); ++di) {
      if (det_used[di]) continue;
      LiveTrack lt;
      lt.track.track_id = next_id++;
      extend(lt, f, dets[di]);
      live.push_back(std::move(lt));
    }
  }
  for (auto& lt : live) {
    finish(lt.track, lt.embedding_sum);
    done.push_back(std::move(lt.track));
  }
  std::sort(done.begin(), done.end(), [](const Track& a, const Track& b) { return a.track_id < b.track_id; });
  return done;
}

Eigen::VectorXf appearance_embedding(const Image& frame, const Box& box) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(frame.width, static_cast<int>(std::ceil(box.right())));
  const int y1 = std::min(frame.height, static_cast<int>(std::ceil(box.bottom())));
  if (x1 <= x0 || y1 <= y0) return {};
  constexpr int kStrips = 8, kBins = 8;
  Eigen::VectorXf h = Eigen::VectorXf::Zero(3 * kStrips * kBins);
  const int rows = y1 - y0;
  for (int y = y0; y < y1; ++y) {
    const int strip = std::min(kStrips - 1, (y - y0) * kStrips / rows);
    for (int x = x0; x < x1; ++x) {
      const auto* p = frame.pixel(x, y);
      for (int c = 0; c < 3; ++c) h[(c * kStrips + strip) * kBins + p[c] / 32] += 1.0f;
    }
  }
  const float n = h.norm();
  if (n > 0.0f) h /= n;
  return h;
}

std::vector<int> crowdness(const std::vector<Track>& tracks, double window, double duration) {
  if (!(window > 0.0)) fail(Errc::BadConfig, "crowdness window must be > 0");
  if (!(duration > 0.0)) return {};
  const auto n = static_cast<std::size_t>(std::ceil(duration / window));
  std::vector<int> counts(n, 0);
  for (const auto& t : tracks) {
    if (t.points.empty()) continue;
    const auto first = static_cast<long>(std::floor(t.t_start / window));
    const auto last = static_cast<long>(std::floor(t.t_end / window));
    for (long k = std::max(0L, first); k <= last && k < static_cast<long>(n); ++k) ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

}  // namespace gaze::detect
