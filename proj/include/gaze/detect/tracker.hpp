#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gaze/core/image.hpp"

namespace gaze::detect {

struct TrackerParams {
  double iou_threshold = 0.3;
  int age_out_frames = 30;  // delta
  double appearance_weight = 0.25;

  void validate() const;  // BadConfig
};

Json to_json(const TrackerParams& p);
TrackerParams tracker_params_from_json(const Json& j);

struct Detection {
  Box box;
  double score = 1.0;
  Eigen::VectorXf embedding;  // empty when unavailable
  std::optional<double> age;
};

struct FrameDetections {
  int frame = 0;
  double t = 0.0;
  std::vector<Detection> detections;
};

struct TrackPoint {
  int frame = 0;
  double t = 0.0;
  Box box;
  double score = 0.0;
  std::optional<double> age;
};

struct Keyframes {
  int entrance = 0;
  int peak = 0;
  int exit = 0;
};

struct Track {
  int track_id = 0;
  std::vector<TrackPoint> points;  // frame order
  double t_start = 0.0;
  double t_end = 0.0;
  Keyframes keyframes;
  double dwell_time = 0.0;
  int reentry_count = 0;
  Eigen::VectorXf embedding;  // normalized mean of matched embeddings; empty if none

  Box union_box() const;
  std::vector<double> ages() const;
};

Json to_json(const Track& t);

/// Score used for greedy matching; IoU alone unless both embeddings are present.
double match_score(const Box& track_box, const Eigen::VectorXf& track_emb, const Box& det_box,
                   const Eigen::VectorXf& det_emb, double appearance_weight);

/// Greedy one-to-one association per frame in descending match score. A track
/// last matched at frame L can still match at frame F while F - L <= delta + 1.
/// Throws UnorderedInput unless frame numbers strictly increase.
std::vector<Track> run_tracker(const std::vector<FrameDetections>& frames, const TrackerParams& params);

/// Deterministic order used for detections within one frame.
void canonical_sort(std::vector<Detection>& dets);

/// 3 channels x 8 horizontal strips x 8 intensity bins over the crop, L2-normalized.
/// Empty vector when the box misses the image.
Eigen::VectorXf appearance_embedding(const Image& frame, const Box& box);

/// Distinct tracks whose presence span meets each tumbling window [k w, (k+1) w).
std::vector<int> crowdness(const std::vector<Track>& tracks, double window, double duration);

}  // namespace gaze::detect
