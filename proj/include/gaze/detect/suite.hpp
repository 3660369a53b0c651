#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaze/core/media_io.hpp"
#include "gaze/detect/claps.hpp"
#include "gaze/detect/motion.hpp"
#include "gaze/detect/pii.hpp"
#include "gaze/detect/scripted.hpp"
#include "gaze/detect/tracker.hpp"

namespace gaze::detect {

struct DetectorConfig {
  ClapParams claps;
  PiiPolicy pii;
  MotionParams motion;
  TrackerParams tracker;
  std::size_t caption_top_k = 3;
  double face_fps = 2.0;
  double adult_threshold = 18.0;
  double crowd_window_s = 60.0;
  /// Directory of *.jsonl files holding EvidenceItem lines from an outside detector.
  std::optional<std::filesystem::path> external_dir;
};

Json to_json(const DetectorConfig& c);
DetectorConfig detector_config_from_json(const Json& j);

/// Evidence files read by fusion, relative to the evidence directory.
const std::vector<std::string>& evidence_item_files();

/// Frames under <session>/views/<view>/, addressed by nearest timestamp.
class SessionFrames final : public FrameLookup {
 public:
  explicit SessionFrames(const std::filesystem::path& session_dir);

  std::optional<std::string> uri_at(StreamView view, double t) const override;
  std::optional<Image> image_at(StreamView view, double t) const override;

  const FrameSequence* sequence(StreamView view) const;
  /// Positions of frames with t in [t0, t1).
  std::vector<std::size_t> window(StreamView view, double t0, double t1) const;
  std::string uri(StreamView view, std::size_t pos) const;

 private:
  std::optional<std::size_t> nearest(StreamView view, double t) const;
  std::map<StreamView, FrameSequence> views_;
};

struct SuiteInputs {
  std::filesystem::path session_dir;  // outputs go to <session_dir>/evidence
  std::vector<segment::ClipRecord> clips;
  StreamView primary_view = StreamView::front;
  std::filesystem::path fixtures_dir;
  const PcmAudio* audio = nullptr;
  segment::SegmenterConfig segmenter;
};

/// Runs every detector over its clips as independent (clip, detector) tasks
/// and writes the evidence directory. Returns item counts per output file.
std::map<std::string, std::size_t> run_detector_suite(const SuiteInputs& in, const DetectorConfig& config,
                                                      std::size_t workers);

/// All EvidenceItems under an evidence directory, validated.
std::vector<EvidenceItem> load_evidence(const std::filesystem::path& evidence_dir);

}  // namespace gaze::detect
