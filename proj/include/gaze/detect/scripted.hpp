#pragma once

// Fixture replay for the model-backed detector families. Fixture times are
// session seconds; emitted items are clipped to each clip and rebased to it.
//
// fixtures/captions.json  {"view"?, "captions": [{"t_start", "t_end", "text", "confidence",
//                          "frames": [{"t", "score"}]}]}
// fixtures/tags.json      {"view"?, "tags": [{"t_start", "t_end", "label", "confidence"}]}
// fixtures/nsfw.json      {"view"?, "scores": [{"t_start", "t_end", "score"}]}
// fixtures/faces.json     {"view"?, "frames": [{"t", "detections": [{"box", "score", "age"}]}]}
// fixtures/persons.json   {"view"?, "frames": [{"t", "detections": [{"box", "score"}]}]}
// fixtures/asr.json       {"segments": [{"speaker", "words": [{"text", "t_start", "t_end"}]}]}
//
// Boxes are [x, y, w, h] or {"x", "y", "w", "h"} in the pixel grid of the
// fixture's view.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gaze/detect/evidence.hpp"
#include "gaze/detect/pii.hpp"
#include "gaze/detect/tracker.hpp"

namespace gaze::detect {

enum class ScriptedKind { captions, tags, nsfw, faces, persons };
std::string_view to_string(ScriptedKind k);

/// Access to rendered frames for evidence links, embeddings and keyframe crops.
class FrameLookup {
 public:
  virtual ~FrameLookup() = default;
  /// URI of the frame nearest to session time `t`, if the view has frames.
  virtual std::optional<std::string> uri_at(StreamView view, double t) const = 0;
  virtual std::optional<Image> image_at(StreamView view, double t) const = 0;
};

struct ScriptedOptions {
  std::size_t caption_top_k = 3;
  double face_fps = 2.0;  // replay cadence for faces and persons
  double adult_threshold = 18.0;
  TrackerParams tracker;
  StreamView default_view = StreamView::front;
  const FrameLookup* frames = nullptr;
  /// Stores a keyframe crop and returns its URI; absent means no crops are written.
  std::function<std::string(const std::string& name, const Image& crop)> write_keyframe;
};

/// Portion of a session-time span inside the clip, rebased to clip time.
/// Zero-length spans count when they fall in [t_start, t_end).
std::optional<Span> clip_relative(const Span& session_span, const segment::ClipRecord& clip);

/// View a fixture applies to.
StreamView fixture_view(const Json& fixture, StreamView fallback);

/// Throws FixtureInvalid on schema problems.
std::vector<EvidenceItem> run_scripted_detector(ScriptedKind kind, const Json& fixture,
                                                const std::vector<segment::ClipRecord>& clips,
                                                const ScriptedOptions& options);

/// Per-clip tracks from a faces/persons fixture, in clip time.
std::vector<Track> replay_tracks(const Json& fixture, const segment::ClipRecord& clip, const ScriptedOptions& options,
                                 bool with_ages);

std::vector<TranscriptSegment> parse_asr_fixture(const Json& fixture);

/// Words fully inside the clip, rebased to clip time; empty segments dropped.
std::vector<TranscriptSegment> clip_transcript(const std::vector<TranscriptSegment>& session_segments,
                                               const segment::ClipRecord& clip);

}  // namespace gaze::detect
