#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaze/core/image.hpp"
#include "gaze/core/json.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::detect {

using segment::StreamView;

enum class EvidenceClass {
  caption,
  activity_tag,
  person_track,
  pii,
  minor_risk,
  nsfw,
  scene_change,
  high_motion,
  idle,
  clap_anchor,
};

std::string_view to_string(EvidenceClass c);
EvidenceClass evidence_class_from_string(std::string_view s);
const std::vector<EvidenceClass>& all_evidence_classes();

/// pii, minor_risk, nsfw
bool is_governance(EvidenceClass c);

enum class Action { blur, mute, tone_replace, text_overlay, withhold, blur_and_review, skip, none };

std::string_view to_string(Action a);
Action action_from_string(std::string_view s);

/// Higher is more restrictive; used when merged evidence disagrees.
int action_severity(Action a);

struct EvidenceItem {
  std::string item_id;
  std::string clip_id;
  StreamView view = StreamView::front;
  EvidenceClass cls = EvidenceClass::caption;
  double t_start = 0.0;  // clip-relative seconds
  double t_end = 0.0;
  double confidence = 0.0;
  std::optional<Box> box;
  std::optional<std::string> mask_uri;
  Json payload = Json::object();
  std::vector<std::string> evidence_uris;
  Action suggested_action = Action::none;
};

Json to_json(const EvidenceItem& e);

/// Parses and validates; any contract violation throws SchemaViolation.
EvidenceItem evidence_from_json(const Json& j);

/// Contract violations of an item; empty when valid.
std::vector<std::string> evidence_problems(const EvidenceItem& e);
std::vector<std::string> evidence_problems(const Json& j);

/// Canonical output order: (clip_id, class, t_start, t_end, item_id).
void sort_evidence(std::vector<EvidenceItem>& items);

}  // namespace gaze::detect
