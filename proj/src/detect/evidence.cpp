#include "gaze/detect/evidence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

namespace gaze::detect {

namespace {

constexpr std::array<std::pair<EvidenceClass, std::string_view>, 10> kClassNames{{
    {EvidenceClass::caption, "caption"},
    {EvidenceClass::activity_tag, "activity_tag"},
    {EvidenceClass::person_track, "person_track"},
    {EvidenceClass::pii, "pii"},
    {EvidenceClass::minor_risk, "minor_risk"},
    {EvidenceClass::nsfw, "nsfw"},
    {EvidenceClass::scene_change, "scene_change"},
    {EvidenceClass::high_motion, "high_motion"},
    {EvidenceClass::idle, "idle"},
    {EvidenceClass::clap_anchor, "clap_anchor"},
}};

constexpr std::array<std::pair<Action, std::string_view>, 8> kActionNames{{
    {Action::blur, "blur"},
    {Action::mute, "mute"},
    {Action::tone_replace, "tone_replace"},
    {Action::text_overlay, "text_overlay"},
    {Action::withhold, "withhold"},
    {Action::blur_and_review, "blur_and_review"},
    {Action::skip, "skip"},
    {Action::none, "none"},
}};

}  // namespace

std::string_view to_string(EvidenceClass c) {
  for (const auto& [k, v] : kClassNames)
    if (k == c) return v;
  return "caption";
}

EvidenceClass evidence_class_from_string(std::string_view s) {
  for (const auto& [k, v] : kClassNames)
    if (v == s) return k;
  fail(Errc::SchemaViolation, "unknown evidence class '" + std::string(s) + "'");
}

const std::vector<EvidenceClass>& all_evidence_classes() {
  static const std::vector<EvidenceClass> all = [] {
    std::vector<EvidenceClass> v;
    for (const auto& [k, _] : kClassNames) v.push_back(k);
    return v;
  }();
  return all;
}

bool is_governance(EvidenceClass c) {
  return c == EvidenceClass::pii || c == EvidenceClass::minor_risk || c == EvidenceClass::nsfw;
}

std::string_view to_string(Action a) {
  for (const auto& [k, v] : kActionNames)
    if (k == a) return v;
  return "none";
}

Action action_from_string(std::string_view s) {
  for (const auto& [k, v] : kActionNames)
    if (v == s) return k;
  fail(Errc::SchemaViolation, "unknown action '" + std::string(s) + "'");
}

int action_severity(Action a) {
  switch (a) {
    case Action::withhold: return 7;
    case Action::blur_and_review: return 6;
    case Action::blur: return 5;
    case Action::mute: return 4;
    case Action::tone_replace: return 3;
    case Action::text_overlay: return 2;
    case Action::skip: return 1;
    case Action::none: return 0;
  }
  return 0;
}

Json to_json(const EvidenceItem& e) {
  Json j{{"item_id", e.item_id},
         {"clip_id", e.clip_id},
         {"view", segment::to_string(e.view)},
         {"class", to_string(e.cls)},
         {"t_start", e.t_start},
         {"t_end", e.t_end},
         {"confidence", e.confidence},
         {"payload", e.payload},
         {"evidence_uris", e.evidence_uris},
         {"suggested_action", to_string(e.suggested_action)}};
  Json geometry = nullptr;
  if (e.box) geometry = Json{{"box", to_json(*e.box)}};
  if (e.mask_uri) {
    if (geometry.is_null()) geometry = Json::object();
    geometry["mask_uri"] = *e.mask_uri;
  }
  j["geometry"] = geometry;
  return j;
}

std::vector<std::string> evidence_problems(const EvidenceItem& e) {
  std::vector<std::string> out;
  if (e.item_id.empty()) out.push_back("item_id is empty");
  if (e.clip_id.empty()) out.push_back("clip_id is empty");
  if (!std::isfinite(e.t_start) || !std::isfinite(e.t_end) || e.t_start > e.t_end)
    out.push_back("t_start must be <= t_end");
  if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) out.push_back("confidence outside [0, 1]");
  if (e.evidence_uris.empty() && e.cls != EvidenceClass::idle && e.cls != EvidenceClass::clap_anchor)
    out.push_back("at least one evidence_uri is required for class " + std::string(to_string(e.cls)));
  if (e.box && (e.box->w < 0 || e.box->h < 0)) out.push_back("negative box extent");
  if (!e.payload.is_object()) out.push_back("payload must be an object");
  return out;
}

namespace {

EvidenceItem parse_unchecked(const Json& j) {
  EvidenceItem e;
  e.item_id = field<std::string>(j, "item_id");
  e.clip_id = field<std::string>(j, "clip_id");
  e.view = segment::stream_view_from_string(field<std::string>(j, "view"));
  e.cls = evidence_class_from_string(field<std::string>(j, "class"));
  e.t_start = field<double>(j, "t_start");
  e.t_end = field<double>(j, "t_end");
  e.confidence = field<double>(j, "confidence");
  e.payload = field_or<Json>(j, "payload", Json::object());
  e.evidence_uris = field_or<std::vector<std::string>>(j, "evidence_uris", {});
  e.suggested_action = action_from_string(field<std::string>(j, "suggested_action"));
  if (j.contains("geometry") && !j.at("geometry").is_null()) {
    const auto& g = j.at("geometry");
    if (!g.is_object()) fail(Errc::SchemaViolation, "geometry must be an object or null");
    if (g.contains("box")) e.box = box_from_json(g.at("box"));
    if (g.contains("mask_uri")) e.mask_uri = field<std::string>(g, "mask_uri");
  }
  return e;
}

}  // namespace

std::vector<std::string> evidence_problems(const Json& j) {
  try {
    return evidence_problems(parse_unchecked(j));
  } catch (const Error& err) {
    return {err.what()};
  }
}

EvidenceItem evidence_from_json(const Json& j) {
  auto e = parse_unchecked(j);
  const auto problems = evidence_problems(e);
  if (!problems.empty()) fail(Errc::SchemaViolation, "evidence " + e.item_id + ": " + problems.front());
  return e;
}

void sort_evidence(std::vector<EvidenceItem>& items) {
  std::sort(items.begin(), items.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
    return std::tie(a.clip_id, a.cls, a.t_start, a.t_end, a.item_id) <
           std::tie(b.clip_id, b.cls, b.t_start, b.t_end, b.item_id);
  });
}

}  // namespace gaze::detect
