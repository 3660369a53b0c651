#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaze/export/redaction.hpp"
#include "gaze/projection/render.hpp"

namespace gaze::redact {

struct ExportConfig {
  PlanKind visual_kind = PlanKind::blur;  // rendering for blur / blur_and_review actions
  RedactionParams params;
  std::size_t workers = 1;
  /// Rectilinear views of the session, used to carry their regions onto an ERP deliverable.
  std::vector<projection::ViewSpec> views;
};

struct ProvenanceBundle {
  std::map<std::string, std::string> model_versions;
  Json thresholds = Json::object();
  std::vector<std::string> reviewer_ids;
  std::string software_build;
  std::string ledger_digest;
};

Json to_json(const ProvenanceBundle& p);
/// SchemaViolation naming the first empty field.
void validate_provenance(const ProvenanceBundle& p);

struct MediaSource {
  std::filesystem::path frames_dir;  // frames.json + frame_%06d.ppm
  segment::StreamView view = segment::StreamView::front;
  std::optional<std::filesystem::path> audio;
  double duration = 0.0;
};

/// Plans for every actionable final label, sorted by plan_id ("<timeline_id>#<suffix>").
std::vector<RedactionPlan> plans_from_labels(const std::vector<Json>& final_labels, const ExportConfig& cfg,
                                             segment::StreamView target, int width, int height, double duration);

struct ExportSummary {
  std::vector<RedactionPlan> plans;
  std::vector<MappingSegment> mapping;
  std::size_t frames_written = 0;
  std::size_t frames_rendered = 0;
  std::size_t frames_withheld = 0;
  double export_duration = 0.0;
};

/// Reads <session_dir>/review; throws NotFinalized unless the review was finalized.
/// Writes frames/, audio.wav, mapping.json, plans.jsonl, provenance.json,
/// final_labels.jsonl and export_ledger.json into `out_dir` (replacing it).
ExportSummary export_session(const std::filesystem::path& session_dir, const MediaSource& media,
                             const ProvenanceBundle& provenance, const ExportConfig& cfg, const std::filesystem::path& out_dir);

/// Actionable governance labels whose exported time is not covered by one of their plans.
std::vector<std::string> unredacted_governance(const std::vector<Json>& final_labels,
                                               const std::vector<MappingSegment>& mapping);

}  // namespace gaze::redact
