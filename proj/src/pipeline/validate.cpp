#include "gaze/pipeline/validate.hpp"

#include <functional>

#include "gaze/core/digest.hpp"
#include "gaze/core/json.hpp"
#include "gaze/detect/evidence.hpp"
#include "gaze/detect/suite.hpp"
#include "gaze/export/redaction.hpp"
#include "gaze/fusion/timeline.hpp"
#include "gaze/ingest/provenance.hpp"
#include "gaze/metrics/rtr.hpp"
#include "gaze/review/audit.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::pipeline {

namespace fs = std::filesystem;

namespace {

using LineCheck = std::function<void(const Json&)>;

void require_keys(const Json& j, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(Errc::SchemaViolation, "expected a JSON object");
  for (const char* k : keys)
    if (!j.contains(k)) fail(Errc::SchemaViolation, std::string("missing field '") + k + "'");
}

class Checker {
 public:
  explicit Checker(fs::path root) : root_(std::move(root)) {}

  void jsonl(const std::string& rel, const LineCheck& check) {
    const fs::path p = root_ / rel;
    if (!fs::exists(p)) return;
    const std::string text = read_file(p);
    if (!text.empty() && text.back() != '\n') add(rel, 0, "file does not end with a newline");
    const auto lines = review::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        check(Json::parse(lines[i]));
      } catch (const std::exception& e) {
        add(rel, i + 1, e.what());
      }
    }
  }

  void json(const std::string& rel, const LineCheck& check) {
    const fs::path p = root_ / rel;
    if (!fs::exists(p)) return;
    try {
      check(Json::parse(read_file(p)));
    } catch (const std::exception& e) {
      add(rel, 0, e.what());
    }
  }

  void add(const std::string& file, std::size_t line, std::string message) { issues_.push_back({file, line, std::move(message)}); }

  const fs::path& root() const { return root_; }
  std::vector<ValidationIssue> take() { return std::move(issues_); }

 private:
  fs::path root_;
  std::vector<ValidationIssue> issues_;
};

void check_ledger(Checker& c, const std::string& rel, const fs::path& content_root) {
  c.json(rel, [&](const Json& j) {
    for (const auto& p : ingest::ledger_problems(j)) c.add(rel, 0, p);
    if (content_root.empty()) return;
    const auto ledger = ingest::ledger_from_json(j);
    for (const auto& e : ledger.entries) {
      const fs::path f = content_root / e.asset_id;
      if (!fs::exists(f)) {
        c.add(rel, 0, "listed file missing: " + e.asset_id);
      } else if (sha256_file(f) != e.content_hash) {
        c.add(rel, 0, "content hash mismatch: " + e.asset_id);
      } else if (fs::file_size(f) != e.byte_size) {
        c.add(rel, 0, "byte size mismatch: " + e.asset_id);
      }
    }
  });
}

}  // namespace

std::vector<ValidationIssue> validate_artifacts(const fs::path& session_dir) {
  Checker c(session_dir);
  if (!fs::is_directory(session_dir)) {
    c.add(".", 0, "session directory does not exist");
    return c.take();
  }

  c.json("session.json", [](const Json& j) {
    require_keys(j, {"session_id", "journal", "assets"});
    for (const auto& a : j.at("assets")) ingest::manifest_from_json(a);
  });
  check_ledger(c, "ledger.json", {});
  c.json("views.json", [](const Json& j) { require_keys(j, {"source", "primary_view", "views", "duration", "has_audio"}); });
  c.jsonl("clips.jsonl", [](const Json& j) { segment::clip_from_json(j); });

  for (const auto& f : detect::evidence_item_files())
    c.jsonl("evidence/" + f, [](const Json& j) { detect::evidence_from_json(j); });
  c.jsonl("evidence/asr.jsonl", [](const Json& j) { require_keys(j, {"clip_id"}); });
  c.jsonl("evidence/crowdness.jsonl", [](const Json& j) { require_keys(j, {"clip_id"}); });

  c.jsonl("timeline.jsonl", [](const Json& j) { fusion::timeline_item_from_json(j); });
  c.jsonl("context.jsonl", [](const Json& j) { detect::evidence_from_json(j); });
  c.jsonl("skips.jsonl", [](const Json& j) { fusion::skip_span_from_json(j); });
  c.jsonl("suppressed.jsonl", [](const Json& j) { require_keys(j, {"reason"}); });
  c.json("policy.json", [](const Json& j) { fusion::fusion_policy_from_json(j).validate(); });

  const fs::path audit = session_dir / "review" / "audit.jsonl";
  if (fs::exists(audit)) {
    if (const auto bad = review::verify_chain_file(audit)) c.add("review/audit.jsonl", bad->seq, bad->message);
  }
  c.jsonl("review/final_labels.jsonl", [](const Json& j) {
    require_keys(j, {"timeline_id", "class", "t_start", "t_end", "action", "actionable", "status", "original"});
    detect::action_from_string(j.at("action").get<std::string>());
    fusion::item_status_from_string(j.at("status").get<std::string>());
  });
  c.jsonl("review/review_log.jsonl", [](const Json& j) { metrics::review_log_entry_from_json(j); });

  c.jsonl("deliverable/plans.jsonl", [](const Json& j) { redact::validate_plan(redact::redaction_plan_from_json(j)); });
  c.json("deliverable/mapping.json", [](const Json& j) {
    require_keys(j, {"duration", "export_duration", "segments"});
    for (const auto& s : j.at("segments")) redact::mapping_segment_from_json(s);
  });
  c.json("deliverable/provenance.json", [](const Json& j) {
    require_keys(j, {"model_versions", "thresholds", "reviewer_ids", "software_build", "ledger_digest"});
  });
  if (fs::exists(session_dir / "deliverable")) check_ledger(c, "deliverable/export_ledger.json", session_dir / "deliverable");
  c.json("report.json", [](const Json& j) { require_keys(j, {"sessions", "savings"}); });
  return c.take();
}

std::string format_issue(const ValidationIssue& issue) {
  std::string s = issue.file;
  if (issue.line > 0) s += ":" + std::to_string(issue.line);
  return s + ": " + issue.message;
}

}  // namespace gaze::pipeline
