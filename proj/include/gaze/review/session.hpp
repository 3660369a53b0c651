#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaze/core/time.hpp"
#include "gaze/fusion/timeline.hpp"
#include "gaze/review/audit.hpp"

namespace gaze::review {

using fusion::ItemStatus;
using fusion::Region;
using fusion::SkipSpan;
using fusion::TimelineItem;

enum class Operation { accept, adjust, override_ };
std::string_view to_string(Operation op);
Operation operation_from_string(std::string_view s);

enum class Rationale { FP, WRONG_EXTENT, WRONG_CLASS, POLICY_EXEMPT, OTHER };
std::string_view to_string(Rationale r);
/// Throws MissingRationale for anything outside the enumeration.
Rationale rationale_from_string(std::string_view s);

struct ReviewerAction {
  std::string timeline_id;
  Operation op = Operation::accept;
  std::optional<double> t_start;  // adjust
  std::optional<double> t_end;    // adjust
  std::optional<std::vector<Region>> regions;  // adjust
  std::optional<detect::Action> new_action;    // override
  std::optional<Rationale> rationale;          // override
  std::string reviewer_id;
  std::int64_t dwell_ms = 0;
};

Json to_json(const ReviewerAction& a);
/// Shape errors are SchemaViolation; an unknown rationale code is MissingRationale.
ReviewerAction reviewer_action_from_json(const Json& j);

struct ReviewConfig {
  double qa_fraction = 0.10;
  std::uint64_t qa_seed = 0;
  std::chrono::milliseconds lock_ttl = std::chrono::minutes(15);
  double duration = 0.0;  // session length; adjusted bounds must stay inside when > 0
  std::map<std::string, double> thresholds;  // class -> fusion threshold, for the nudge report
};

struct QaSample {
  std::vector<std::string> timeline_ids;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

struct QaOutcome {
  std::string timeline_id;
  std::string first_reviewer;
  std::string qa_reviewer;
  bool agree = true;
};

/// Cohen's kappa over (first, second) accept/reject judgments. Throws NoPairs.
double compute_iaa(const std::vector<std::pair<bool, bool>>& pairs);

struct FinalizeResult {
  std::vector<Json> final_labels;
  std::vector<std::string> reviewer_ids;
  std::string finalized_at;
};

/// Per-class override statistics and recommended thresholds. Never applied here.
Json threshold_report(const std::vector<Json>& final_labels, const std::map<std::string, double>& thresholds);

class ReviewSession {
 public:
  /// `review_dir` empty keeps everything in memory.
  ReviewSession(std::string session_id, std::vector<TimelineItem> timeline, std::vector<SkipSpan> skips, Clock clock,
                ReviewConfig cfg, std::filesystem::path review_dir = {});

  /// Restores <session_dir>/review/state.json if present, otherwise starts from
  /// timeline.jsonl and skips.jsonl.
  static std::unique_ptr<ReviewSession> open(const std::string& session_id, const std::filesystem::path& session_dir,
                                             Clock clock, ReviewConfig cfg);

  const std::string& id() const { return session_id_; }

  /// Current item states ordered by priority rank.
  std::vector<TimelineItem> timeline() const;
  std::vector<SkipSpan> skips() const;
  std::optional<TimelineItem> item(const std::string& timeline_id) const;
  TimelineItem original(const std::string& timeline_id) const;

  /// Lowest-rank pending item (then adjudication items) not locked by someone
  /// else and not inside a skip span; locks it to `reviewer`.
  std::optional<TimelineItem> next_item(const std::string& reviewer);

  AuditRecord apply_action(const ReviewerAction& action);

  QaSample draw_qa_sample(const std::string& reviewer, std::optional<double> fraction = std::nullopt,
                          std::optional<std::uint64_t> seed = std::nullopt);
  AuditRecord qa_review(const std::string& timeline_id, const std::string& reviewer, bool agree, std::int64_t dwell_ms);
  std::vector<QaOutcome> qa_outcomes() const;

  FinalizeResult finalize(const Json& questionnaire, const std::string& reviewer);
  bool finalized() const;

  std::vector<std::string> audit_lines() const;

  /// Sum of first-pass dwell over items; revisits and QA go to qa_dwell_ms.
  std::int64_t t_hitl_ms() const;
  std::int64_t qa_dwell_ms() const;
  std::map<std::string, std::int64_t> dwell_by_item() const;

  void on_finalize(std::function<void(const FinalizeResult&)> hook);

 private:
  struct ItemState {
    TimelineItem original;
    TimelineItem current;
    std::string locked_by;
    TimePoint locked_at{};
    std::string decided_by;
    std::optional<Rationale> rationale;
    std::int64_t dwell_ms = 0;
    std::int64_t qa_dwell_ms = 0;
    bool in_skip = false;
    bool qa_sampled = false;
    bool qa_reviewed = false;
    bool qa_agree = true;
    std::string qa_reviewer;
  };

  ItemState& state(const std::string& timeline_id);
  void expire_locks();
  AuditRecord append(AuditRecord r);
  void persist() const;
  Json state_json() const;
  void restore(const Json& j);

  std::string session_id_;
  std::vector<ItemState> items_;  // by priority rank
  std::map<std::string, std::size_t> index_;
  std::vector<SkipSpan> skips_;
  Clock clock_;
  ReviewConfig cfg_;
  std::filesystem::path dir_;
  AuditLog audit_;
  bool finalized_ = false;
  std::string finalized_at_;
  std::function<void(const FinalizeResult&)> finalize_hook_;
  mutable std::mutex mu_;
};

}  // namespace gaze::review
