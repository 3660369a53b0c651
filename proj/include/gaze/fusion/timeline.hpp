#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gaze/core/interval.hpp"
#include "gaze/detect/evidence.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::fusion {

using detect::Action;
using detect::EvidenceClass;
using detect::EvidenceItem;
using segment::StreamView;

enum class ItemStatus { pending, accepted, adjusted, overridden, adjudication };
std::string_view to_string(ItemStatus s);
ItemStatus item_status_from_string(std::string_view s);

enum class SkipReason { idle, black, silent };
std::string_view to_string(SkipReason r);
SkipReason skip_reason_from_string(std::string_view s);

/// Spatial support of a flag in one view's pixel grid.
struct Region {
  StreamView view = StreamView::front;
  Box box;
  Span span;  // session time
  std::string item_id;
  friend bool operator==(const Region&, const Region&) = default;
};

Json to_json(const Region& r);
Region region_from_json(const Json& j);

struct TimelineItem {
  std::string timeline_id;
  EvidenceClass cls = EvidenceClass::caption;
  double t_start = 0.0;
  double t_end = 0.0;
  double confidence = 0.0;
  std::vector<std::string> evidence_refs;
  std::vector<StreamView> views;  // sorted, unique
  Action suggested_action = Action::none;
  int priority_rank = 0;
  ItemStatus status = ItemStatus::pending;
  std::vector<Region> regions;
  std::vector<std::string> labels;  // sorted, unique (PII types, tag labels, idle reasons)

  Span span() const { return {t_start, t_end}; }
};

Json to_json(const TimelineItem& t);
TimelineItem timeline_item_from_json(const Json& j);

struct SkipSpan {
  double t_start = 0.0;
  double t_end = 0.0;
  SkipReason reason = SkipReason::idle;

  Span span() const { return {t_start, t_end}; }
};

Json to_json(const SkipSpan& s);
SkipSpan skip_span_from_json(const Json& j);

struct AutoskipThresholds {
  double motion_energy_below = 0.01;
  double loudness_below = -60.0;
  double black_ratio_above = 0.9;
};

struct FusionPolicy {
  std::map<EvidenceClass, double> thresholds;  // missing classes pass everything
  double gap_tolerance = 0.5;
  std::vector<EvidenceClass> priority;  // first = reviewed first; total over all classes
  AutoskipThresholds autoskip;
  std::map<EvidenceClass, Action> default_actions;
  double min_skip_s = 5.0;
  double dedup_time_iou = 0.5;
  double reentry_cosine = 0.8;
  double reentry_window_s = 60.0;

  static FusionPolicy defaults();
  void validate() const;  // PolicyInvalid
  int priority_of(EvidenceClass c) const;
  double threshold(EvidenceClass c) const;
};

Json to_json(const FusionPolicy& p);
FusionPolicy fusion_policy_from_json(const Json& j);

/// Classes placed on the reviewable timeline; the rest go to context.jsonl.
bool is_timeline_class(EvidenceClass c);

class ClipIndex {
 public:
  explicit ClipIndex(const std::vector<segment::ClipRecord>& clips);
  /// Throws UnknownClip.
  const segment::ClipRecord& at(const std::string& clip_id) const;
  double to_session_time(const std::string& clip_id, double t) const;

 private:
  std::map<std::string, segment::ClipRecord> clips_;
};

/// One single-constituent flag per evidence item, in session time.
TimelineItem flag_from_evidence(const EvidenceItem& e, const ClipIndex& clips);

/// Union-merge of same-class flags whose gap is at most `gap_tolerance`.
std::vector<TimelineItem> merge_same_class(std::vector<TimelineItem> items, double gap_tolerance);

/// Merges same-class flags from different view sets whose time IoU reaches `min_iou`.
std::vector<TimelineItem> dedup_across_views(std::vector<TimelineItem> items, double min_iou);

/// "tl_" + 12 hex chars over class, bounds and sorted evidence refs.
std::string make_timeline_id(const TimelineItem& t);

/// Orders by (class priority, t_start, timeline_id) and assigns ranks from 1.
void assign_priority(std::vector<TimelineItem>& items, const FusionPolicy& policy);

struct SuppressedItem {
  std::string reason;  // below_threshold | auto_skipped
  Json item;
};

struct FusionResult {
  std::vector<TimelineItem> timeline;
  std::vector<SkipSpan> skips;
  std::vector<SuppressedItem> suppressed;
  std::vector<Json> context;  // caption, person_track and clap_anchor evidence in session time
};

/// `skip_view` selects which clips' descriptors feed clip-level auto-skip.
/// Skips keep gap_tolerance away from every governance item, including those
/// dropped below threshold, and are at least min_skip_s long.
FusionResult build_timeline(const std::vector<EvidenceItem>& evidence, const std::vector<segment::ClipRecord>& clips,
                            const FusionPolicy& policy, double duration, StreamView skip_view);

/// 1 - (flagged time outside skip spans) / duration, overlaps counted once.
double review_volume_reduction(const std::vector<TimelineItem>& timeline, const std::vector<SkipSpan>& skips,
                               double duration);

/// Number of (governance item, skip span) pairs that intersect.
std::size_t conservativeness_violations(const std::vector<TimelineItem>& timeline, const std::vector<SkipSpan>& skips);

void write_fusion_outputs(const std::filesystem::path& session_dir, const FusionResult& r);
std::vector<TimelineItem> load_timeline(const std::filesystem::path& path);
std::vector<SkipSpan> load_skips(const std::filesystem::path& path);

}  // namespace gaze::fusion
