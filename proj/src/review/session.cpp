#include "gaze/review/session.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "gaze/core/digest.hpp"
#include "gaze/core/random.hpp"
#include "gaze/review/questionnaire.hpp"

namespace gaze::review {

namespace fs = std::filesystem;

std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::accept: return "accept";
    case Operation::adjust: return "adjust";
    case Operation::override_: return "override";
  }
  return "accept";
}

Operation operation_from_string(std::string_view s) {
  if (s == "accept") return Operation::accept;
  if (s == "adjust") return Operation::adjust;
  if (s == "override") return Operation::override_;
  fail(Errc::SchemaViolation, "unknown operation '" + std::string(s) + "'");
}

std::string_view to_string(Rationale r) {
  switch (r) {
    case Rationale::FP: return "FP";
    case Rationale::WRONG_EXTENT: return "WRONG_EXTENT";
    case Rationale::WRONG_CLASS: return "WRONG_CLASS";
    case Rationale::POLICY_EXEMPT: return "POLICY_EXEMPT";
    case Rationale::OTHER: return "OTHER";
  }
  return "OTHER";
}

Rationale rationale_from_string(std::string_view s) {
  for (auto r : {Rationale::FP, Rationale::WRONG_EXTENT, Rationale::WRONG_CLASS, Rationale::POLICY_EXEMPT, Rationale::OTHER})
    if (to_string(r) == s) return r;
  fail(Errc::MissingRationale, "unknown rationale code '" + std::string(s) + "'");
}

Json to_json(const ReviewerAction& a) {
  Json j{{"timeline_id", a.timeline_id},
         {"operation", to_string(a.op)},
         {"reviewer_id", a.reviewer_id},
         {"dwell_ms", a.dwell_ms}};
  if (a.t_start) j["t_start"] = *a.t_start;
  if (a.t_end) j["t_end"] = *a.t_end;
  if (a.regions) {
    j["regions"] = Json::array();
    for (const auto& r : *a.regions) j["regions"].push_back(fusion::to_json(r));
  }
  if (a.new_action) j["new_action"] = detect::to_string(*a.new_action);
  if (a.rationale) j["rationale_code"] = to_string(*a.rationale);
  return j;
}

ReviewerAction reviewer_action_from_json(const Json& j) {
  if (!j.is_object()) fail(Errc::SchemaViolation, "action must be an object");
  ReviewerAction a;
  a.timeline_id = field<std::string>(j, "timeline_id");
  a.op = operation_from_string(field<std::string>(j, "operation"));
  a.reviewer_id = field<std::string>(j, "reviewer_id");
  if (a.reviewer_id.empty()) fail(Errc::SchemaViolation, "reviewer_id must not be empty");
  a.dwell_ms = field_or<std::int64_t>(j, "dwell_ms", 0);
  if (a.dwell_ms < 0) fail(Errc::SchemaViolation, "dwell_ms must be >= 0");
  if (j.contains("t_start") && !j.at("t_start").is_null()) a.t_start = field<double>(j, "t_start");
  if (j.contains("t_end") && !j.at("t_end").is_null()) a.t_end = field<double>(j, "t_end");
  if (j.contains("regions") && !j.at("regions").is_null()) {
    std::vector<Region> regions;
    for (const auto& r : field<Json>(j, "regions")) regions.push_back(fusion::region_from_json(r));
    a.regions = std::move(regions);
  }
  if (j.contains("new_action") && !j.at("new_action").is_null())
    a.new_action = detect::action_from_string(field<std::string>(j, "new_action"));
  if (j.contains("rationale_code") && !j.at("rationale_code").is_null())
    a.rationale = rationale_from_string(field<std::string>(j, "rationale_code"));
  return a;
}

double compute_iaa(const std::vector<std::pair<bool, bool>>& pairs) {
  if (pairs.empty()) fail(Errc::NoPairs, "kappa needs at least one judgment pair");
  const double n = static_cast<double>(pairs.size());
  double agree = 0, yes1 = 0, yes2 = 0;
  for (const auto& [a, b] : pairs) {
    agree += a == b;
    yes1 += a;
    yes2 += b;
  }
  const double po = agree / n;
  const double pe = (yes1 / n) * (yes2 / n) + (1 - yes1 / n) * (1 - yes2 / n);
  if (pe >= 1.0) return 1.0;  // both raters constant and identical
  return (po - pe) / (1.0 - pe);
}

Json threshold_report(const std::vector<Json>& final_labels, const std::map<std::string, double>& thresholds) {
  struct Counts {
    int items = 0, overridden = 0, false_positive = 0;
  };
  std::map<std::string, Counts> by_class;
  for (const auto& l : final_labels) {
    auto& c = by_class[l.at("class").get<std::string>()];
    ++c.items;
    if (l.at("status") == "overridden") ++c.overridden;
    if (l.at("rationale_code") == "FP") ++c.false_positive;
  }
  Json classes = Json::object(), recommended = Json::object();
  for (const auto& [cls, c] : by_class) {
    const double fp_rate = c.items ? static_cast<double>(c.false_positive) / c.items : 0.0;
    const auto it = thresholds.find(cls);
    Json entry{{"items", c.items},
               {"overridden", c.overridden},
               {"false_positive", c.false_positive},
               {"override_rate", c.items ? static_cast<double>(c.overridden) / c.items : 0.0},
               {"false_positive_rate", fp_rate}};
    if (it != thresholds.end()) {
      entry["threshold"] = it->second;
      // a quarter or more of the flags rejected as false positives: tighten by one step
      const double next = fp_rate >= 0.25 ? std::min(1.0, it->second + 0.05) : it->second;
      recommended[cls] = round6(next);
    }
    classes[cls] = entry;
  }
  return Json{{"classes", classes}, {"recommended_thresholds", recommended}, {"applied", false}};
}

ReviewSession::ReviewSession(std::string session_id, std::vector<TimelineItem> timeline, std::vector<SkipSpan> skips,
                             Clock clock, ReviewConfig cfg, fs::path review_dir)
    : session_id_(std::move(session_id)), skips_(std::move(skips)), clock_(std::move(clock)), cfg_(std::move(cfg)),
      dir_(std::move(review_dir)) {
  std::sort(timeline.begin(), timeline.end(), [](const TimelineItem& a, const TimelineItem& b) {
    return std::tie(a.priority_rank, a.timeline_id) < std::tie(b.priority_rank, b.timeline_id);
  });
  for (auto& t : timeline) {
    if (index_.count(t.timeline_id)) fail(Errc::SchemaViolation, "duplicate timeline_id " + t.timeline_id);
    ItemState s;
    t.status = ItemStatus::pending;
    s.original = t;
    s.current = t;
    s.in_skip = std::any_of(skips_.begin(), skips_.end(), [&](const SkipSpan& k) { return intersects(t.span(), k.span()); });
    index_[t.timeline_id] = items_.size();
    items_.push_back(std::move(s));
  }
  if (!dir_.empty()) {
    fs::create_directories(dir_);
    for (const char* stale : {"audit.jsonl", "state.json", "final_labels.jsonl", "questionnaire.json", "threshold_report.json"})
      fs::remove(dir_ / stale);
    audit_ = AuditLog(dir_ / "audit.jsonl");
    persist();
  }
}

std::unique_ptr<ReviewSession> ReviewSession::open(const std::string& session_id, const fs::path& session_dir,
                                                   Clock clock, ReviewConfig cfg) {
  const fs::path review_dir = session_dir / "review";
  if (fs::exists(review_dir / "state.json")) {
    auto s = std::make_unique<ReviewSession>(session_id, std::vector<TimelineItem>{}, std::vector<SkipSpan>{}, std::move(clock),
                                             std::move(cfg));
    s->dir_ = review_dir;
    s->restore(load_json(review_dir / "state.json"));
    if (s->session_id_ != session_id) fail(Errc::SessionUnknown, "review state belongs to session " + s->session_id_);
    return s;
  }
  if (!fs::exists(session_dir / "timeline.jsonl")) fail(Errc::SessionUnknown, "no timeline for session " + session_id);
  auto timeline = fusion::load_timeline(session_dir / "timeline.jsonl");
  auto skips = fs::exists(session_dir / "skips.jsonl") ? fusion::load_skips(session_dir / "skips.jsonl") : std::vector<SkipSpan>{};
  return std::make_unique<ReviewSession>(session_id, std::move(timeline), std::move(skips), std::move(clock), std::move(cfg),
                                         review_dir);
}

ReviewSession::ItemState& ReviewSession::state(const std::string& timeline_id) {
  const auto it = index_.find(timeline_id);
  if (it == index_.end()) fail(Errc::SchemaViolation, "unknown timeline_id " + timeline_id);
  return items_[it->second];
}

AuditRecord ReviewSession::append(AuditRecord r) {
  r.timestamp = format_utc(clock_());
  return audit_.append(std::move(r));
}

void ReviewSession::expire_locks() {
  const TimePoint now = clock_();
  bool changed = false;
  for (auto& s : items_) {
    if (s.locked_by.empty() || now - s.locked_at < cfg_.lock_ttl) continue;
    AuditRecord r;
    r.reviewer_id = s.locked_by;
    r.operation = "lock_expired";
    r.timeline_id = s.current.timeline_id;
    r.pre_state = fusion::to_json(s.current);
    r.post_state = r.pre_state;
    r.detail = {{"locked_at", format_utc(s.locked_at)}};
    s.locked_by.clear();
    append(std::move(r));
    changed = true;
  }
  if (changed) persist();
}

std::vector<TimelineItem> ReviewSession::timeline() const {
  std::lock_guard lk(mu_);
  std::vector<TimelineItem> out;
  for (const auto& s : items_) out.push_back(s.current);
  return out;
}

std::vector<SkipSpan> ReviewSession::skips() const {
  std::lock_guard lk(mu_);
  return skips_;
}

std::optional<TimelineItem> ReviewSession::item(const std::string& timeline_id) const {
  std::lock_guard lk(mu_);
  const auto it = index_.find(timeline_id);
  if (it == index_.end()) return std::nullopt;
  return items_[it->second].current;
}

TimelineItem ReviewSession::original(const std::string& timeline_id) const {
  std::lock_guard lk(mu_);
  const auto it = index_.find(timeline_id);
  if (it == index_.end()) fail(Errc::SchemaViolation, "unknown timeline_id " + timeline_id);
  return items_[it->second].original;
}

std::optional<TimelineItem> ReviewSession::next_item(const std::string& reviewer) {
  std::lock_guard lk(mu_);
  if (reviewer.empty()) fail(Errc::SchemaViolation, "reviewer must not be empty");
  expire_locks();
  if (finalized_) return std::nullopt;
  const auto open = [](const ItemState& s) {
    return s.current.status == ItemStatus::pending || s.current.status == ItemStatus::adjudication;
  };
  for (auto& s : items_) {
    if (s.locked_by == reviewer && open(s)) {
      s.locked_at = clock_();
      persist();
      return s.current;
    }
  }
  for (auto wanted : {ItemStatus::pending, ItemStatus::adjudication}) {
    for (auto& s : items_) {
      if (s.current.status != wanted || s.in_skip || !s.locked_by.empty()) continue;
      s.locked_by = reviewer;
      s.locked_at = clock_();
      persist();
      return s.current;
    }
  }
  return std::nullopt;
}

AuditRecord ReviewSession::apply_action(const ReviewerAction& a) {
  std::lock_guard lk(mu_);
  expire_locks();
  if (finalized_) fail(Errc::InvalidTransition, "session is finalized");
  ItemState& s = state(a.timeline_id);
  if (s.locked_by != a.reviewer_id) fail(Errc::NotLocked, "item " + a.timeline_id + " is not locked by " + a.reviewer_id);
  const ItemStatus from = s.current.status;
  if (from != ItemStatus::pending && from != ItemStatus::adjudication)
    fail(Errc::InvalidTransition, "item " + a.timeline_id + " is " + std::string(fusion::to_string(from)));
  if (a.dwell_ms < 0) fail(Errc::SchemaViolation, "dwell_ms must be >= 0");

  TimelineItem next = s.current;
  switch (a.op) {
    case Operation::accept:
      next.status = ItemStatus::accepted;
      break;
    case Operation::adjust: {
      if (a.t_start) next.t_start = *a.t_start;
      if (a.t_end) next.t_end = *a.t_end;
      if (a.regions) next.regions = *a.regions;
      if (!(next.t_start >= 0.0 && next.t_start <= next.t_end))
        fail(Errc::InvalidTransition, "adjusted bounds must satisfy 0 <= t_start <= t_end");
      if (cfg_.duration > 0.0 && next.t_end > cfg_.duration)
        fail(Errc::InvalidTransition, "adjusted t_end is past the end of the session");
      if (next.t_start == s.current.t_start && next.t_end == s.current.t_end && next.regions == s.current.regions)
        fail(Errc::InvalidTransition, "adjust must change a bound or a region");
      next.status = ItemStatus::adjusted;
      break;
    }
    case Operation::override_:
      if (!a.rationale) fail(Errc::MissingRationale, "override requires a rationale_code");
      if (!a.new_action) fail(Errc::SchemaViolation, "override requires new_action");
      next.suggested_action = *a.new_action;
      next.status = ItemStatus::overridden;
      break;
  }

  AuditRecord r;
  r.reviewer_id = a.reviewer_id;
  r.operation = std::string(to_string(a.op));
  r.timeline_id = a.timeline_id;
  r.pre_state = fusion::to_json(s.current);
  r.post_state = fusion::to_json(next);
  r.rationale_code = a.rationale && a.op == Operation::override_ ? std::string(to_string(*a.rationale)) : "";
  r.dwell_ms = a.dwell_ms;
  r.detail = {{"revisit", from == ItemStatus::adjudication}};
  auto stored = append(std::move(r));

  if (from == ItemStatus::adjudication)
    s.qa_dwell_ms += a.dwell_ms;
  else
    s.dwell_ms += a.dwell_ms;
  s.current = std::move(next);
  s.decided_by = a.reviewer_id;
  s.rationale = a.op == Operation::override_ ? a.rationale : std::nullopt;
  s.locked_by.clear();
  persist();
  return stored;
}

QaSample ReviewSession::draw_qa_sample(const std::string& reviewer, std::optional<double> fraction,
                                       std::optional<std::uint64_t> seed) {
  std::lock_guard lk(mu_);
  expire_locks();
  if (finalized_) fail(Errc::InvalidTransition, "session is finalized");
  const double f = fraction.value_or(cfg_.qa_fraction);
  const std::uint64_t sd = seed.value_or(cfg_.qa_seed);
  if (!(f > 0.0 && f <= 1.0)) fail(Errc::SchemaViolation, "QA fraction must be in (0, 1]");
  std::vector<std::string> pool;
  for (const auto& s : items_)
    if (s.current.status == ItemStatus::accepted && !s.qa_sampled) pool.push_back(s.current.timeline_id);
  if (pool.empty()) fail(Errc::NothingAccepted, "no accepted items to sample");
  std::sort(pool.begin(), pool.end());
  // the epsilon keeps products such as 0.1 * 30 from rounding up to an extra item
  const auto n = static_cast<std::size_t>(std::ceil(f * static_cast<double>(pool.size()) - 1e-9));
  Rng rng(sd);
  for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  QaSample sample{{pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)}, f, sd};
  std::sort(sample.timeline_ids.begin(), sample.timeline_ids.end());
  for (const auto& id : sample.timeline_ids) state(id).qa_sampled = true;

  AuditRecord r;
  r.reviewer_id = reviewer;
  r.operation = "qa_draw";
  r.detail = {{"fraction", f}, {"seed", sd}, {"sampled", sample.timeline_ids}};
  append(std::move(r));
  persist();
  return sample;
}

AuditRecord ReviewSession::qa_review(const std::string& timeline_id, const std::string& reviewer, bool agree,
                                     std::int64_t dwell_ms) {
  std::lock_guard lk(mu_);
  expire_locks();
  if (finalized_) fail(Errc::InvalidTransition, "session is finalized");
  ItemState& s = state(timeline_id);
  if (!s.qa_sampled || s.qa_reviewed || s.current.status != ItemStatus::accepted)
    fail(Errc::InvalidTransition, "item " + timeline_id + " is not awaiting QA review");
  if (reviewer.empty() || reviewer == s.decided_by)
    fail(Errc::InvalidTransition, "QA review must come from a second reviewer");
  if (dwell_ms < 0) fail(Errc::SchemaViolation, "dwell_ms must be >= 0");

  TimelineItem next = s.current;
  if (!agree) next.status = ItemStatus::adjudication;
  AuditRecord r;
  r.reviewer_id = reviewer;
  r.operation = "qa_review";
  r.timeline_id = timeline_id;
  r.pre_state = fusion::to_json(s.current);
  r.post_state = fusion::to_json(next);
  r.dwell_ms = dwell_ms;
  r.detail = {{"agree", agree}, {"first_reviewer", s.decided_by}};
  auto stored = append(std::move(r));
  s.current = std::move(next);
  s.qa_reviewed = true;
  s.qa_agree = agree;
  s.qa_reviewer = reviewer;
  s.qa_dwell_ms += dwell_ms;
  persist();
  return stored;
}

std::vector<QaOutcome> ReviewSession::qa_outcomes() const {
  std::lock_guard lk(mu_);
  std::vector<QaOutcome> out;
  for (const auto& s : items_)
    if (s.qa_reviewed) out.push_back({s.current.timeline_id, s.decided_by, s.qa_reviewer, s.qa_agree});
  std::sort(out.begin(), out.end(), [](const QaOutcome& a, const QaOutcome& b) { return a.timeline_id < b.timeline_id; });
  return out;
}

FinalizeResult ReviewSession::finalize(const Json& questionnaire, const std::string& reviewer) {
  FinalizeResult result;
  {
    std::lock_guard lk(mu_);
    expire_locks();
    if (finalized_) fail(Errc::InvalidTransition, "session is already finalized");
    std::size_t open_items = 0;
    for (const auto& s : items_)
      if (!s.in_skip && (s.current.status == ItemStatus::pending || s.current.status == ItemStatus::adjudication)) ++open_items;
    if (open_items) fail(Errc::PendingItemsRemain, std::to_string(open_items) + " item(s) still need review");
    validate_questionnaire(questionnaire);

    std::set<std::string> reviewers;
    std::vector<std::string> unreviewed;
    for (const auto& s : items_) {
      if (s.current.status == ItemStatus::pending) {
        unreviewed.push_back(s.current.timeline_id);
        continue;
      }
      Json regions = Json::array();
      for (const auto& rg : s.current.regions) regions.push_back(fusion::to_json(rg));
      Json original_regions = Json::array();
      for (const auto& rg : s.original.regions) original_regions.push_back(fusion::to_json(rg));
      Json views = Json::array();
      for (auto v : s.current.views) views.push_back(segment::to_string(v));
      const detect::Action action = s.current.suggested_action;
      result.final_labels.push_back(Json{
          {"timeline_id", s.current.timeline_id},
          {"class", detect::to_string(s.current.cls)},
          {"t_start", s.current.t_start},
          {"t_end", s.current.t_end},
          {"confidence", s.current.confidence},
          {"evidence_refs", s.current.evidence_refs},
          {"views", views},
          {"labels", s.current.labels},
          {"regions", regions},
          {"action", detect::to_string(action)},
          {"actionable", action != detect::Action::none && action != detect::Action::skip},
          {"status", fusion::to_string(s.current.status)},
          {"rationale_code", s.rationale ? Json(std::string(to_string(*s.rationale))) : Json(nullptr)},
          {"reviewer_id", s.decided_by},
          {"priority_rank", s.current.priority_rank},
          {"original",
           {{"t_start", s.original.t_start},
            {"t_end", s.original.t_end},
            {"suggested_action", detect::to_string(s.original.suggested_action)},
            {"regions", original_regions}}}});
      reviewers.insert(s.decided_by);
      if (s.qa_reviewed) reviewers.insert(s.qa_reviewer);
    }
    result.reviewer_ids.assign(reviewers.begin(), reviewers.end());

    std::string labels_bytes;
    for (const auto& l : result.final_labels) labels_bytes += canonical_line(l) + "\n";
    const std::string questionnaire_bytes = canonical_dump(questionnaire) + "\n";
    const Json report = threshold_report(result.final_labels, cfg_.thresholds);

    AuditRecord r;
    r.reviewer_id = reviewer;
    r.operation = "finalize";
    r.detail = {{"final_labels_digest", sha256_hex(labels_bytes)},
                {"questionnaire_digest", sha256_hex(questionnaire_bytes)},
                {"reviewer_ids", result.reviewer_ids},
                {"items", result.final_labels.size()},
                {"unreviewed_in_skip", unreviewed}};
    const auto stored = append(std::move(r));
    result.finalized_at = stored.timestamp;
    finalized_ = true;
    finalized_at_ = stored.timestamp;
    if (!dir_.empty()) {
      write_file_atomic(dir_ / "final_labels.jsonl", labels_bytes);
      write_file_atomic(dir_ / "questionnaire.json", questionnaire_bytes);
      write_file_atomic(dir_ / "threshold_report.json", canonical_line(report) + "\n");
    }
    persist();
  }
  if (finalize_hook_) finalize_hook_(result);
  return result;
}

bool ReviewSession::finalized() const {
  std::lock_guard lk(mu_);
  return finalized_;
}

std::vector<std::string> ReviewSession::audit_lines() const {
  std::lock_guard lk(mu_);
  return audit_.lines();
}

std::int64_t ReviewSession::t_hitl_ms() const {
  std::lock_guard lk(mu_);
  std::int64_t total = 0;
  for (const auto& s : items_) total += s.dwell_ms;
  return total;
}

std::int64_t ReviewSession::qa_dwell_ms() const {
  std::lock_guard lk(mu_);
  std::int64_t total = 0;
  for (const auto& s : items_) total += s.qa_dwell_ms;
  return total;
}

std::map<std::string, std::int64_t> ReviewSession::dwell_by_item() const {
  std::lock_guard lk(mu_);
  std::map<std::string, std::int64_t> out;
  for (const auto& s : items_) out[s.current.timeline_id] = s.dwell_ms;
  return out;
}

void ReviewSession::on_finalize(std::function<void(const FinalizeResult&)> hook) {
  std::lock_guard lk(mu_);
  finalize_hook_ = std::move(hook);
}

Json ReviewSession::state_json() const {
  Json items = Json::array();
  for (const auto& s : items_) {
    items.push_back(Json{{"original", fusion::to_json(s.original)},
                         {"current", fusion::to_json(s.current)},
                         {"locked_by", s.locked_by},
                         {"locked_at", s.locked_by.empty() ? "" : format_utc(s.locked_at)},
                         {"decided_by", s.decided_by},
                         {"rationale_code", s.rationale ? Json(std::string(to_string(*s.rationale))) : Json(nullptr)},
                         {"dwell_ms", s.dwell_ms},
                         {"qa_dwell_ms", s.qa_dwell_ms},
                         {"in_skip", s.in_skip},
                         {"qa_sampled", s.qa_sampled},
                         {"qa_reviewed", s.qa_reviewed},
                         {"qa_agree", s.qa_agree},
                         {"qa_reviewer", s.qa_reviewer}});
  }
  Json skips = Json::array();
  for (const auto& k : skips_) skips.push_back(fusion::to_json(k));
  return Json{{"session_id", session_id_},
              {"finalized", finalized_},
              {"finalized_at", finalized_at_},
              {"items", items},
              {"skips", skips},
              {"audit_head", audit_.head_digest()},
              {"audit_length", audit_.size()}};
}

void ReviewSession::persist() const {
  if (dir_.empty()) return;
  write_file_atomic(dir_ / "state.json", canonical_dump(state_json()) + "\n");
}

void ReviewSession::restore(const Json& j) {
  session_id_ = field<std::string>(j, "session_id");
  finalized_ = field<bool>(j, "finalized");
  finalized_at_ = field<std::string>(j, "finalized_at");
  items_.clear();
  index_.clear();
  skips_.clear();
  for (const auto& k : field<Json>(j, "skips")) skips_.push_back(fusion::skip_span_from_json(k));
  for (const auto& e : field<Json>(j, "items")) {
    ItemState s;
    s.original = fusion::timeline_item_from_json(field<Json>(e, "original"));
    s.current = fusion::timeline_item_from_json(field<Json>(e, "current"));
    s.locked_by = field<std::string>(e, "locked_by");
    if (!s.locked_by.empty()) s.locked_at = parse_utc(field<std::string>(e, "locked_at"));
    s.decided_by = field<std::string>(e, "decided_by");
    if (!e.at("rationale_code").is_null()) s.rationale = rationale_from_string(field<std::string>(e, "rationale_code"));
    s.dwell_ms = field<std::int64_t>(e, "dwell_ms");
    s.qa_dwell_ms = field<std::int64_t>(e, "qa_dwell_ms");
    s.in_skip = field<bool>(e, "in_skip");
    s.qa_sampled = field<bool>(e, "qa_sampled");
    s.qa_reviewed = field<bool>(e, "qa_reviewed");
    s.qa_agree = field<bool>(e, "qa_agree");
    s.qa_reviewer = field<std::string>(e, "qa_reviewer");
    index_[s.current.timeline_id] = items_.size();
    items_.push_back(std::move(s));
  }
  audit_ = AuditLog(dir_ / "audit.jsonl");
  if (audit_.head_digest() != field<std::string>(j, "audit_head") || audit_.size() != field<std::uint64_t>(j, "audit_length"))
    fail(Errc::SchemaViolation, "review state does not match the audit log");
}

}  // namespace gaze::review
