#include "gaze/fusion/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "gaze/core/digest.hpp"

namespace gaze::fusion {

namespace fs = std::filesystem;

std::string_view to_string(ItemStatus s) {
  switch (s) {
    case ItemStatus::pending: return "pending";
    case ItemStatus::accepted: return "accepted";
    case ItemStatus::adjusted: return "adjusted";
    case ItemStatus::overridden: return "overridden";
    case ItemStatus::adjudication: return "adjudication";
  }
  return "pending";
}

ItemStatus item_status_from_string(std::string_view s) {
  for (auto v : {ItemStatus::pending, ItemStatus::accepted, ItemStatus::adjusted, ItemStatus::overridden,
                 ItemStatus::adjudication})
    if (to_string(v) == s) return v;
  fail(Errc::SchemaViolation, "unknown status '" + std::string(s) + "'");
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::idle: return "idle";
    case SkipReason::black: return "black";
    case SkipReason::silent: return "silent";
  }
  return "idle";
}

SkipReason skip_reason_from_string(std::string_view s) {
  if (s == "idle") return SkipReason::idle;
  if (s == "black") return SkipReason::black;
  if (s == "silent") return SkipReason::silent;
  fail(Errc::SchemaViolation, "unknown skip reason '" + std::string(s) + "'");
}

Json to_json(const Region& r) {
  return Json{{"view", segment::to_string(r.view)},
              {"box", to_json(r.box)},
              {"t_start", r.span.start},
              {"t_end", r.span.end},
              {"item_id", r.item_id}};
}

Region region_from_json(const Json& j) {
  return Region{segment::stream_view_from_string(field<std::string>(j, "view")), box_from_json(field<Json>(j, "box")),
                Span{field<double>(j, "t_start"), field<double>(j, "t_end")}, field_or<std::string>(j, "item_id", "")};
}

namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Json to_json(const TimelineItem& t) {
  Json views = Json::array();
  for (auto v : t.views) views.push_back(segment::to_string(v));
  Json regions = Json::array();
  for (const auto& r : t.regions) regions.push_back(to_json(r));
  return Json{{"timeline_id", t.timeline_id},
              {"class", detect::to_string(t.cls)},
              {"t_start", t.t_start},
              {"t_end", t.t_end},
              {"confidence", t.confidence},
              {"evidence_refs", t.evidence_refs},
              {"views", views},
              {"suggested_action", detect::to_string(t.suggested_action)},
              {"priority_rank", t.priority_rank},
              {"status", to_string(t.status)},
              {"regions", regions},
              {"labels", t.labels}};
}

TimelineItem timeline_item_from_json(const Json& j) {
  TimelineItem t;
  t.timeline_id = field<std::string>(j, "timeline_id");
  t.cls = detect::evidence_class_from_string(field<std::string>(j, "class"));
  t.t_start = field<double>(j, "t_start");
  t.t_end = field<double>(j, "t_end");
  t.confidence = field<double>(j, "confidence");
  t.evidence_refs = field<std::vector<std::string>>(j, "evidence_refs");
  for (const auto& v : field<std::vector<std::string>>(j, "views")) t.views.push_back(segment::stream_view_from_string(v));
  t.suggested_action = detect::action_from_string(field<std::string>(j, "suggested_action"));
  t.priority_rank = field<int>(j, "priority_rank");
  t.status = item_status_from_string(field<std::string>(j, "status"));
  for (const auto& r : field_or<Json>(j, "regions", Json::array())) t.regions.push_back(region_from_json(r));
  t.labels = field_or<std::vector<std::string>>(j, "labels", {});
  if (t.t_start > t.t_end) fail(Errc::SchemaViolation, "timeline item " + t.timeline_id + ": t_start > t_end");
  if (t.evidence_refs.empty()) fail(Errc::SchemaViolation, "timeline item " + t.timeline_id + ": no evidence_refs");
  if (!(t.confidence >= 0.0 && t.confidence <= 1.0))
    fail(Errc::SchemaViolation, "timeline item " + t.timeline_id + ": confidence outside [0, 1]");
  return t;
}

Json to_json(const SkipSpan& s) {
  return Json{{"t_start", s.t_start}, {"t_end", s.t_end}, {"reason", to_string(s.reason)}};
}

SkipSpan skip_span_from_json(const Json& j) {
  SkipSpan s{field<double>(j, "t_start"), field<double>(j, "t_end"), skip_reason_from_string(field<std::string>(j, "reason"))};
  if (!(s.t_start < s.t_end)) fail(Errc::SchemaViolation, "skip span must have t_start < t_end");
  return s;
}

FusionPolicy FusionPolicy::defaults() {
  FusionPolicy p;
  p.priority = {EvidenceClass::nsfw,         EvidenceClass::minor_risk,   EvidenceClass::pii,
                EvidenceClass::activity_tag, EvidenceClass::caption,      EvidenceClass::person_track,
                EvidenceClass::scene_change, EvidenceClass::high_motion,  EvidenceClass::clap_anchor,
                EvidenceClass::idle};
  for (auto c : detect::all_evidence_classes()) p.thresholds[c] = 0.5;
  p.thresholds[EvidenceClass::idle] = 0.0;
  p.thresholds[EvidenceClass::clap_anchor] = 0.0;
  p.thresholds[EvidenceClass::scene_change] = 0.3;
  p.default_actions = {{EvidenceClass::minor_risk, Action::blur_and_review},
                       {EvidenceClass::nsfw, Action::withhold},
                       {EvidenceClass::pii, Action::mute},
                       {EvidenceClass::idle, Action::skip}};
  return p;
}

void FusionPolicy::validate() const {
  for (const auto& [c, t] : thresholds)
    if (!(t >= 0.0 && t <= 1.0)) fail(Errc::PolicyInvalid, "threshold for " + std::string(detect::to_string(c)) + " outside [0, 1]");
  std::set<EvidenceClass> seen(priority.begin(), priority.end());
  if (seen.size() != priority.size() || seen.size() != detect::all_evidence_classes().size())
    fail(Errc::PolicyInvalid, "priority must list every class exactly once");
  if (!(gap_tolerance >= 0.0)) fail(Errc::PolicyInvalid, "gap_tolerance must be >= 0");
  if (!(min_skip_s >= 0.0)) fail(Errc::PolicyInvalid, "min_skip_s must be >= 0");
  if (!(dedup_time_iou > 0.0 && dedup_time_iou <= 1.0)) fail(Errc::PolicyInvalid, "dedup_time_iou must be in (0, 1]");
}

int FusionPolicy::priority_of(EvidenceClass c) const {
  const auto it = std::find(priority.begin(), priority.end(), c);
  return it == priority.end() ? static_cast<int>(priority.size()) : static_cast<int>(it - priority.begin());
}

double FusionPolicy::threshold(EvidenceClass c) const {
  const auto it = thresholds.find(c);
  return it == thresholds.end() ? 0.0 : it->second;
}

Json to_json(const FusionPolicy& p) {
  Json thresholds = Json::object();
  for (const auto& [c, t] : p.thresholds) thresholds[std::string(detect::to_string(c))] = t;
  Json priority = Json::array();
  for (auto c : p.priority) priority.push_back(detect::to_string(c));
  Json actions = Json::object();
  for (const auto& [c, a] : p.default_actions) actions[std::string(detect::to_string(c))] = detect::to_string(a);
  return Json{{"thresholds", thresholds},
              {"gap_tolerance", p.gap_tolerance},
              {"priority", priority},
              {"autoskip",
               {{"motion_energy_below", p.autoskip.motion_energy_below},
                {"loudness_below", p.autoskip.loudness_below},
                {"black_ratio_above", p.autoskip.black_ratio_above}}},
              {"default_actions", actions},
              {"min_skip_s", p.min_skip_s},
              {"dedup_time_iou", p.dedup_time_iou},
              {"reentry_cosine", p.reentry_cosine},
              {"reentry_window_s", p.reentry_window_s}};
}

FusionPolicy fusion_policy_from_json(const Json& j) {
  FusionPolicy p = FusionPolicy::defaults();
  if (!j.is_object()) fail(Errc::PolicyInvalid, "policy must be an object");
  try {
    if (j.contains("thresholds"))
      for (const auto& [k, v] : j.at("thresholds").items()) p.thresholds[detect::evidence_class_from_string(k)] = v.get<double>();
    if (j.contains("priority")) {
      p.priority.clear();
      for (const auto& c : j.at("priority")) p.priority.push_back(detect::evidence_class_from_string(c.get<std::string>()));
    }
    if (j.contains("default_actions")) {
      p.default_actions.clear();
      for (const auto& [k, v] : j.at("default_actions").items())
        p.default_actions[detect::evidence_class_from_string(k)] = detect::action_from_string(v.get<std::string>());
    }
    if (j.contains("autoskip")) {
      const auto& a = j.at("autoskip");
      p.autoskip.motion_energy_below = field_or<double>(a, "motion_energy_below", p.autoskip.motion_energy_below);
      p.autoskip.loudness_below = field_or<double>(a, "loudness_below", p.autoskip.loudness_below);
      p.autoskip.black_ratio_above = field_or<double>(a, "black_ratio_above", p.autoskip.black_ratio_above);
    }
    p.gap_tolerance = field_or<double>(j, "gap_tolerance", p.gap_tolerance);
    p.min_skip_s = field_or<double>(j, "min_skip_s", p.min_skip_s);
    p.dedup_time_iou = field_or<double>(j, "dedup_time_iou", p.dedup_time_iou);
    p.reentry_cosine = field_or<double>(j, "reentry_cosine", p.reentry_cosine);
    p.reentry_window_s = field_or<double>(j, "reentry_window_s", p.reentry_window_s);
  } catch (const Error& e) {
    fail(Errc::PolicyInvalid, e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::PolicyInvalid, e.what());
  }
  p.validate();
  return p;
}

bool is_timeline_class(EvidenceClass c) {
  return c != EvidenceClass::caption && c != EvidenceClass::person_track && c != EvidenceClass::clap_anchor;
}

ClipIndex::ClipIndex(const std::vector<segment::ClipRecord>& clips) {
  for (const auto& c : clips) clips_.emplace(c.clip_id, c);
}

const segment::ClipRecord& ClipIndex::at(const std::string& clip_id) const {
  const auto it = clips_.find(clip_id);
  if (it == clips_.end()) fail(Errc::UnknownClip, "unknown clip " + clip_id);
  return it->second;
}

double ClipIndex::to_session_time(const std::string& clip_id, double t) const { return at(clip_id).t_start + t; }

TimelineItem flag_from_evidence(const EvidenceItem& e, const ClipIndex& clips) {
  TimelineItem t;
  t.cls = e.cls;
  t.t_start = clips.to_session_time(e.clip_id, e.t_start);
  t.t_end = clips.to_session_time(e.clip_id, e.t_end);
  t.confidence = e.confidence;
  t.evidence_refs = {e.item_id};
  t.views = {e.view};
  t.suggested_action = e.suggested_action;
  if (e.box) t.regions.push_back({e.view, *e.box, t.span(), e.item_id});
  const auto& p = e.payload;
  if (p.is_object()) {
    for (const char* key : {"entity_type", "label", "reason"})
      if (p.contains(key) && p.at(key).is_string()) t.labels.push_back(p.at(key).get<std::string>());
  }
  return t;
}

namespace {

void absorb(TimelineItem& into, const TimelineItem& other) {
  into.t_start = std::min(into.t_start, other.t_start);
  into.t_end = std::max(into.t_end, other.t_end);
  into.confidence = std::max(into.confidence, other.confidence);
  into.evidence_refs.insert(into.evidence_refs.end(), other.evidence_refs.begin(), other.evidence_refs.end());
  into.views.insert(into.views.end(), other.views.begin(), other.views.end());
  sort_unique(into.views);
  into.regions.insert(into.regions.end(), other.regions.begin(), other.regions.end());
  into.labels.insert(into.labels.end(), other.labels.begin(), other.labels.end());
  sort_unique(into.labels);
  if (detect::action_severity(other.suggested_action) > detect::action_severity(into.suggested_action))
    into.suggested_action = other.suggested_action;
}

void canonical_order(std::vector<TimelineItem>& items) {
  std::sort(items.begin(), items.end(), [](const TimelineItem& a, const TimelineItem& b) {
    return std::tie(a.cls, a.t_start, a.t_end, a.evidence_refs) < std::tie(b.cls, b.t_start, b.t_end, b.evidence_refs);
  });
}

}  // namespace

std::vector<TimelineItem> merge_same_class(std::vector<TimelineItem> items, double gap_tolerance) {
  canonical_order(items);
  std::vector<TimelineItem> out;
  for (auto& it : items) {
    if (!out.empty() && out.back().cls == it.cls && it.t_start <= out.back().t_end + gap_tolerance) {
      absorb(out.back(), it);
    } else {
      out.push_back(std::move(it));
    }
  }
  for (auto& t : out) {
    std::sort(t.evidence_refs.begin(), t.evidence_refs.end());
    std::sort(t.regions.begin(), t.regions.end(), [](const Region& a, const Region& b) { return a.item_id < b.item_id; });
  }
  return out;
}

std::vector<TimelineItem> dedup_across_views(std::vector<TimelineItem> items, double min_iou) {
  bool changed = true;
  while (changed) {
    changed = false;
    canonical_order(items);
    for (std::size_t i = 0; i < items.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        if (items[j].cls != items[i].cls) break;
        if (items[j].t_start > items[i].t_end) break;
        if (items[i].views == items[j].views) continue;
        if (time_iou(items[i].span(), items[j].span()) < min_iou) continue;
        absorb(items[i], items[j]);
        std::sort(items[i].evidence_refs.begin(), items[i].evidence_refs.end());
        items.erase(items.begin() + static_cast<long>(j));
        changed = true;
        break;
      }
    }
  }
  return items;
}

std::string make_timeline_id(const TimelineItem& t) {
  auto refs = t.evidence_refs;
  std::sort(refs.begin(), refs.end());
  std::ostringstream os;
  os << detect::to_string(t.cls) << '|' << canonical_dump(round6(t.t_start)) << '|' << canonical_dump(round6(t.t_end));
  for (const auto& r : refs) os << '|' << r;
  return "tl_" + sha256_hex(os.str()).substr(0, 12);
}

void assign_priority(std::vector<TimelineItem>& items, const FusionPolicy& policy) {
  std::sort(items.begin(), items.end(), [&](const TimelineItem& a, const TimelineItem& b) {
    const int pa = policy.priority_of(a.cls), pb = policy.priority_of(b.cls);
    return std::tie(pa, a.t_start, a.timeline_id) < std::tie(pb, b.t_start, b.timeline_id);
  });
  for (std::size_t i = 0; i < items.size(); ++i) items[i].priority_rank = static_cast<int>(i) + 1;
}

namespace {

int reason_precedence(SkipReason r) {
  switch (r) {
    case SkipReason::black: return 2;
    case SkipReason::idle: return 1;
    case SkipReason::silent: return 0;
  }
  return 0;
}

Json session_evidence_json(const EvidenceItem& e, const ClipIndex& clips) {
  Json j = detect::to_json(e);
  j["t_start"] = clips.to_session_time(e.clip_id, e.t_start);
  j["t_end"] = clips.to_session_time(e.clip_id, e.t_end);
  return j;
}

double cosine(const Json& a, const Json& b) {
  if (!a.is_array() || !b.is_array() || a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i].get<double>(), y = b[i].get<double>();
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return (na > 0 && nb > 0) ? dot / std::sqrt(na * nb) : 0.0;
}

}  // namespace

FusionResult build_timeline(const std::vector<EvidenceItem>& evidence, const std::vector<segment::ClipRecord>& clips,
                            const FusionPolicy& policy, double duration, StreamView skip_view) {
  policy.validate();
  if (!(duration > 0.0)) fail(Errc::ZeroDuration, "session duration must be > 0");
  const ClipIndex index(clips);
  FusionResult r;

  std::vector<EvidenceItem> sorted = evidence;
  detect::sort_evidence(sorted);

  std::vector<TimelineItem> flags;
  std::vector<Span> protected_spans;
  std::vector<std::pair<Json, const EvidenceItem*>> context;
  for (const auto& e : sorted) {
    const auto problems = detect::evidence_problems(e);
    if (!problems.empty()) fail(Errc::SchemaViolation, "evidence " + e.item_id + ": " + problems.front());
    const double threshold = policy.threshold(e.cls);
    if (e.confidence < threshold) {
      r.suppressed.push_back({"below_threshold", Json{{"threshold", threshold}, {"evidence", session_evidence_json(e, index)}}});
      if (detect::is_governance(e.cls)) {
        const auto f = flag_from_evidence(e, index);
        protected_spans.push_back({f.t_start - policy.gap_tolerance, f.t_end + policy.gap_tolerance});
      }
      continue;
    }
    if (!is_timeline_class(e.cls)) {
      context.emplace_back(session_evidence_json(e, index), &e);
      continue;
    }
    auto f = flag_from_evidence(e, index);
    const auto it = policy.default_actions.find(e.cls);
    if (it != policy.default_actions.end()) f.suggested_action = it->second;
    flags.push_back(std::move(f));
  }

  // Per (class, view) union merge, then cross-view dedup.
  std::map<std::pair<EvidenceClass, StreamView>, std::vector<TimelineItem>> groups;
  for (auto& f : flags) groups[{f.cls, f.views.front()}].push_back(std::move(f));
  std::vector<TimelineItem> merged;
  for (auto& [key, group] : groups)
    for (auto& m : merge_same_class(std::move(group), policy.gap_tolerance)) merged.push_back(std::move(m));
  merged = dedup_across_views(std::move(merged), policy.dedup_time_iou);
  for (auto& m : merged) {
    m.t_start = std::max(0.0, m.t_start);
    m.t_end = std::min(duration, m.t_end);
    if (m.t_end < m.t_start) m.t_end = m.t_start;
    m.timeline_id = make_timeline_id(m);
  }

  // Low-salience sources: clip descriptors and idle flags.
  std::vector<std::pair<Span, SkipReason>> low;
  for (const auto& c : clips) {
    if (c.view != skip_view) continue;
    const auto& d = c.descriptors;
    if (d.black_ratio > policy.autoskip.black_ratio_above) low.push_back({c.span(), SkipReason::black});
    else if (d.motion_energy < policy.autoskip.motion_energy_below) low.push_back({c.span(), SkipReason::idle});
    else if (d.loudness < policy.autoskip.loudness_below) low.push_back({c.span(), SkipReason::silent});
  }
  for (const auto& m : merged) {
    if (detect::is_governance(m.cls)) protected_spans.push_back({m.t_start - policy.gap_tolerance, m.t_end + policy.gap_tolerance});
    if (m.cls != EvidenceClass::idle) continue;
    SkipReason reason = SkipReason::silent;
    bool any = false;
    for (const auto& l : m.labels) {
      const auto rr = skip_reason_from_string(l);
      if (!any || reason_precedence(rr) > reason_precedence(reason)) reason = rr;
      any = true;
    }
    low.push_back({m.span(), any ? reason : SkipReason::idle});
  }
  std::vector<Span> low_spans;
  for (const auto& [s, _] : low) low_spans.push_back({std::max(0.0, s.start), std::min(duration, s.end)});
  const auto candidates = subtract_spans(union_spans(low_spans), union_spans(protected_spans));
  for (const auto& s : candidates) {
    if (s.length() < policy.min_skip_s) continue;
    SkipReason reason = SkipReason::silent;
    bool any = false;
    for (const auto& [ls, lr] : low) {
      if (overlap_length(ls, s) <= 0.0) continue;
      if (!any || reason_precedence(lr) > reason_precedence(reason)) reason = lr;
      any = true;
    }
    r.skips.push_back({s.start, s.end, reason});
  }

  for (auto& m : merged) {
    if (m.cls == EvidenceClass::idle) {
      const bool skipped = std::any_of(r.skips.begin(), r.skips.end(), [&](const SkipSpan& s) {
        return intersects(m.span(), s.span()) || (m.t_start == m.t_end && m.t_start >= s.t_start && m.t_start < s.t_end);
      });
      if (skipped) {
        r.suppressed.push_back({"auto_skipped", Json{{"timeline_item", to_json(m)}}});
        continue;
      }
    }
    r.timeline.push_back(std::move(m));
  }
  assign_priority(r.timeline, policy);

  // Context: link person tracks that reappear shortly after another one ends.
  std::vector<std::size_t> persons;
  for (std::size_t i = 0; i < context.size(); ++i)
    if (context[i].second->cls == EvidenceClass::person_track) persons.push_back(i);
  std::stable_sort(persons.begin(), persons.end(), [&](std::size_t a, std::size_t b) {
    return context[a].first.at("t_start").get<double>() < context[b].first.at("t_start").get<double>();
  });
  std::map<std::size_t, int> reentries;
  for (std::size_t a = 0; a < persons.size(); ++a) {
    auto& cur = context[persons[a]].first;
    const double start = cur.at("t_start").get<double>();
    double best_end = -1.0;
    std::optional<std::size_t> link;
    for (std::size_t b = 0; b < persons.size(); ++b) {
      if (a == b) continue;
      const auto& prev = context[persons[b]].first;
      if (prev.at("view") != cur.at("view")) continue;
      const double end = prev.at("t_end").get<double>();
      if (end >= start || start - end > policy.reentry_window_s) continue;
      const auto& pp = prev.at("payload");
      const auto& cp = cur.at("payload");
      if (!pp.contains("embedding") || !cp.contains("embedding")) continue;
      if (cosine(pp.at("embedding"), cp.at("embedding")) < policy.reentry_cosine) continue;
      if (end > best_end) {
        best_end = end;
        link = b;
      }
    }
    if (link) {
      const int count = reentries[*link] + 1;
      reentries[a] = count;
      cur["payload"]["reentry_of"] = context[persons[*link]].first.at("item_id");
      cur["payload"]["reentry_count"] = count;
    }
  }
  for (auto& [j, _] : context) r.context.push_back(std::move(j));
  return r;
}

double review_volume_reduction(const std::vector<TimelineItem>& timeline, const std::vector<SkipSpan>& skips,
                               double duration) {
  if (!(duration > 0.0)) fail(Errc::ZeroDuration, "duration must be > 0");
  std::vector<Span> flagged, skipped;
  for (const auto& t : timeline) flagged.push_back({std::max(0.0, t.t_start), std::min(duration, t.t_end)});
  for (const auto& s : skips) skipped.push_back(s.span());
  const double watched = covered_length(subtract_spans(union_spans(flagged), union_spans(skipped)));
  return std::clamp(1.0 - watched / duration, 0.0, 1.0);
}

std::size_t conservativeness_violations(const std::vector<TimelineItem>& timeline, const std::vector<SkipSpan>& skips) {
  std::size_t n = 0;
  for (const auto& t : timeline) {
    if (!detect::is_governance(t.cls)) continue;
    for (const auto& s : skips) {
      const bool point_inside = t.t_start == t.t_end && t.t_start >= s.t_start && t.t_start <= s.t_end;
      if (intersects(t.span(), s.span()) || point_inside) ++n;
    }
  }
  return n;
}

void write_fusion_outputs(const fs::path& session_dir, const FusionResult& r) {
  std::vector<Json> lines;
  for (const auto& t : r.timeline) lines.push_back(to_json(t));
  write_jsonl(session_dir / "timeline.jsonl", lines);
  lines.clear();
  for (const auto& s : r.skips) lines.push_back(to_json(s));
  write_jsonl(session_dir / "skips.jsonl", lines);
  lines.clear();
  for (const auto& s : r.suppressed) {
    Json j = s.item;
    j["reason"] = s.reason;
    lines.push_back(std::move(j));
  }
  write_jsonl(session_dir / "suppressed.jsonl", lines);
  write_jsonl(session_dir / "context.jsonl", r.context);
}

std::vector<TimelineItem> load_timeline(const fs::path& path) {
  std::vector<TimelineItem> out;
  for (const auto& j : read_jsonl(path)) out.push_back(timeline_item_from_json(j));
  return out;
}

std::vector<SkipSpan> load_skips(const fs::path& path) {
  std::vector<SkipSpan> out;
  for (const auto& j : read_jsonl(path)) out.push_back(skip_span_from_json(j));
  return out;
}

}  // namespace gaze::fusion
