#include "gaze/metrics/report.hpp"

#include <cstdio>

#include "gaze/fusion/timeline.hpp"

namespace gaze::metrics {

namespace fs = std::filesystem;

Json to_json(const SessionReport& r) {
  return Json{{"session_id", r.session_id},
              {"domain", r.domain},
              {"t_watch_all_s", r.t_watch_all_s},
              {"t_hitl_s", r.t_hitl_s},
              {"qa_dwell_s", r.qa_dwell_s},
              {"idle_s", r.idle_s},
              {"rtr", r.rtr},
              {"fp_minutes_per_hour", r.fp_minutes_per_hour},
              {"fp_occurrence_rate", r.fp_occurrence_rate},
              {"review_volume_reduction", r.review_volume_reduction},
              {"items", r.items}};
}

SessionReport build_session_report(const fs::path& session_dir, const std::string& session_id, double duration_s,
                                   const std::string& domain, const DwellParams& params) {
  SessionReport r;
  r.session_id = session_id;
  r.domain = domain;
  r.t_watch_all_s = duration_s;
  const auto timeline = fusion::load_timeline(session_dir / "timeline.jsonl");
  const auto skips = fusion::load_skips(session_dir / "skips.jsonl");
  r.items = timeline.size();
  r.review_volume_reduction = fusion::review_volume_reduction(timeline, skips, duration_s);

  std::vector<Span> flagged, skip_spans;
  for (const auto& t : timeline) flagged.push_back(t.span());
  for (const auto& s : skips) skip_spans.push_back(s.span());
  std::vector<ReviewedItem> reviewed;
  const fs::path labels = session_dir / "review" / "final_labels.jsonl";
  if (fs::exists(labels)) {
    for (const auto& l : read_jsonl(labels)) {
      const Span s{field<double>(l, "t_start"), field<double>(l, "t_end")};
      flagged.push_back(s);
      reviewed.push_back({s.length(), l.value("rationale_code", Json(nullptr)) == "FP"});
    }
  }
  const fs::path log = session_dir / "review" / "review_log.jsonl";
  if (fs::exists(log)) {
    const auto d = compute_dwell(read_review_log(log), flagged, skip_spans, params);
    r.t_hitl_s = d.t_hitl_s;
    r.qa_dwell_s = d.qa_s;
    r.idle_s = d.idle_s;
  }
  r.rtr = rtr(r.t_hitl_s, duration_s);
  const auto fp = fp_burden(reviewed, duration_s);
  r.fp_minutes_per_hour = fp.fp_minutes_per_hour;
  r.fp_occurrence_rate = fp.occurrence_rate;
  return r;
}

Json build_report(const std::vector<SessionReport>& sessions, const ReportOptions& opts) {
  Json out;
  out["sessions"] = Json::array();
  std::vector<double> rtrs;
  for (const auto& s : sessions) {
    out["sessions"].push_back(to_json(s));
    rtrs.push_back(s.rtr);
  }
  if (rtrs.size() >= 2) {
    const auto ci = bootstrap_mean_ci(rtrs, opts.level, opts.resamples, opts.seed);
    out["batch"] = {{"mean_rtr", ci.mean}, {"ci_lo", ci.lo}, {"ci_hi", ci.hi}, {"level", opts.level},
                    {"resamples", opts.resamples}, {"seed", opts.seed}, {"n", rtrs.size()}};
  } else {
    out["batch"] = nullptr;
  }
  const auto sv = savings_model(opts.factors);
  Json factors = Json::array();
  for (std::size_t i = 0; i < opts.factors.size(); ++i)
    factors.push_back({{"name", opts.factors[i].name}, {"fraction", opts.factors[i].fraction}, {"minutes", sv.minutes_per_factor[i]}});
  out["savings"] = {{"factors", factors}, {"combined", sv.combined}, {"minutes_per_hour", sv.minutes_per_hour}, {"naive_sum", sv.naive_sum}};
  return out;
}

std::string savings_table(const std::vector<SavingsFactor>& factors, const SavingsResult& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %18s %20s\n", "Feature", "Review % savings", "Minutes saved (1h)");
  out += line;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    std::snprintf(line, sizeof line, "%-28s %17.1f%% %20.1f\n", factors[i].name.c_str(), 100.0 * factors[i].fraction,
                  r.minutes_per_factor[i]);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-28s %17.1f%% %20.1f\n", "combined (compounded)", 100.0 * r.combined, r.minutes_per_hour);
  out += line;
  std::snprintf(line, sizeof line, "%-28s %17.1f%% %20.1f\n", "naive sum", 100.0 * r.naive_sum, 60.0 * r.naive_sum);
  out += line;
  return out;
}

std::string report_text(const Json& report, const ReportOptions& opts) {
  std::string out = savings_table(opts.factors, savings_model(opts.factors));
  char line[200];
  for (const auto& s : report.at("sessions")) {
    std::snprintf(line, sizeof line, "session %s: T_watch_all %.1f s, T_HITL %.1f s, RTR %.4f, FP %.2f min/h (%.1f%%), volume reduction %.3f\n",
                  s.at("session_id").get<std::string>().c_str(), s.at("t_watch_all_s").get<double>(),
                  s.at("t_hitl_s").get<double>(), s.at("rtr").get<double>(), s.at("fp_minutes_per_hour").get<double>(),
                  100.0 * s.at("fp_occurrence_rate").get<double>(), s.at("review_volume_reduction").get<double>());
    out += line;
  }
  if (!report.at("batch").is_null()) {
    const auto& b = report.at("batch");
    std::snprintf(line, sizeof line, "batch mean RTR %.4f, %.0f%% CI [%.4f, %.4f] over %zu sessions\n", b.at("mean_rtr").get<double>(),
                  100.0 * b.at("level").get<double>(), b.at("ci_lo").get<double>(), b.at("ci_hi").get<double>(),
                  b.at("n").get<std::size_t>());
    out += line;
  }
  return out;
}

}  // namespace gaze::metrics
