#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaze/metrics/rtr.hpp"

namespace gaze::metrics {

struct SessionReport {
  std::string session_id;
  std::string domain;
  double t_watch_all_s = 0.0;
  double t_hitl_s = 0.0;
  double qa_dwell_s = 0.0;
  double idle_s = 0.0;
  double rtr = 0.0;
  double fp_minutes_per_hour = 0.0;
  double fp_occurrence_rate = 0.0;
  double review_volume_reduction = 0.0;
  std::size_t items = 0;
};

Json to_json(const SessionReport& r);

/// Reads timeline.jsonl, skips.jsonl, review/review_log.jsonl and
/// review/final_labels.jsonl from a session directory.
SessionReport build_session_report(const std::filesystem::path& session_dir, const std::string& session_id, double duration_s,
                                   const std::string& domain, const DwellParams& params = {});

struct ReportOptions {
  std::uint64_t seed = 0;
  std::size_t resamples = 10000;
  double level = 0.95;
  std::vector<SavingsFactor> factors = default_savings_factors();
};

/// {"sessions": [...], "batch": {...} | null, "savings": {...}}
Json build_report(const std::vector<SessionReport>& sessions, const ReportOptions& opts);

/// Fixed-width savings table: one row per factor, then combined and naive-sum rows.
std::string savings_table(const std::vector<SavingsFactor>& factors, const SavingsResult& r);

std::string report_text(const Json& report, const ReportOptions& opts);

}  // namespace gaze::metrics
