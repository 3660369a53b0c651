#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gaze/core/interval.hpp"
#include "gaze/core/json.hpp"
#include "gaze/core/time.hpp"

namespace gaze::metrics {

enum class LogEvent { play, pause, seek, idle, action };
std::string_view to_string(LogEvent e);
LogEvent log_event_from_string(std::string_view s);

struct ReviewLogEntry {
  std::string session_id;
  std::string reviewer_id;
  std::optional<std::string> timeline_id;
  LogEvent event = LogEvent::play;
  TimePoint t_wall{};
  double position = 0.0;  // player position, seconds
};

Json to_json(const ReviewLogEntry& e);
ReviewLogEntry review_log_entry_from_json(const Json& j);
std::vector<ReviewLogEntry> read_review_log(const std::filesystem::path& path);

struct DwellParams {
  double idle_gap_s = 30.0;
};

struct DwellBreakdown {
  double t_hitl_s = 0.0;    // first-pass dwell on flagged, non-skipped positions
  double qa_s = 0.0;        // dwell on items that already had an action
  double idle_s = 0.0;      // stalled playback excluded as idle
};

/// Playback runs from a play event to the next event of the same reviewer and
/// advances the position at 1x. A run longer than the idle gap whose end
/// position did not move counts as idle. Only positions inside `flagged` and
/// outside `skips` count. Throws UnorderedLog when a reviewer's events go back in time.
DwellBreakdown compute_dwell(const std::vector<ReviewLogEntry>& log, const std::vector<Span>& flagged,
                             const std::vector<Span>& skips, const DwellParams& params = {});

/// 1 - t_hitl / t_watch_all. Throws ZeroDuration.
double rtr(double t_hitl, double t_watch_all);

struct BootstrapCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the mean. Resample b draws n indices with
/// Rng(seed).uniform_index(n) in order. lo/hi are the floor(a/2*B)-th and
/// (ceil((1-a/2)*B)-1)-th sorted resample means, a = 1 - level.
/// Throws TooFewSamples below two samples.
BootstrapCi bootstrap_mean_ci(const std::vector<double>& samples, double level = 0.95, std::size_t resamples = 10000,
                              std::uint64_t seed = 0);

struct ReviewedItem {
  double duration_s = 0.0;
  bool false_positive = false;
};

struct FpBurden {
  double fp_minutes_per_hour = 0.0;
  double occurrence_rate = 0.0;
};

/// Throws ZeroDuration.
FpBurden fp_burden(const std::vector<ReviewedItem>& items, double duration_s);

struct SavingsFactor {
  std::string name;
  double fraction = 0.0;
};

struct SavingsResult {
  std::vector<double> minutes_per_factor;  // 60 * f_i
  double combined = 0.0;                   // 1 - prod(1 - f_i)
  double minutes_per_hour = 0.0;           // 60 * combined
  double naive_sum = 0.0;                  // sum f_i
};

/// Throws FactorOutOfRange for a factor outside [0, 1).
SavingsResult savings_model(const std::vector<SavingsFactor>& factors);

const std::vector<SavingsFactor>& default_savings_factors();

struct SimulatedSession {
  std::vector<Span> flagged;
  std::vector<ReviewLogEntry> log;
  double target_dwell_s = 0.0;
};

/// One synthetic review: `dwell_s` of flagged content spread over a few flags,
/// each watched once, with seeks between flags and zero-playback idle events.
SimulatedSession simulate_session(const std::string& session_id, double watch_all_s, double dwell_s, std::uint64_t seed);

struct SimulatedBatch {
  std::vector<double> rtrs;
  std::vector<double> dwell_s;
};

/// `n` sessions (rounded up to even) in antithetic pairs around `mean_dwell_s`
/// with normal spread `sd_s`, each measured back through compute_dwell.
SimulatedBatch simulate_batch(std::size_t n, double watch_all_s, double mean_dwell_s, double sd_s, std::uint64_t seed);

}  // namespace gaze::metrics
