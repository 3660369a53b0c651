#include "gaze/metrics/rtr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gaze/core/random.hpp"

namespace gaze::metrics {

std::string_view to_string(LogEvent e) {
  switch (e) {
    case LogEvent::play: return "play";
    case LogEvent::pause: return "pause";
    case LogEvent::seek: return "seek";
    case LogEvent::idle: return "idle";
    case LogEvent::action: return "action";
  }
  return "play";
}

LogEvent log_event_from_string(std::string_view s) {
  for (auto e : {LogEvent::play, LogEvent::pause, LogEvent::seek, LogEvent::idle, LogEvent::action})
    if (to_string(e) == s) return e;
  fail(Errc::SchemaViolation, "unknown review log event '" + std::string(s) + "'");
}

Json to_json(const ReviewLogEntry& e) {
  return Json{{"session_id", e.session_id},
              {"reviewer_id", e.reviewer_id},
              {"timeline_id", e.timeline_id ? Json(*e.timeline_id) : Json(nullptr)},
              {"event", to_string(e.event)},
              {"t_wall", format_utc(e.t_wall)},
              {"position", e.position}};
}

ReviewLogEntry review_log_entry_from_json(const Json& j) {
  ReviewLogEntry e;
  e.session_id = field<std::string>(j, "session_id");
  e.reviewer_id = field<std::string>(j, "reviewer_id");
  if (j.contains("timeline_id") && !j.at("timeline_id").is_null()) e.timeline_id = field<std::string>(j, "timeline_id");
  e.event = log_event_from_string(field<std::string>(j, "event"));
  try {
    e.t_wall = parse_utc(field<std::string>(j, "t_wall"));
  } catch (const Error& err) {
    fail(Errc::SchemaViolation, std::string("bad t_wall: ") + err.what());
  }
  e.position = field<double>(j, "position");
  return e;
}

std::vector<ReviewLogEntry> read_review_log(const std::filesystem::path& path) {
  std::vector<ReviewLogEntry> out;
  for (const auto& j : read_jsonl(path)) out.push_back(review_log_entry_from_json(j));
  return out;
}

namespace {

double seconds(std::chrono::milliseconds d) { return static_cast<double>(d.count()) / 1000.0; }

double covered(const std::vector<Span>& countable, double a, double b) {
  double total = 0.0;
  for (const auto& s : countable) total += overlap_length(s, {a, b});
  return total;
}

}  // namespace

DwellBreakdown compute_dwell(const std::vector<ReviewLogEntry>& log, const std::vector<Span>& flagged,
                             const std::vector<Span>& skips, const DwellParams& params) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, TimePoint> last;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Key k{log[i].session_id, log[i].reviewer_id};
    const auto it = last.find(k);
    if (it != last.end() && log[i].t_wall < it->second)
      fail(Errc::UnorderedLog, "review log line " + std::to_string(i + 1) + " goes back in time for reviewer " + k.second);
    last[k] = log[i].t_wall;
  }

  std::vector<std::size_t> order(log.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return log[a].t_wall < log[b].t_wall; });

  const auto countable = subtract_spans(union_spans(flagged), union_spans(skips));
  struct Run {
    TimePoint wall;
    double position;
    std::optional<std::string> item;
  };
  std::map<Key, Run> open;
  std::set<std::pair<std::string, std::string>> acted;  // (session, timeline_id)
  DwellBreakdown out;

  for (const auto i : order) {
    const auto& e = log[i];
    const Key k{e.session_id, e.reviewer_id};
    if (const auto it = open.find(k); it != open.end()) {
      const Run& run = it->second;
      const double d = seconds(e.t_wall - run.wall);
      if (d > params.idle_gap_s && std::abs(e.position - run.position) < 1e-9) {
        out.idle_s += d;
      } else {
        const double c = covered(countable, run.position, run.position + d);
        if (run.item && acted.count({e.session_id, *run.item}))
          out.qa_s += c;
        else
          out.t_hitl_s += c;
      }
      open.erase(it);
    }
    if (e.event == LogEvent::play) open[k] = Run{e.t_wall, e.position, e.timeline_id};
    if (e.event == LogEvent::action && e.timeline_id) acted.insert({e.session_id, *e.timeline_id});
  }
  return out;
}

double rtr(double t_hitl, double t_watch_all) {
  if (!(t_watch_all > 0.0)) fail(Errc::ZeroDuration, "watch-all time must be positive");
  return 1.0 - t_hitl / t_watch_all;
}

BootstrapCi bootstrap_mean_ci(const std::vector<double>& samples, double level, std::size_t resamples, std::uint64_t seed) {
  if (samples.size() < 2) fail(Errc::TooFewSamples, "bootstrap needs at least two samples");
  if (!(level > 0.0 && level < 1.0)) fail(Errc::ConfigInvalid, "confidence level must be in (0, 1)");
  if (resamples == 0) fail(Errc::ConfigInvalid, "resamples must be >= 1");
  const std::size_t n = samples.size();
  const auto mean_of = [n](auto get) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += get(i);
    return s / static_cast<double>(n);
  };
  BootstrapCi ci;
  ci.mean = mean_of([&](std::size_t i) { return samples[i]; });
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) m = mean_of([&](std::size_t) { return samples[rng.uniform_index(n)]; });
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  const double b = static_cast<double>(resamples);
  // the 1e-9 keeps products like 0.975 * 10000 on the integer they denote
  const auto lo_idx = static_cast<std::size_t>(std::floor(alpha / 2.0 * b + 1e-9));
  const auto hi_idx = static_cast<std::size_t>(std::ceil((1.0 - alpha / 2.0) * b - 1e-9)) - 1;
  ci.lo = means[std::min(lo_idx, resamples - 1)];
  ci.hi = means[std::min(hi_idx, resamples - 1)];
  return ci;
}

FpBurden fp_burden(const std::vector<ReviewedItem>& items, double duration_s) {
  if (!(duration_s > 0.0)) fail(Errc::ZeroDuration, "duration must be positive");
  FpBurden b;
  double fp_seconds = 0.0;
  std::size_t fp_items = 0;
  for (const auto& it : items)
    if (it.false_positive) {
      fp_seconds += it.duration_s;
      ++fp_items;
    }
  b.fp_minutes_per_hour = (fp_seconds / 60.0) / (duration_s / 3600.0);
  b.occurrence_rate = items.empty() ? 0.0 : static_cast<double>(fp_items) / static_cast<double>(items.size());
  return b;
}

SavingsResult savings_model(const std::vector<SavingsFactor>& factors) {
  SavingsResult r;
  double keep = 1.0;
  for (const auto& f : factors) {
    if (!(f.fraction >= 0.0 && f.fraction < 1.0))
      fail(Errc::FactorOutOfRange, "factor " + f.name + " must be in [0, 1), got " + std::to_string(f.fraction));
    r.minutes_per_factor.push_back(60.0 * f.fraction);
    r.naive_sum += f.fraction;
    keep *= 1.0 - f.fraction;
  }
  r.combined = 1.0 - keep;
  r.minutes_per_hour = 60.0 * r.combined;
  return r;
}

const std::vector<SavingsFactor>& default_savings_factors() {
  static const std::vector<SavingsFactor> f{
      {"format_conversion", 0.05}, {"clip_chunking", 0.10}, {"empty_idle_skip", 0.08}, {"sensitive_triage", 0.12}};
  return f;
}

SimulatedSession simulate_session(const std::string& session_id, double watch_all_s, double dwell_s, std::uint64_t seed) {
  if (!(watch_all_s > 0.0) || dwell_s < 0.0 || dwell_s > watch_all_s)
    fail(Errc::ConfigInvalid, "simulated dwell must lie in [0, watch_all]");
  Rng rng(seed);
  const std::int64_t total_ms = std::llround(watch_all_s * 1000.0);
  const std::int64_t dwell_ms = std::llround(dwell_s * 1000.0);
  const std::size_t m = 4 + rng.uniform_index(5);

  // integer-millisecond partition of `amount` into `parts` random pieces
  const auto split = [&rng](std::int64_t amount, std::size_t parts) {
    std::vector<double> w(parts);
    double sum = 0.0;
    for (auto& x : w) sum += (x = 0.1 + rng.uniform01());
    std::vector<std::int64_t> out(parts);
    std::int64_t used = 0;
    for (std::size_t i = 0; i + 1 < parts; ++i) used += (out[i] = static_cast<std::int64_t>(std::floor(amount * w[i] / sum)));
    out.back() = amount - used;
    return out;
  };
  const auto lengths = split(dwell_ms, m);
  const auto gaps = split(total_ms - dwell_ms, m + 1);

  SimulatedSession s;
  s.target_dwell_s = static_cast<double>(dwell_ms) / 1000.0;
  TimePoint wall = parse_utc("2024-01-01T00:00:00Z");
  const std::string reviewer = "sim_reviewer";
  const auto push = [&](LogEvent ev, std::optional<std::string> item, std::int64_t pos_ms) {
    s.log.push_back({session_id, reviewer, std::move(item), ev, wall, static_cast<double>(pos_ms) / 1000.0});
  };
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < m; ++i) {
    pos += gaps[i];
    const std::string id = "sim_" + std::to_string(i);
    s.flagged.push_back({static_cast<double>(pos) / 1000.0, static_cast<double>(pos + lengths[i]) / 1000.0});
    push(LogEvent::seek, std::nullopt, pos);
    push(LogEvent::play, id, pos);
    std::int64_t watched = 0;
    if (rng.uniform01() < 0.5 && lengths[i] > 1) {
      // an idle marker with no playback lost: the run resumes where it stopped
      watched = lengths[i] / 2;
      wall += std::chrono::milliseconds(watched);
      push(LogEvent::idle, id, pos + watched);
      push(LogEvent::play, id, pos + watched);
    }
    wall += std::chrono::milliseconds(lengths[i] - watched);
    push(LogEvent::pause, id, pos + lengths[i]);
    wall += std::chrono::milliseconds(2000 + static_cast<std::int64_t>(rng.uniform_index(8000)));
    push(LogEvent::action, id, pos + lengths[i]);
    pos += lengths[i];
  }
  return s;
}

SimulatedBatch simulate_batch(std::size_t n, double watch_all_s, double mean_dwell_s, double sd_s, std::uint64_t seed) {
  Rng rng(seed);
  SimulatedBatch b;
  const std::int64_t mean_ms = std::llround(mean_dwell_s * 1000.0);
  const std::int64_t cap_ms = std::llround(watch_all_s * 1000.0);
  for (std::size_t pair = 0; pair < (n + 1) / 2; ++pair) {
    const auto delta = static_cast<std::int64_t>(std::llround(rng.normal() * sd_s * 1000.0));
    const std::int64_t d = std::clamp(delta, -std::min(mean_ms, cap_ms - mean_ms), std::min(mean_ms, cap_ms - mean_ms));
    for (const std::int64_t dwell_ms : {mean_ms + d, mean_ms - d}) {
      const std::string id = "sim_session_" + std::to_string(b.rtrs.size());
      const auto s = simulate_session(id, watch_all_s, static_cast<double>(dwell_ms) / 1000.0, rng.next_u64());
      const double measured = compute_dwell(s.log, s.flagged, {}).t_hitl_s;
      b.dwell_s.push_back(measured);
      b.rtrs.push_back(rtr(measured, watch_all_s));
    }
  }
  return b;
}

}  // namespace gaze::metrics
