#include "gaze/review/script.hpp"

#include <algorithm>
#include <cmath>

namespace gaze::review {

namespace {

struct LogWriter {
  const std::string& session_id;
  SteppingClock& clock;
  std::vector<Json>& out;

  void event(const std::string& reviewer, const std::string& timeline_id, const char* kind, double position) {
    out.push_back(Json{{"session_id", session_id},
                       {"reviewer_id", reviewer},
                       {"timeline_id", timeline_id},
                       {"event", kind},
                       {"t_wall", format_utc(clock.now())},
                       {"position", position}});
  }

  // Plays the item from its start for `dwell_ms`, then pauses.
  void watch(const std::string& reviewer, const TimelineItem& item, std::int64_t dwell_ms) {
    event(reviewer, item.timeline_id, "play", item.t_start);
    clock.advance(std::chrono::milliseconds(dwell_ms));
    event(reviewer, item.timeline_id, "pause", item.t_start + static_cast<double>(dwell_ms) / 1000.0);
  }
};

std::int64_t length_ms(const TimelineItem& t) { return std::llround((t.t_end - t.t_start) * 1000.0); }

}  // namespace

BatchResult run_batch_review(ReviewSession& session, const std::vector<Json>& script, const Json& questionnaire,
                             SteppingClock& clock, const BatchOptions& opts) {
  BatchResult res;
  LogWriter log{session.id(), clock, res.review_log};

  for (const auto& line : script) {
    Json j = line;
    const std::string reviewer = field<std::string>(j, "reviewer_id");
    const auto item = session.next_item(reviewer);
    if (!item) fail(Errc::InvalidTransition, "review script has more lines than reviewable items");
    j["timeline_id"] = item->timeline_id;
    const ReviewerAction a = reviewer_action_from_json(j);
    log.watch(reviewer, *item, a.dwell_ms);
    session.apply_action(a);
    log.event(reviewer, item->timeline_id, "action", item->t_start + static_cast<double>(a.dwell_ms) / 1000.0);
    ++res.scripted;
  }

  while (const auto item = session.next_item(opts.auto_reviewer)) {
    ReviewerAction a;
    a.timeline_id = item->timeline_id;
    a.reviewer_id = opts.auto_reviewer;
    a.dwell_ms = length_ms(*item);
    log.watch(a.reviewer_id, *item, a.dwell_ms);
    session.apply_action(a);
    log.event(a.reviewer_id, item->timeline_id, "action", item->t_end);
    ++res.auto_accepted;
  }

  const auto timeline = session.timeline();
  const bool any_accepted = std::any_of(timeline.begin(), timeline.end(),
                                        [](const TimelineItem& t) { return t.status == ItemStatus::accepted; });
  if (opts.run_qa && any_accepted) {
    const auto sample = session.draw_qa_sample(opts.qa_reviewer);
    res.qa_sampled = sample.timeline_ids.size();
    for (const auto& id : sample.timeline_ids) {
      const auto item = *session.item(id);
      const std::int64_t dwell = length_ms(item);
      log.watch(opts.qa_reviewer, item, dwell);
      session.qa_review(id, opts.qa_reviewer, true, dwell);
      log.event(opts.qa_reviewer, id, "action", item.t_end);
    }
  }

  res.finalized = session.finalize(questionnaire, opts.auto_reviewer);
  return res;
}

void write_review_log(const std::filesystem::path& path, const std::vector<Json>& events) { write_jsonl(path, events); }

}  // namespace gaze::review
