#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaze/core/time.hpp"
#include "gaze/review/session.hpp"

namespace gaze::review {

// Headless review. Each script line is a ReviewerAction without timeline_id,
// applied to whatever next_item hands that reviewer:
//   {"reviewer_id": "r1", "operation": "adjust", "t_end": 12.5, "dwell_ms": 4000}
// Items left when the script runs out are accepted by `auto_reviewer`, who is
// charged the item's own length as dwell.
struct BatchOptions {
  std::string auto_reviewer = "auto";
  std::string qa_reviewer = "qa";
  bool run_qa = true;
};

struct BatchResult {
  FinalizeResult finalized;
  std::vector<Json> review_log;  // play/pause/action events
  std::size_t scripted = 0;
  std::size_t auto_accepted = 0;
  std::size_t qa_sampled = 0;
};

/// `clock` must be the clock the session was built with.
BatchResult run_batch_review(ReviewSession& session, const std::vector<Json>& script, const Json& questionnaire,
                             SteppingClock& clock, const BatchOptions& opts = {});

void write_review_log(const std::filesystem::path& path, const std::vector<Json>& events);

}  // namespace gaze::review
