#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaze/core/json.hpp"

namespace gaze::review {

// Response layout:
// {
//   "metadata":   {"<topic>": {"video": "yes"|"no", "audio": "yes"|"no"}, ...},
//   "compliance": {"<topic>": {"video": ..., "audio": ...}, ...},
//   "comments":   {"video": "...", "audio": "..."}
// }
// compliance.pii may carry "audio_pii_types": ["NAME", ...]; compliance.minors and
// compliance.nudity may carry "video_interval": {"start": "MM:SS", "end": "MM:SS"}.

const std::vector<std::string>& metadata_topics();
const std::vector<std::string>& compliance_topics();

/// "MM:SS" with SS < 60; MM may exceed two digits.
std::optional<int> parse_mmss(std::string_view text);

/// Empty when the response is valid.
std::vector<std::string> questionnaire_problems(const Json& q);

/// Throws QuestionnaireInvalid with the first problem.
void validate_questionnaire(const Json& q);

/// A valid response with every answer "no" and empty comments.
Json questionnaire_template();

}  // namespace gaze::review
