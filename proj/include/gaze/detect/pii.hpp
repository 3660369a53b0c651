#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaze/core/interval.hpp"
#include "gaze/core/json.hpp"

namespace gaze::detect {

struct Word {
  std::string text;
  double t_start = 0.0;
  double t_end = 0.0;
};

enum class TranscriptSource { scripted, external };

struct TranscriptSegment {
  std::string speaker;
  std::vector<Word> words;
  TranscriptSource source = TranscriptSource::scripted;

  /// Words joined by single spaces.
  std::string text() const;
};

Json to_json(const TranscriptSegment& s);
/// Throws FixtureInvalid when word times are not monotone.
TranscriptSegment transcript_from_json(const Json& j);

enum class PiiType { NAME, PHONE, EMAIL, ADDRESS, ID, CUSTOM };
std::string_view to_string(PiiType t);
PiiType pii_type_from_string(std::string_view s);

enum class RedactionPlanKind { mute_window, tone_replace, text_overlay };
std::string_view to_string(RedactionPlanKind k);
RedactionPlanKind redaction_plan_from_string(std::string_view s);

struct PiiPolicy {
  std::vector<std::string> names;
  std::vector<std::string> addresses;
  std::vector<std::string> custom;
  double pad_s = 0.25;
  RedactionPlanKind plan = RedactionPlanKind::mute_window;

  void validate() const;  // PolicyInvalid
};

Json to_json(const PiiPolicy& p);
PiiPolicy pii_policy_from_json(const Json& j);

struct PiiHit {
  PiiType entity_type = PiiType::CUSTOM;
  std::size_t segment = 0;     // index into the scanned segment list
  std::size_t char_start = 0;  // [char_start, char_end) into segment text
  std::size_t char_end = 0;
  std::string text;
  Span word_span;
  double confidence = 0.0;
  RedactionPlanKind plan = RedactionPlanKind::mute_window;
  Span window;  // word_span padded, clamped to the clip when known
};

Json to_json(const PiiHit& h);

/// Regular patterns for EMAIL, PHONE and ID; case-insensitive whole-word
/// dictionary matches for NAME, ADDRESS and CUSTOM. Hits of one type never
/// overlap. `clip` bounds the padded window when given.
std::vector<PiiHit> scan_pii(const std::vector<TranscriptSegment>& segments, const PiiPolicy& policy,
                             std::optional<Span> clip = std::nullopt);

/// Conservative per-track age: the minimum estimate, flagged when strictly
/// below `adult_threshold`. Throws NoEstimates on empty input.
struct AgeVerdict {
  double track_age = 0.0;
  bool minor_risk = false;
};
AgeVerdict aggregate_track_age(const std::vector<double>& estimates, double adult_threshold = 18.0);

}  // namespace gaze::detect
