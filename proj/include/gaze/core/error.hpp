#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaze {

enum class Errc {
  ConsentMissing,
  IoFailure,
  EmptySession,
  OutOfBounds,
  LayoutInvalid,
  BadConfig,
  EmptyWindow,
  TooFewFrames,
  UnorderedInput,
  SampleRateTooLow,
  PolicyInvalid,
  NoEstimates,
  FixtureInvalid,
  UnknownClip,
  SchemaViolation,
  SessionUnknown,
  NotLocked,
  InvalidTransition,
  MissingRationale,
  NothingAccepted,
  NoPairs,
  PendingItemsRemain,
  QuestionnaireInvalid,
  SpanOutOfRange,
  NotFinalized,
  UnorderedLog,
  ZeroDuration,
  TooFewSamples,
  FactorOutOfRange,
  StageFailed,
  ConfigInvalid,
};

std::string_view to_string(Errc code) noexcept;

// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace gaze
