#include "gaze/core/error.hpp"

namespace gaze {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ConsentMissing: return "ConsentMissing";
    case Errc::IoFailure: return "IoFailure";
    case Errc::EmptySession: return "EmptySession";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::LayoutInvalid: return "LayoutInvalid";
    case Errc::BadConfig: return "BadConfig";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::TooFewFrames: return "TooFewFrames";
    case Errc::UnorderedInput: return "UnorderedInput";
    case Errc::SampleRateTooLow: return "SampleRateTooLow";
    case Errc::PolicyInvalid: return "PolicyInvalid";
    case Errc::NoEstimates: return "NoEstimates";
    case Errc::FixtureInvalid: return "FixtureInvalid";
    case Errc::UnknownClip: return "UnknownClip";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::SessionUnknown: return "SessionUnknown";
    case Errc::NotLocked: return "NotLocked";
    case Errc::InvalidTransition: return "InvalidTransition";
    case Errc::MissingRationale: return "MissingRationale";
    case Errc::NothingAccepted: return "NothingAccepted";
    case Errc::NoPairs: return "NoPairs";
    case Errc::PendingItemsRemain: return "PendingItemsRemain";
    case Errc::QuestionnaireInvalid: return "QuestionnaireInvalid";
    case Errc::SpanOutOfRange: return "SpanOutOfRange";
    case Errc::NotFinalized: return "NotFinalized";
    case Errc::UnorderedLog: return "UnorderedLog";
    case Errc::ZeroDuration: return "ZeroDuration";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::FactorOutOfRange: return "FactorOutOfRange";
    case Errc::StageFailed: return "StageFailed";
    case Errc::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace gaze
