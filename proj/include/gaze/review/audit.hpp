#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaze/core/json.hpp"

namespace gaze::review {

struct AuditRecord {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string reviewer_id;
  std::string operation;  // accept, adjust, override, lock_expired, qa_draw, qa_review, finalize
  std::string timeline_id;
  std::string item_hash;  // digest of pre_state; empty when there is none
  Json pre_state;
  Json post_state;
  std::string rationale_code;
  std::int64_t dwell_ms = 0;
  Json detail = Json::object();
  std::string prev_record_digest;
  std::string record_digest;
};

/// 64 zeros; the prev digest of the first record.
const std::string& genesis_digest();

/// Serialized form; `with_digest = false` gives the digest preimage.
Json to_json(const AuditRecord& r, bool with_digest = true);
AuditRecord audit_record_from_json(const Json& j);

std::string compute_record_digest(const AuditRecord& r);

/// Hash of an item state as stored in item_hash.
std::string state_hash(const Json& state);

struct ChainProblem {
  std::uint64_t seq = 0;  // expected seq of the offending line
  std::string message;
};

/// Checks lines [0, n) as a contiguous piece of a chain that starts after
/// `prev_digest` with sequence number `first_seq`. Each line must be the
/// canonical serialization of its record.
std::optional<ChainProblem> verify_chain(std::span<const std::string> lines, const std::string& prev_digest,
                                         std::uint64_t first_seq);
std::optional<ChainProblem> verify_chain(std::span<const std::string> lines);
std::optional<ChainProblem> verify_chain_file(const std::filesystem::path& path);

std::vector<std::string> split_lines(const std::string& text);

/// For every timeline item an action touched, the pre_state of its first record.
std::map<std::string, Json> replay_pre_states(std::span<const std::string> lines);

/// Append-only chain, optionally mirrored to a JSONL file (one write per line).
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(std::filesystem::path path);

  /// Fills seq, prev_record_digest and record_digest; returns the stored record.
  AuditRecord append(AuditRecord r);

  const std::vector<std::string>& lines() const { return lines_; }
  std::uint64_t size() const { return lines_.size(); }
  const std::string& head_digest() const { return head_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> lines_;
  std::string head_ = genesis_digest();
};

}  // namespace gaze::review
