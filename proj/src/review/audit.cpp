#include "gaze/review/audit.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "gaze/core/digest.hpp"

namespace gaze::review {

const std::string& genesis_digest() {
  static const std::string zeros(64, '0');
  return zeros;
}

Json to_json(const AuditRecord& r, bool with_digest) {
  Json j{{"seq", r.seq},
         {"timestamp", r.timestamp},
         {"reviewer_id", r.reviewer_id},
         {"operation", r.operation},
         {"timeline_id", r.timeline_id},
         {"item_hash", r.item_hash},
         {"pre_state", r.pre_state},
         {"post_state", r.post_state},
         {"rationale_code", r.rationale_code},
         {"dwell_ms", r.dwell_ms},
         {"detail", r.detail},
         {"prev_record_digest", r.prev_record_digest}};
  if (with_digest) j["record_digest"] = r.record_digest;
  return j;
}

AuditRecord audit_record_from_json(const Json& j) {
  AuditRecord r;
  r.seq = field<std::uint64_t>(j, "seq");
  r.timestamp = field<std::string>(j, "timestamp");
  r.reviewer_id = field<std::string>(j, "reviewer_id");
  r.operation = field<std::string>(j, "operation");
  r.timeline_id = field<std::string>(j, "timeline_id");
  r.item_hash = field<std::string>(j, "item_hash");
  r.pre_state = j.contains("pre_state") ? j.at("pre_state") : Json(nullptr);
  r.post_state = j.contains("post_state") ? j.at("post_state") : Json(nullptr);
  r.rationale_code = field<std::string>(j, "rationale_code");
  r.dwell_ms = field<std::int64_t>(j, "dwell_ms");
  r.detail = field_or<Json>(j, "detail", Json::object());
  r.prev_record_digest = field<std::string>(j, "prev_record_digest");
  r.record_digest = field<std::string>(j, "record_digest");
  const std::size_t expected_keys = 13;
  if (j.size() != expected_keys) fail(Errc::SchemaViolation, "audit record has unexpected fields");
  return r;
}

std::string compute_record_digest(const AuditRecord& r) { return sha256_hex(canonical_dump(to_json(r, false))); }

std::string state_hash(const Json& state) { return state.is_null() ? std::string() : sha256_hex(canonical_dump(state)); }

namespace {

// In a canonical line the keys are sorted, so the digest member sits between
// rationale_code and reviewer_id and the line without it is the digest preimage.
// Only the top level holds objects after it, hence rfind.
bool line_digest_matches(const std::string& line) {
  static const std::string key = "\"record_digest\":\"";
  const auto at = line.rfind(key);
  if (at == std::string::npos || at == 0 || line[at - 1] != ',') return false;
  const auto value = at + key.size();
  if (line.size() < value + 66 || line.compare(value + 64, 2, "\",") != 0) return false;
  Sha256 h;
  h.update(std::string_view(line).substr(0, at)).update(std::string_view(line).substr(value + 66));
  return line.compare(value, 64, h.hex_digest()) == 0;
}

}  // namespace

std::optional<ChainProblem> verify_chain(std::span<const std::string> lines, const std::string& prev_digest,
                                         std::uint64_t first_seq) {
  std::string prev = prev_digest;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::uint64_t seq = first_seq + i;
    if (!line_digest_matches(lines[i])) return ChainProblem{seq, "record_digest does not match content"};
    AuditRecord r;
    try {
      const Json j = Json::parse(lines[i]);
      if (canonical_dump(j) != lines[i]) return ChainProblem{seq, "record is not in canonical form"};
      r = audit_record_from_json(j);
    } catch (const std::exception& e) {
      return ChainProblem{seq, std::string("unreadable record: ") + e.what()};
    }
    if (r.seq != seq) return ChainProblem{seq, "sequence number " + std::to_string(r.seq) + " out of order"};
    if (r.prev_record_digest != prev) return ChainProblem{seq, "prev_record_digest does not match the preceding record"};
    if (compute_record_digest(r) != r.record_digest) return ChainProblem{seq, "record_digest does not match content"};
    if (r.item_hash != state_hash(r.pre_state)) return ChainProblem{seq, "item_hash does not match pre_state"};
    prev = r.record_digest;
  }
  return std::nullopt;
}

std::optional<ChainProblem> verify_chain(std::span<const std::string> lines) {
  return verify_chain(lines, genesis_digest(), 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::optional<ChainProblem> verify_chain_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (!text.empty() && text.back() != '\n') return ChainProblem{split_lines(text).size(), "file does not end with a newline"};
  const auto lines = split_lines(text);
  return verify_chain(lines);
}

std::map<std::string, Json> replay_pre_states(std::span<const std::string> lines) {
  std::map<std::string, Json> out;
  for (const auto& line : lines) {
    const auto r = audit_record_from_json(Json::parse(line));
    if (r.timeline_id.empty() || r.pre_state.is_null()) continue;
    out.emplace(r.timeline_id, r.pre_state);
  }
  return out;
}

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    lines_ = split_lines(read_file(path_));
    if (const auto bad = verify_chain(lines_))
      fail(Errc::SchemaViolation, "audit chain broken at seq " + std::to_string(bad->seq) + ": " + bad->message);
    if (!lines_.empty()) head_ = Json::parse(lines_.back()).at("record_digest").get<std::string>();
  }
}

AuditRecord AuditLog::append(AuditRecord r) {
  r.seq = lines_.size() + 1;
  r.prev_record_digest = head_;
  r.item_hash = state_hash(r.pre_state);
  r.record_digest = compute_record_digest(r);
  std::string line = canonical_dump(to_json(r));
  if (!path_.empty()) {
    const std::string out = line + "\n";
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) fail(Errc::IoFailure, "cannot open audit log: " + std::string(std::strerror(errno)));
    const auto n = ::write(fd, out.data(), out.size());
    const int err = errno;
    ::close(fd);
    if (n != static_cast<ssize_t>(out.size())) fail(Errc::IoFailure, "audit append failed: " + std::string(std::strerror(err)));
  }
  lines_.push_back(std::move(line));
  head_ = r.record_digest;
  return r;
}

}  // namespace gaze::review
