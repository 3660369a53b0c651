#include "gaze/ingest/provenance.hpp"

#include <algorithm>

#include "gaze/core/digest.hpp"

namespace gaze::ingest {

namespace fs = std::filesystem;

std::string_view to_string(MediaKind kind) {
  switch (kind) {
    case MediaKind::video_raster_bundle: return "video_raster_bundle";
    case MediaKind::audio_pcm: return "audio_pcm";
    case MediaKind::journal: return "journal";
  }
  return "journal";
}

MediaKind media_kind_from_string(std::string_view s) {
  if (s == "video_raster_bundle") return MediaKind::video_raster_bundle;
  if (s == "audio_pcm") return MediaKind::audio_pcm;
  if (s == "journal") return MediaKind::journal;
  fail(Errc::SchemaViolation, "unknown media_kind '" + std::string(s) + "'");
}

Json to_json(const AssetManifest& m) {
  return Json{{"asset_id", m.asset_id},       {"session_id", m.session_id},
              {"content_hash", m.content_hash}, {"byte_size", m.byte_size},
              {"mtime", m.mtime},               {"media_kind", to_string(m.media_kind)},
              {"ingest_time", m.ingest_time}};
}

AssetManifest manifest_from_json(const Json& j) {
  AssetManifest m;
  m.asset_id = field<std::string>(j, "asset_id");
  m.session_id = field<std::string>(j, "session_id");
  m.content_hash = field<std::string>(j, "content_hash");
  m.byte_size = field<std::uint64_t>(j, "byte_size");
  m.mtime = field<std::string>(j, "mtime");
  m.media_kind = media_kind_from_string(field<std::string>(j, "media_kind"));
  m.ingest_time = field<std::string>(j, "ingest_time");
  if (!is_hex_digest(m.content_hash)) fail(Errc::SchemaViolation, "content_hash must be 64 lowercase hex chars");
  return m;
}

Json to_json(const SessionJournal& j) {
  Json out{{"session_id", j.session_id},
           {"free_text_notes", j.free_text_notes},
           {"device_id", j.device_id},
           {"frame_rate", j.frame_rate},
           {"local_clock_offset", j.local_clock_offset},
           {"consent_ack", j.consent_ack},
           {"device_logs", j.device_logs}};
  out["lens_model"] = j.lens_model ? Json(*j.lens_model) : Json(nullptr);
  return out;
}

SessionJournal journal_from_json(const Json& j) {
  SessionJournal out;
  out.session_id = field<std::string>(j, "session_id");
  out.free_text_notes = field_or<std::string>(j, "free_text_notes", "");
  out.device_id = field<std::string>(j, "device_id");
  out.frame_rate = field<double>(j, "frame_rate");
  if (j.contains("lens_model") && !j["lens_model"].is_null()) out.lens_model = field<std::string>(j, "lens_model");
  out.local_clock_offset = field_or<double>(j, "local_clock_offset", 0.0);
  out.consent_ack = field_or<bool>(j, "consent_ack", false);
  if (j.contains("device_logs")) out.device_logs = j["device_logs"];
  if (!(out.frame_rate > 0.0)) fail(Errc::SchemaViolation, "frame_rate must be > 0");
  if (out.session_id.empty()) fail(Errc::SchemaViolation, "session_id must be non-empty");
  return out;
}

namespace {

Json entries_json(const std::vector<LedgerEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries)
    arr.push_back(
        {{"asset_id", e.asset_id}, {"content_hash", e.content_hash}, {"byte_size", e.byte_size}, {"mtime", e.mtime}});
  return arr;
}

}  // namespace

std::string SessionLedger::compute_digest(const std::vector<LedgerEntry>& entries) {
  return sha256_hex(canonical_dump(entries_json(entries)));
}

bool SessionLedger::verify() const {
  if (!std::is_sorted(entries.begin(), entries.end(),
                      [](const LedgerEntry& a, const LedgerEntry& b) { return a.asset_id < b.asset_id; }))
    return false;
  return compute_digest(entries) == ledger_digest;
}

void SessionLedger::fill_provenance(const std::string& module, const std::string& version, const Json& thresholds) {
  auto& slot = pipeline_provenance[module];
  slot.version = version;
  if (thresholds.is_object()) {
    for (auto it = thresholds.begin(); it != thresholds.end(); ++it) slot.thresholds[it.key()] = it.value();
  } else if (!thresholds.is_null()) {
    slot.thresholds["value"] = thresholds;
  }
}

const std::vector<std::string>& default_provenance_modules() {
  static const std::vector<std::string> modules = {
      "projection",   "segmenter",     "detector.caption", "detector.tags",   "detector.tracker",
      "detector.asr", "detector.pii",  "detector.age",     "detector.nsfw",   "detector.motion",
      "detector.claps", "fusion",      "review",           "export"};
  return modules;
}

Json to_json(const SessionLedger& l) {
  Json prov = Json::object();
  for (const auto& [module, slot] : l.pipeline_provenance)
    prov[module] = {{"version", slot.version}, {"thresholds", slot.thresholds}};
  return Json{{"session_id", l.session_id},
              {"entries", entries_json(l.entries)},
              {"ledger_digest", l.ledger_digest},
              {"pipeline_provenance", prov}};
}

SessionLedger ledger_from_json(const Json& j) {
  SessionLedger l;
  l.session_id = field<std::string>(j, "session_id");
  l.ledger_digest = field<std::string>(j, "ledger_digest");
  for (const auto& e : field<Json>(j, "entries")) {
    l.entries.push_back({field<std::string>(e, "asset_id"), field<std::string>(e, "content_hash"),
                         field<std::uint64_t>(e, "byte_size"), field<std::string>(e, "mtime")});
  }
  if (j.contains("pipeline_provenance")) {
    for (auto it = j["pipeline_provenance"].begin(); it != j["pipeline_provenance"].end(); ++it) {
      ProvenanceSlot slot;
      slot.version = field_or<std::string>(it.value(), "version", "pending");
      if (it.value().contains("thresholds")) slot.thresholds = it.value()["thresholds"];
      l.pipeline_provenance[it.key()] = slot;
    }
  }
  return l;
}

std::vector<std::string> ledger_problems(const Json& j) {
  std::vector<std::string> out;
  SessionLedger l;
  try {
    l = ledger_from_json(j);
  } catch (const Error& e) {
    out.push_back(e.what());
    return out;
  }
  for (const auto& e : l.entries)
    if (!is_hex_digest(e.content_hash)) out.push_back("entry " + e.asset_id + ": content_hash is not a 64-char digest");
  if (!std::is_sorted(l.entries.begin(), l.entries.end(),
                      [](const LedgerEntry& a, const LedgerEntry& b) { return a.asset_id < b.asset_id; }))
    out.push_back("entries are not sorted by asset_id");
  const auto recomputed = SessionLedger::compute_digest(l.entries);
  if (recomputed != l.ledger_digest)
    out.push_back("ledger_digest mismatch: stored " + l.ledger_digest + ", recomputed " + recomputed);
  return out;
}

// --- LocalObjectStore -------------------------------------------------------

LocalObjectStore::LocalObjectStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "objects");
  fs::create_directories(root_ / "manifests");
}

fs::path LocalObjectStore::object_path(const std::string& hash) const {
  return root_ / "objects" / hash.substr(0, 2) / hash;
}

std::size_t LocalObjectStore::object_count() const {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "objects"))
    if (e.is_regular_file() && e.path().filename().string().find(".tmp.") == std::string::npos) ++n;
  return n;
}

bool LocalObjectStore::has_object(const std::string& hash) const { return fs::exists(object_path(hash)); }

void LocalObjectStore::put_object(const std::string& hash, std::span<const std::uint8_t> bytes) {
  if (has_object(hash)) return;
  write_file_atomic(object_path(hash),
                    std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string LocalObjectStore::get_object(const std::string& hash) const { return read_file(object_path(hash)); }

std::optional<AssetManifest> LocalObjectStore::find_manifest(const std::string& asset_id) const {
  const auto p = root_ / "manifests" / (asset_id + ".json");
  if (!fs::exists(p)) return std::nullopt;
  return manifest_from_json(load_json(p));
}

void LocalObjectStore::put_manifest(const AssetManifest& m) {
  save_json(root_ / "manifests" / (m.asset_id + ".json"), to_json(m));
}

std::vector<AssetManifest> LocalObjectStore::session_manifests(const std::string& session_id) const {
  std::vector<AssetManifest> out;
  for (const auto& e : fs::directory_iterator(root_ / "manifests")) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    auto m = manifest_from_json(load_json(e.path()));
    if (m.session_id == session_id) out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.asset_id < b.asset_id; });
  return out;
}

// --- IngestService ----------------------------------------------------------

std::string asset_id_for(const std::string& session_id, const std::string& content_hash) {
  return session_id + "-" + content_hash.substr(0, 16);
}

IngestService::IngestService(ObjectStore& store, Clock clock) : store_(store), clock_(std::move(clock)) {}

void IngestService::register_journal(const SessionJournal& journal) {
  std::lock_guard lock(mu_);
  journals_[journal.session_id] = journal;
}

const SessionJournal* IngestService::journal(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = journals_.find(session_id);
  return it == journals_.end() ? nullptr : &it->second;
}

AssetManifest IngestService::ingest_asset(std::span<const std::uint8_t> bytes, MediaKind kind,
                                          const std::string& session_id, std::optional<TimePoint> mtime) {
  {
    std::lock_guard lock(mu_);
    auto it = journals_.find(session_id);
    if (it == journals_.end()) fail(Errc::ConsentMissing, "no journal registered for session " + session_id);
    if (!it->second.consent_ack) fail(Errc::ConsentMissing, "session " + session_id + " lacks consent_ack");
  }
  const std::string hash = sha256_hex(bytes);
  const std::string id = asset_id_for(session_id, hash);
  if (auto existing = store_.find_manifest(id)) return *existing;

  store_.put_object(hash, bytes);
  AssetManifest m;
  m.asset_id = id;
  m.session_id = session_id;
  m.content_hash = hash;
  m.byte_size = bytes.size();
  m.media_kind = kind;
  const TimePoint now = clock_();
  m.mtime = format_utc(mtime.value_or(now));
  m.ingest_time = format_utc(now);
  store_.put_manifest(m);
  return m;
}

AssetManifest IngestService::ingest_asset(std::string_view bytes, MediaKind kind, const std::string& session_id,
                                          std::optional<TimePoint> mtime) {
  return ingest_asset(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), kind, session_id,
                      mtime);
}

SessionLedger IngestService::seal_ledger(const std::string& session_id) const {
  const auto manifests = store_.session_manifests(session_id);
  if (manifests.empty()) fail(Errc::EmptySession, "no assets ingested for session " + session_id);
  SessionLedger l;
  l.session_id = session_id;
  for (const auto& m : manifests) l.entries.push_back({m.asset_id, m.content_hash, m.byte_size, m.mtime});
  std::sort(l.entries.begin(), l.entries.end(),
            [](const LedgerEntry& a, const LedgerEntry& b) { return a.asset_id < b.asset_id; });
  l.ledger_digest = SessionLedger::compute_digest(l.entries);
  for (const auto& module : default_provenance_modules()) l.pipeline_provenance[module] = ProvenanceSlot{};
  return l;
}

}  // namespace gaze::ingest
