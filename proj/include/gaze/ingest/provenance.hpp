#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaze/core/json.hpp"
#include "gaze/core/time.hpp"

namespace gaze::ingest {

enum class MediaKind { video_raster_bundle, audio_pcm, journal };

std::string_view to_string(MediaKind kind);
MediaKind media_kind_from_string(std::string_view s);

struct AssetManifest {
  std::string asset_id;
  std::string session_id;
  std::string content_hash;
  std::uint64_t byte_size = 0;
  std::string mtime;
  MediaKind media_kind = MediaKind::video_raster_bundle;
  std::string ingest_time;
};

Json to_json(const AssetManifest& m);
AssetManifest manifest_from_json(const Json& j);

struct SessionJournal {
  std::string session_id;
  std::string free_text_notes;
  std::string device_id;
  double frame_rate = 0.0;
  std::optional<std::string> lens_model;
  double local_clock_offset = 0.0;
  bool consent_ack = false;
  /// Battery/temperature/dropped-frame counters; kept verbatim, never interpreted.
  Json device_logs = Json::object();
};

Json to_json(const SessionJournal& j);
SessionJournal journal_from_json(const Json& j);

struct LedgerEntry {
  std::string asset_id;
  std::string content_hash;
  std::uint64_t byte_size = 0;
  std::string mtime;
};

struct ProvenanceSlot {
  std::string version = "pending";
  Json thresholds = Json::object();
};

struct SessionLedger {
  std::string session_id;
  std::vector<LedgerEntry> entries;
  std::string ledger_digest;
  std::map<std::string, ProvenanceSlot> pipeline_provenance;

  /// SHA-256 over the canonical JSON array of entries.
  static std::string compute_digest(const std::vector<LedgerEntry>& entries);

  bool verify() const;

  /// Fills (or refines) a module's slot. Slots are never removed.
  void fill_provenance(const std::string& module, const std::string& version, const Json& thresholds);
};

/// Module names that start out as placeholders in every sealed ledger.
const std::vector<std::string>& default_provenance_modules();

Json to_json(const SessionLedger& l);
SessionLedger ledger_from_json(const Json& j);

/// Problems found in a serialized ledger; empty when it verifies.
std::vector<std::string> ledger_problems(const Json& j);

/// Content-addressed blob store plus manifest index.
class ObjectStore {
 public:
  virtual ~ObjectStore() = default;

  virtual bool has_object(const std::string& hash) const = 0;
  /// Must be atomic: readers never observe a partial object.
  virtual void put_object(const std::string& hash, std::span<const std::uint8_t> bytes) = 0;
  virtual std::string get_object(const std::string& hash) const = 0;

  virtual std::optional<AssetManifest> find_manifest(const std::string& asset_id) const = 0;
  virtual void put_manifest(const AssetManifest& m) = 0;
  virtual std::vector<AssetManifest> session_manifests(const std::string& session_id) const = 0;
};

/// Layout: <root>/objects/<hash[0:2]>/<hash>, <root>/manifests/<asset_id>.json
class LocalObjectStore final : public ObjectStore {
 public:
  explicit LocalObjectStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path object_path(const std::string& hash) const;
  std::size_t object_count() const;

  bool has_object(const std::string& hash) const override;
  void put_object(const std::string& hash, std::span<const std::uint8_t> bytes) override;
  std::string get_object(const std::string& hash) const override;
  std::optional<AssetManifest> find_manifest(const std::string& asset_id) const override;
  void put_manifest(const AssetManifest& m) override;
  std::vector<AssetManifest> session_manifests(const std::string& session_id) const override;

 private:
  std::filesystem::path root_;
};

class IngestService {
 public:
  IngestService(ObjectStore& store, Clock clock);

  void register_journal(const SessionJournal& journal);
  const SessionJournal* journal(const std::string& session_id) const;

  /// Idempotent: identical bytes in the same session return the stored manifest unchanged.
  AssetManifest ingest_asset(std::span<const std::uint8_t> bytes, MediaKind kind, const std::string& session_id,
                             std::optional<TimePoint> mtime = std::nullopt);
  AssetManifest ingest_asset(std::string_view bytes, MediaKind kind, const std::string& session_id,
                             std::optional<TimePoint> mtime = std::nullopt);

  SessionLedger seal_ledger(const std::string& session_id) const;

 private:
  ObjectStore& store_;
  Clock clock_;
  std::map<std::string, SessionJournal> journals_;
  mutable std::mutex mu_;
};

/// Asset ids are "<session>-<first 16 hex of content hash>".
std::string asset_id_for(const std::string& session_id, const std::string& content_hash);

}  // namespace gaze::ingest
