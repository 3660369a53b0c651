#include <algorithm>

#include "doctest.h"
#include "gaze/core/digest.hpp"
#include "gaze/ingest/provenance.hpp"
#include "support/tmpdir.hpp"

using namespace gaze;
using namespace gaze::ingest;

namespace {

SessionJournal journal(const std::string& id, bool consent = true) {
  SessionJournal j;
  j.session_id = id;
  j.device_id = "cam";
  j.frame_rate = 30.0;
  j.consent_ack = consent;
  return j;
}

Clock fixed_clock() {
  const auto t = parse_utc("2024-05-01T12:00:00Z");
  return [t] { return t; };
}

// Hand-written serialization of ledger entries, independent of canonical_dump.
std::string entries_text(const std::vector<LedgerEntry>& es) {
  std::string s = "[";
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) s += ",";
    s += "{\"asset_id\":\"" + es[i].asset_id + "\",\"byte_size\":" + std::to_string(es[i].byte_size) +
         ",\"content_hash\":\"" + es[i].content_hash + "\",\"mtime\":\"" + es[i].mtime + "\"}";
  }
  return s + "]";
}

}  // namespace

TEST_CASE("ingest hashes content and is idempotent") {
  test::TempDir d("ingest");
  LocalObjectStore store(d / "store");
  IngestService svc(store, fixed_clock());
  svc.register_journal(journal("s1"));
  const auto m0 = svc.ingest_asset(std::string_view(""), MediaKind::journal, "s1");
  CHECK(m0.content_hash == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(m0.byte_size == 0);
  const auto m1 = svc.ingest_asset(std::string_view("abc"), MediaKind::audio_pcm, "s1");
  CHECK(m1.content_hash == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto m2 = svc.ingest_asset(std::string_view("abc"), MediaKind::audio_pcm, "s1");
  CHECK(to_json(m1) == to_json(m2));
  CHECK(store.object_count() == 2);
  CHECK(store.find_manifest(m1.asset_id).has_value());
  CHECK(m1.asset_id == asset_id_for("s1", m1.content_hash));
  CHECK(m1.asset_id == "s1-" + m1.content_hash.substr(0, 16));
  CHECK(read_file(store.object_path(m1.content_hash)) == "abc");
}

TEST_CASE("ingest refuses sessions without consent") {
  test::TempDir d("consent");
  LocalObjectStore store(d / "store");
  IngestService svc(store, fixed_clock());
  try {
    svc.ingest_asset(std::string_view("x"), MediaKind::journal, "nobody");
    FAIL("expected ConsentMissing");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConsentMissing);
  }
  svc.register_journal(journal("s2", false));
  CHECK_THROWS_AS(svc.ingest_asset(std::string_view("x"), MediaKind::journal, "s2"), Error);
  CHECK(store.object_count() == 0);
}

TEST_CASE("sealed ledger verifies and is order independent") {
  const std::vector<std::string> blobs{"one", "two", "three"};
  std::vector<std::string> digests;
  std::vector<int> order{0, 1, 2};
  do {
    test::TempDir d("ledger");
    LocalObjectStore store(d / "store");
    IngestService svc(store, fixed_clock());
    svc.register_journal(journal("s"));
    for (int i : order) svc.ingest_asset(std::string_view(blobs[i]), MediaKind::audio_pcm, "s");
    const auto l = svc.seal_ledger("s");
    CHECK(l.verify());
    CHECK(l.entries.size() == 3);
    CHECK(l.ledger_digest == sha256_hex(entries_text(l.entries)));
    CHECK(ledger_problems(to_json(l)).empty());
    for (const auto& m : default_provenance_modules()) CHECK(l.pipeline_provenance.at(m).version == "pending");
    digests.push_back(l.ledger_digest);
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(std::all_of(digests.begin(), digests.end(), [&](const std::string& s) { return s == digests[0]; }));
}

TEST_CASE("ledger tampering is reported") {
  test::TempDir d("tamper");
  LocalObjectStore store(d / "store");
  IngestService svc(store, fixed_clock());
  svc.register_journal(journal("s"));
  CHECK_THROWS_AS(svc.seal_ledger("s"), Error);
  svc.ingest_asset(std::string_view("payload"), MediaKind::audio_pcm, "s");
  auto l = svc.seal_ledger("s");
  REQUIRE(l.entries.size() == 1);
  CHECK(l.verify());
  Json j = to_json(l);
  j["entries"][0]["byte_size"] = 8;
  CHECK_FALSE(ledger_problems(j).empty());
  auto l2 = ledger_from_json(j);
  CHECK_FALSE(l2.verify());
  for (const char* key : {"asset_id", "content_hash", "mtime"}) {
    Json k = to_json(l);
    std::string v = k["entries"][0][key].get<std::string>();
    v.back() = v.back() == 'a' ? 'b' : 'a';
    k["entries"][0][key] = v;
    CHECK_FALSE(ledger_problems(k).empty());
  }
}

TEST_CASE("provenance slots fill but never disappear") {
  SessionLedger l;
  l.fill_provenance("fusion", "v1", Json{{"gap", 0.5}});
  l.fill_provenance("fusion", "v2", Json{{"other", 1}});
  CHECK(l.pipeline_provenance.at("fusion").version == "v2");
  CHECK(l.pipeline_provenance.at("fusion").thresholds.at("gap") == 0.5);
  CHECK(l.pipeline_provenance.at("fusion").thresholds.at("other") == 1);
  const auto back = ledger_from_json(to_json(l));
  CHECK(back.pipeline_provenance.size() == 1);
}

TEST_CASE("journal and manifest schema") {
  Json j = to_json(journal("s"));
  CHECK(journal_from_json(j).session_id == "s");
  j["frame_rate"] = 0.0;
  CHECK_THROWS_AS(journal_from_json(j), Error);
  AssetManifest m;
  m.asset_id = "a";
  m.session_id = "s";
  m.content_hash = "xyz";
  CHECK_THROWS_AS(manifest_from_json(to_json(m)), Error);
}
