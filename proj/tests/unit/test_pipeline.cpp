#include "doctest.h"
#include "gaze/core/json.hpp"
#include "gaze/pipeline/config.hpp"
#include "gaze/pipeline/orchestrator.hpp"
#include "gaze/pipeline/synth.hpp"
#include "gaze/pipeline/validate.hpp"
#include "support/errors.hpp"
#include "support/tmpdir.hpp"

using namespace gaze;
using namespace gaze::pipeline;
using test::error_code;

namespace fs = std::filesystem;

namespace {

PipelineConfig config_for(const fs::path& root, std::size_t workers = 1) {
  auto cfg = pipeline_config_from_json(Json{{"raw_dir", "raw"}, {"session_dir", "session"}, {"workers", workers}}, root);
  cfg.report.resamples = 500;
  return cfg;
}

SynthOptions short_session() {
  SynthOptions o;
  o.duration = 90;
  o.idle = {60, 75};
  o.claps = {4};
  return o;
}

bool has_issue(const std::vector<ValidationIssue>& issues, const std::string& file, std::size_t line) {
  for (const auto& i : issues)
    if (i.file == file && i.line == line) return true;
  return false;
}

}  // namespace

TEST_CASE("pipeline config") {
  test::TempDir d("cfg");
  const auto cfg = config_for(d.path());
  CHECK(cfg.raw_dir == d.path() / "raw");
  CHECK(cfg.store_root == d.path() / "session" / "store");
  CHECK(cfg.segmenter.clip_len == 60.0);
  const auto back = pipeline_config_from_json(to_json(cfg), "/elsewhere");
  CHECK(to_json(back) == to_json(cfg));
  CHECK(error_code([&] { pipeline_config_from_json(Json{{"raw_dir", "r"}, {"session_dir", "s"}, {"colour", 1}}, "/"); }) ==
        Errc::ConfigInvalid);
  CHECK(error_code([&] {
          pipeline_config_from_json(Json{{"raw_dir", "r"}, {"session_dir", "s"}, {"export", {{"visual_kind", "paint"}}}}, "/");
        }) == Errc::ConfigInvalid);
  CHECK(error_code([&] { pipeline_config_from_json(Json{{"raw_dir", "r"}}, "/"); }) == Errc::ConfigInvalid);
  save_json(d.path() / "gaze.json", Json{{"raw_dir", "raw"}, {"session_dir", "out"}});
  CHECK(load_pipeline_config(d.path() / "gaze.json").session_dir == d.path() / "out");
  CHECK(stage_from_string("export") == Stage::export_);
  CHECK(error_code([] { stage_from_string("paint"); }) == Errc::ConfigInvalid);
}

TEST_CASE("orchestrator runs, resumes and re-runs what changed") {
  test::TempDir d("orch");
  write_synthetic_session(d.path() / "raw", short_session());
  Orchestrator o(config_for(d.path()));
  const auto first = o.run_all();
  REQUIRE(first.size() == all_stages().size());
  for (const auto& s : first) CHECK_FALSE(s.skipped);
  const auto issues = validate_artifacts(d.path() / "session");
  for (const auto& i : issues) INFO(format_issue(i));
  CHECK(issues.empty());
  CHECK(fs::exists(d.path() / "session" / "deliverable" / "export_ledger.json"));
  CHECK(o.layout().primary_view == segment::StreamView::front);
  CHECK(o.layout().duration == doctest::Approx(90.0));

  for (const auto& s : Orchestrator(config_for(d.path())).run_all()) CHECK(s.skipped);

  // a changed fixture re-runs detection and everything downstream of it
  const fs::path nsfw = d.path() / "raw" / "fixtures" / "nsfw.json";
  Json fx = load_json(nsfw);
  fx["scores"][0]["score"] = 0.95;
  save_json(nsfw, fx);
  const auto third = Orchestrator(config_for(d.path())).run_all();
  for (const auto& s : third) {
    const bool upstream = s.stage == Stage::ingest || s.stage == Stage::project || s.stage == Stage::segment;
    CHECK_MESSAGE(s.skipped == upstream, to_string(s.stage));
  }

  const auto forced = Orchestrator(config_for(d.path())).run_all(Stage::fuse);
  for (const auto& s : forced) CHECK(s.skipped == (s.stage < Stage::fuse));
  CHECK(forced[4].output_digest == third[4].output_digest);
}

TEST_CASE("stage failures name the stage") {
  test::TempDir d("fail");
  write_synthetic_session(d.path() / "raw", short_session());
  Orchestrator o(config_for(d.path()));
  for (auto s : {Stage::ingest, Stage::project, Stage::segment}) o.run_stage(s);
  write_file_atomic(d.path() / "raw" / "fixtures" / "nsfw.json", "{\"scores\": [{\"t_start\": 3}]}");
  try {
    o.run_stage(Stage::detect);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StageFailed);
    CHECK(std::string(e.what()).find("stage detect") != std::string::npos);
    CHECK(std::string(e.what()).find("FixtureInvalid") != std::string::npos);
  }
  CHECK(error_code([&] { o.run_stage(Stage::export_); }) == Errc::StageFailed);

  test::TempDir nc("noconsent");
  auto opt = short_session();
  opt.consent = false;
  write_synthetic_session(nc.path() / "raw", opt);
  Orchestrator o2(config_for(nc.path()));
  CHECK(error_code([&] { o2.run_stage(Stage::ingest); }) == Errc::StageFailed);
}

TEST_CASE("validation points at damaged artifacts") {
  test::TempDir d("val");
  write_synthetic_session(d.path() / "raw", short_session());
  Orchestrator(config_for(d.path())).run_all();
  const fs::path s = d.path() / "session";
  REQUIRE(validate_artifacts(s).empty());

  const std::string clips = read_file(s / "clips.jsonl");
  const auto second_nl = clips.find('\n', clips.find('\n') + 1);
  write_file_atomic(s / "clips.jsonl", clips.substr(0, second_nl - 5) + "\n" + clips.substr(second_nl + 1));
  CHECK(has_issue(validate_artifacts(s), "clips.jsonl", 2));
  write_file_atomic(s / "clips.jsonl", clips);

  std::string audit = read_file(s / "review" / "audit.jsonl");
  const auto pos = audit.find("\"dwell_ms\":", audit.find('\n') + 1);
  audit[pos + 11] = audit[pos + 11] == '9' ? '8' : '9';
  write_file_atomic(s / "review" / "audit.jsonl", audit);
  CHECK(has_issue(validate_artifacts(s), "review/audit.jsonl", 2));

  fs::remove(s / "deliverable" / "plans.jsonl");
  bool ledger_issue = false;
  for (const auto& i : validate_artifacts(s)) ledger_issue = ledger_issue || i.file.rfind("deliverable/", 0) == 0;
  CHECK(ledger_issue);
}

TEST_CASE("worker count does not change any artifact") {
  test::TempDir d("workers");
  write_synthetic_session(d.path() / "raw", short_session());
  auto one = config_for(d.path(), 1);
  auto eight = config_for(d.path(), 8);
  one.session_dir = d.path() / "w1";
  eight.session_dir = d.path() / "w8";
  one.store_root = one.session_dir / "store";
  eight.store_root = eight.session_dir / "store";
  Orchestrator(one).run_all();
  Orchestrator(eight).run_all();
  for (const char* f : {"clips.jsonl", "timeline.jsonl", "skips.jsonl", "ledger.json", "review/final_labels.jsonl",
                        "review/audit.jsonl", "deliverable/export_ledger.json", "deliverable/mapping.json", "report.json"})
    CHECK_MESSAGE(read_file(one.session_dir / f) == read_file(eight.session_dir / f), std::string(f));
}
