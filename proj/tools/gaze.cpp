#include <csignal>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "gaze/pipeline/config.hpp"
#include "gaze/pipeline/orchestrator.hpp"
#include "gaze/pipeline/synth.hpp"
#include "gaze/pipeline/validate.hpp"
#include "gaze/review/http_api.hpp"
#include "gaze/review/session.hpp"

namespace fs = std::filesystem;
using namespace gaze;
using pipeline::Stage;

namespace {

review::ReviewServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Globals {
  std::string config;
  std::size_t workers = 0;
  std::string session;
  bool force = false;
};

pipeline::PipelineConfig load(const Globals& g) {
  if (g.config.empty()) fail(Errc::ConfigInvalid, "--config is required");
  auto cfg = pipeline::load_pipeline_config(g.config);
  if (g.workers > 0) cfg.workers = g.workers;
  if (!g.session.empty()) cfg.session_id = g.session;
  return cfg;
}

void print_outcome(const pipeline::StageOutcome& o) {
  std::cout << to_string(o.stage) << ": " << (o.skipped ? "up to date" : "done") << " " << o.output_digest.substr(0, 16) << "\n";
}

int serve_http(const pipeline::PipelineConfig& cfg, const std::string& host, int port) {
  pipeline::Orchestrator orch(cfg);
  const auto layout = orch.layout();
  review::ReviewConfig rc;
  rc.qa_fraction = cfg.review.qa_fraction;
  rc.qa_seed = cfg.review.qa_seed;
  rc.duration = layout.duration;
  for (const auto& [cls, thr] : cfg.fusion.thresholds) rc.thresholds[std::string(detect::to_string(cls))] = thr;
  std::shared_ptr<review::ReviewSession> session =
      review::ReviewSession::open(orch.session_id(), cfg.session_dir, system_clock(), rc);
  review::SessionRegistry registry;
  registry.add(session, cfg.session_dir / "views");
  review::ReviewServer server(registry);
  const int bound = server.bind(host, port);
  std::cout << "serving session " << session->id() << " on http://" << host << ":" << bound << "\n" << std::flush;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Governance-first pre-annotation pipeline for egocentric and 360-degree video"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline config (JSON)");
  app.add_option("--workers", g.workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--session", g.session, "session id (must match the journal)");
  app.add_flag("--force", g.force, "re-run stages even when up to date");

  struct StageCmd {
    Stage stage;
    const char* help;
  };
  const StageCmd stage_cmds[] = {
      {Stage::ingest, "hash raw media into the object store and seal the ledger"},
      {Stage::project, "dewarp dual-fisheye frames and render the rectilinear views"},
      {Stage::segment, "cut views into overlapping clips with descriptors"},
      {Stage::detect, "run the detector suite over the clips"},
      {Stage::fuse, "fuse evidence into the review timeline and auto-skip spans"},
      {Stage::export_, "render the redacted deliverable"},
  };
  std::vector<std::pair<CLI::App*, Stage>> simple;
  for (const auto& c : stage_cmds) simple.emplace_back(app.add_subcommand(std::string(to_string(c.stage)), c.help), c.stage);

  auto* serve = app.add_subcommand("serve", "headless batch review, or the review HTTP API with --port");
  int port = -1;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port, "serve the review API on this port (0 picks one)");
  serve->add_option("--host", host, "bind address");

  auto* report = app.add_subcommand("report", "dwell, RTR and savings report");
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> resamples;
  std::optional<double> level;
  report->add_option("--seed", seed, "bootstrap seed");
  report->add_option("--resamples", resamples, "bootstrap resamples")->check(CLI::PositiveNumber);
  report->add_option("--level", level, "confidence level")->check(CLI::Range(0.0, 1.0));

  auto* run = app.add_subcommand("run", "run every stage, skipping those already up to date");
  std::string from;
  run->add_option("--from", from, "force re-running from this stage onward");

  auto* validate = app.add_subcommand("validate", "check every artifact of a session directory");
  std::string validate_dir;
  validate->add_option("session_dir", validate_dir, "session directory (defaults to the config's)");

  auto* synth = app.add_subcommand("synth", "write a synthetic raw session");
  pipeline::SynthOptions so;
  std::string synth_dir;
  bool no_audio = false;
  std::vector<double> idle_span;
  synth->add_option("raw_dir", synth_dir, "output directory")->required();
  synth->add_option("--session-id", so.session_id);
  synth->add_option("--duration", so.duration)->check(CLI::PositiveNumber);
  synth->add_option("--fps", so.fps)->check(CLI::PositiveNumber);
  synth->add_flag("--spherical", so.spherical, "dual-fisheye capture");
  synth->add_flag("--no-audio", no_audio);
  synth->add_flag("--black-idle", so.black_idle, "blank the idle stretch instead of freezing it");
  synth->add_option("--seed", so.seed);
  synth->add_option("--idle", idle_span, "idle stretch START END in seconds")->expected(2);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [cmd, stage] : simple) {
      if (!cmd->parsed()) continue;
      pipeline::Orchestrator orch(load(g));
      print_outcome(orch.run_stage(stage, g.force));
      return 0;
    }
    if (serve->parsed()) {
      const auto cfg = load(g);
      if (port >= 0) return serve_http(cfg, host, port);
      pipeline::Orchestrator orch(cfg);
      print_outcome(orch.run_stage(Stage::serve, g.force));
      return 0;
    }
    if (report->parsed()) {
      auto cfg = load(g);
      if (seed) cfg.report.seed = *seed;
      if (resamples) cfg.report.resamples = *resamples;
      if (level) cfg.report.level = *level;
      pipeline::Orchestrator orch(cfg);
      print_outcome(orch.run_stage(Stage::report, g.force));
      std::cout << read_file(cfg.session_dir / "report.txt");
      return 0;
    }
    if (run->parsed()) {
      pipeline::Orchestrator orch(load(g));
      std::optional<Stage> start;
      if (!from.empty()) start = pipeline::stage_from_string(from);
      if (g.force) start = Stage::ingest;
      for (const auto& o : orch.run_all(start)) print_outcome(o);
      return 0;
    }
    if (validate->parsed()) {
      const fs::path dir = validate_dir.empty() ? load(g).session_dir : fs::path(validate_dir);
      const auto issues = pipeline::validate_artifacts(dir);
      for (const auto& i : issues) std::cout << pipeline::format_issue(i) << "\n";
      std::cout << (issues.empty() ? "ok" : std::to_string(issues.size()) + " problem(s)") << "\n";
      return issues.empty() ? 0 : 2;
    }
    if (synth->parsed()) {
      so.audio = !no_audio;
      if (!idle_span.empty()) so.idle = {idle_span[0], idle_span[1]};
      pipeline::write_synthetic_session(synth_dir, so);
      std::cout << "wrote " << synth_dir << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
