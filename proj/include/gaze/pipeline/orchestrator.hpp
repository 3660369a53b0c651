#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaze/pipeline/config.hpp"

namespace gaze::pipeline {

enum class Stage { ingest, project, segment, detect, fuse, serve, export_, report };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);  // ConfigInvalid
const std::vector<Stage>& all_stages();

struct StageOutcome {
  Stage stage = Stage::ingest;
  bool skipped = false;  // inputs and outputs unchanged since the last run
  std::string input_digest;
  std::string output_digest;
};

/// Session-level facts the stages share, written by the project stage to views.json.
struct SessionLayout {
  bool spherical = false;
  segment::StreamView primary_view = segment::StreamView::front;
  std::vector<segment::StreamView> views;
  double duration = 0.0;
  bool has_audio = false;
};

/// Runs the stages over one raw session. Each stage records an input and an
/// output digest in <session_dir>/status.json; a stage whose recorded digests
/// still match is skipped. Any failure surfaces as StageFailed naming the stage.
class Orchestrator {
 public:
  explicit Orchestrator(PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  std::string session_id() const;

  StageOutcome run_stage(Stage s, bool force = false);
  /// Runs every stage in order; `from` forces a re-run from that stage onward.
  std::vector<StageOutcome> run_all(std::optional<Stage> from = std::nullopt);

  SessionLayout layout() const;
  Json status() const;

 private:
  void do_ingest();
  void do_project();
  void do_segment();
  void do_detect();
  void do_fuse();
  void do_serve();
  void do_export();
  void do_report();

  Json stage_inputs(Stage s) const;
  std::string output_digest(Stage s) const;
  void fill_provenance(const std::map<std::string, std::pair<std::string, Json>>& slots) const;

  PipelineConfig cfg_;
};

}  // namespace gaze::pipeline
