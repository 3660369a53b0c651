#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gaze/detect/suite.hpp"
#include "gaze/export/redaction.hpp"
#include "gaze/fusion/timeline.hpp"
#include "gaze/metrics/rtr.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::pipeline {

// Raw session layout read by the pipeline:
//   <raw>/session.json          journal
//   <raw>/frames/               frame_%06d.ppm + frames.json (rectilinear or dual fisheye)
//   <raw>/fisheye_layout.json   present for dual-fisheye captures
//   <raw>/audio.wav             optional mono PCM
//   <raw>/fixtures/             detector fixtures
//   <raw>/review_script.jsonl   optional headless review actions
//   <raw>/questionnaire.json    optional questionnaire response

struct ProjectionConfig {
  int erp_width = 512;
  int erp_height = 256;
  int view_width = 256;
  int view_height = 256;
  double hfov_deg = 90.0;
};

struct ReviewStageConfig {
  double qa_fraction = 0.10;
  std::uint64_t qa_seed = 0;
  std::string start_time = "2024-01-01T00:00:00Z";  // clock origin for headless review
};

struct ExportStageConfig {
  redact::PlanKind visual_kind = redact::PlanKind::blur;
  redact::RedactionParams params;
};

struct ReportStageConfig {
  std::uint64_t seed = 0;
  std::size_t resamples = 10000;
  double level = 0.95;
  std::string domain = "activity";
  std::vector<metrics::SavingsFactor> factors = metrics::default_savings_factors();
};

struct PipelineConfig {
  std::filesystem::path raw_dir;
  std::filesystem::path session_dir;
  std::filesystem::path store_root;
  std::string session_id;  // taken from the journal when empty
  std::size_t workers = 1;
  segment::SegmenterConfig segmenter;
  detect::DetectorConfig detectors;
  fusion::FusionPolicy fusion = fusion::FusionPolicy::defaults();
  ProjectionConfig projection;
  ReviewStageConfig review;
  ExportStageConfig export_cfg;
  ReportStageConfig report;
  std::string epoch = "2024-01-01T00:00:00Z";  // ingest clock
  std::string software_build;

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Relative paths in `j` resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const Json& j, const std::filesystem::path& base_dir);
Json to_json(const PipelineConfig& c);
PipelineConfig load_pipeline_config(const std::filesystem::path& file);

std::string software_build_id();

}  // namespace gaze::pipeline
