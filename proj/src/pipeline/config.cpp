#include "gaze/pipeline/config.hpp"

#include <algorithm>

namespace gaze::pipeline {

namespace fs = std::filesystem;

#ifndef GAZE_VERSION
#define GAZE_VERSION "0.0.0"
#endif

std::string software_build_id() { return std::string("gaze-") + GAZE_VERSION; }

void PipelineConfig::validate() const {
  if (workers < 1) fail(Errc::ConfigInvalid, "workers must be >= 1");
  if (raw_dir.empty() || !fs::is_directory(raw_dir)) fail(Errc::ConfigInvalid, "raw_dir does not exist: " + raw_dir.string());
  if (session_dir.empty()) fail(Errc::ConfigInvalid, "session_dir is required");
  if (store_root.empty()) fail(Errc::ConfigInvalid, "store_root is required");
  if (detectors.external_dir && !fs::is_directory(*detectors.external_dir))
    fail(Errc::ConfigInvalid, "detectors.external_dir does not exist: " + detectors.external_dir->string());
  if (projection.erp_width <= 0 || projection.erp_height <= 0 || projection.view_width <= 0 || projection.view_height <= 0)
    fail(Errc::ConfigInvalid, "projection sizes must be positive");
  if (projection.erp_width != 2 * projection.erp_height) fail(Errc::ConfigInvalid, "ERP raster must be 2:1");
  if (!(projection.hfov_deg > 0.0 && projection.hfov_deg < 180.0)) fail(Errc::ConfigInvalid, "hfov_deg must be in (0, 180)");
  if (!(review.qa_fraction > 0.0 && review.qa_fraction <= 1.0)) fail(Errc::ConfigInvalid, "review.qa_fraction must be in (0, 1]");
  if (software_build.empty()) fail(Errc::ConfigInvalid, "software_build is empty");
  try {
    parse_utc(review.start_time);
    parse_utc(epoch);
    segmenter.validate();
    detectors.tracker.validate();
    detectors.pii.validate();
    fusion.validate();
    metrics::savings_model(report.factors);
  } catch (const Error& e) {
    fail(Errc::ConfigInvalid, e.what());
  }
  if (!(report.level > 0.0 && report.level < 1.0) || report.resamples == 0)
    fail(Errc::ConfigInvalid, "report level must be in (0, 1) and resamples >= 1");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename Fn>
auto sub(const Json& j, const char* key, Fn&& parse) {
  try {
    return parse(j.contains(key) ? j.at(key) : Json::object());
  } catch (const Error& e) {
    fail(Errc::ConfigInvalid, std::string(key) + ": " + e.what());
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) fail(Errc::ConfigInvalid, "config must be a JSON object");
  static const std::vector<std::string> known{"raw_dir", "session_dir", "store_root", "session_id", "workers",
                                              "segmenter", "detectors", "fusion", "projection", "review",
                                              "export", "report", "epoch", "software_build"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) fail(Errc::ConfigInvalid, "unknown config key '" + k + "'");

  PipelineConfig c;
  c.raw_dir = resolve(base_dir, field<std::string>(j, "raw_dir", Errc::ConfigInvalid));
  c.session_dir = resolve(base_dir, field<std::string>(j, "session_dir", Errc::ConfigInvalid));
  c.store_root = resolve(base_dir, field_or<std::string>(j, "store_root", (c.session_dir / "store").string(), Errc::ConfigInvalid));
  c.session_id = field_or<std::string>(j, "session_id", "", Errc::ConfigInvalid);
  const auto workers = field_or<std::int64_t>(j, "workers", 1, Errc::ConfigInvalid);
  if (workers < 1) fail(Errc::ConfigInvalid, "workers must be >= 1");
  c.workers = static_cast<std::size_t>(workers);
  c.segmenter = sub(j, "segmenter", segment::segmenter_config_from_json);
  c.detectors = sub(j, "detectors", detect::detector_config_from_json);
  if (c.detectors.external_dir) c.detectors.external_dir = resolve(base_dir, c.detectors.external_dir->string());
  c.fusion = j.contains("fusion") ? sub(j, "fusion", fusion::fusion_policy_from_json) : fusion::FusionPolicy::defaults();

  const Json p = field_or<Json>(j, "projection", Json::object(), Errc::ConfigInvalid);
  c.projection.erp_width = field_or<int>(p, "erp_width", c.projection.erp_width, Errc::ConfigInvalid);
  c.projection.erp_height = field_or<int>(p, "erp_height", c.projection.erp_height, Errc::ConfigInvalid);
  c.projection.view_width = field_or<int>(p, "view_width", c.projection.view_width, Errc::ConfigInvalid);
  c.projection.view_height = field_or<int>(p, "view_height", c.projection.view_height, Errc::ConfigInvalid);
  c.projection.hfov_deg = field_or<double>(p, "hfov_deg", c.projection.hfov_deg, Errc::ConfigInvalid);

  const Json r = field_or<Json>(j, "review", Json::object(), Errc::ConfigInvalid);
  c.review.qa_fraction = field_or<double>(r, "qa_fraction", c.review.qa_fraction, Errc::ConfigInvalid);
  c.review.qa_seed = field_or<std::uint64_t>(r, "qa_seed", c.review.qa_seed, Errc::ConfigInvalid);
  c.review.start_time = field_or<std::string>(r, "start_time", c.review.start_time, Errc::ConfigInvalid);

  const Json e = field_or<Json>(j, "export", Json::object(), Errc::ConfigInvalid);
  c.export_cfg.visual_kind = sub(e, "visual_kind", [](const Json& v) {
    return v.is_string() ? redact::plan_kind_from_string(v.get<std::string>()) : redact::PlanKind::blur;
  });
  if (!redact::is_visual(c.export_cfg.visual_kind) || c.export_cfg.visual_kind == redact::PlanKind::text_overlay)
    fail(Errc::ConfigInvalid, "export.visual_kind must be blur, mosaic or box");
  if (e.contains("params")) c.export_cfg.params = redact::redaction_params_from_json(e.at("params"));

  const Json rp = field_or<Json>(j, "report", Json::object(), Errc::ConfigInvalid);
  c.report.seed = field_or<std::uint64_t>(rp, "seed", c.report.seed, Errc::ConfigInvalid);
  c.report.resamples = field_or<std::size_t>(rp, "resamples", c.report.resamples, Errc::ConfigInvalid);
  c.report.level = field_or<double>(rp, "level", c.report.level, Errc::ConfigInvalid);
  c.report.domain = field_or<std::string>(rp, "domain", c.report.domain, Errc::ConfigInvalid);
  if (rp.contains("factors")) {
    c.report.factors.clear();
    for (const auto& f : rp.at("factors"))
      c.report.factors.push_back({field<std::string>(f, "name", Errc::ConfigInvalid), field<double>(f, "fraction", Errc::ConfigInvalid)});
  }
  c.epoch = field_or<std::string>(j, "epoch", c.epoch, Errc::ConfigInvalid);
  c.software_build = field_or<std::string>(j, "software_build", software_build_id(), Errc::ConfigInvalid);
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json factors = Json::array();
  for (const auto& f : c.report.factors) factors.push_back({{"name", f.name}, {"fraction", f.fraction}});
  Json j{{"raw_dir", c.raw_dir.string()},
         {"session_dir", c.session_dir.string()},
         {"store_root", c.store_root.string()},
         {"session_id", c.session_id},
         {"workers", c.workers},
         {"segmenter", segment::to_json(c.segmenter)},
         {"detectors", detect::to_json(c.detectors)},
         {"fusion", fusion::to_json(c.fusion)},
         {"projection",
          {{"erp_width", c.projection.erp_width},
           {"erp_height", c.projection.erp_height},
           {"view_width", c.projection.view_width},
           {"view_height", c.projection.view_height},
           {"hfov_deg", c.projection.hfov_deg}}},
         {"review", {{"qa_fraction", c.review.qa_fraction}, {"qa_seed", c.review.qa_seed}, {"start_time", c.review.start_time}}},
         {"export", {{"visual_kind", redact::to_string(c.export_cfg.visual_kind)}, {"params", redact::to_json(c.export_cfg.params)}}},
         {"report",
          {{"seed", c.report.seed}, {"resamples", c.report.resamples}, {"level", c.report.level}, {"domain", c.report.domain}, {"factors", factors}}},
         {"epoch", c.epoch},
         {"software_build", c.software_build}};
  return j;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
  Json j;
  try {
    j = Json::parse(read_file(file));
  } catch (const Json::parse_error& e) {
    fail(Errc::ConfigInvalid, file.string() + ": " + e.what());
  } catch (const Error& e) {
    fail(Errc::ConfigInvalid, e.what());
  }
  return pipeline_config_from_json(j, fs::absolute(file).parent_path());
}

}  // namespace gaze::pipeline
