#include "gaze/pipeline/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>

#include "gaze/core/digest.hpp"
#include "gaze/core/media_io.hpp"
#include "gaze/core/thread_pool.hpp"
#include "gaze/detect/suite.hpp"
#include "gaze/export/deliverable.hpp"
#include "gaze/fusion/timeline.hpp"
#include "gaze/ingest/provenance.hpp"
#include "gaze/metrics/report.hpp"
#include "gaze/projection/render.hpp"
#include "gaze/review/questionnaire.hpp"
#include "gaze/review/script.hpp"
#include "gaze/review/session.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::pipeline {

namespace fs = std::filesystem;
using segment::StreamView;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::project: return "project";
    case Stage::segment: return "segment";
    case Stage::detect: return "detect";
    case Stage::fuse: return "fuse";
    case Stage::serve: return "serve";
    case Stage::export_: return "export";
    case Stage::report: return "report";
  }
  return "?";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::ingest, Stage::project, Stage::segment, Stage::detect,
                                         Stage::fuse,   Stage::serve,   Stage::export_, Stage::report};
  return stages;
}

Stage stage_from_string(std::string_view s) {
  for (auto st : all_stages())
    if (to_string(st) == s) return st;
  fail(Errc::ConfigInvalid, "unknown stage '" + std::string(s) + "'");
}

namespace {

TimePoint file_mtime(const fs::path& p) {
  const auto sys = std::chrono::file_clock::to_sys(fs::last_write_time(p));
  return std::chrono::time_point_cast<std::chrono::milliseconds>(sys);
}

std::string digest_or_absent(const fs::path& p) {
  if (!fs::exists(p)) return "absent";
  return fs::is_directory(p) ? tree_digest(p) : sha256_file(p);
}

std::string digest_paths(const fs::path& base, const std::vector<std::string>& rel) {
  Json j = Json::object();
  for (const auto& r : rel) j[r] = digest_or_absent(base / r);
  return sha256_hex(canonical_dump(j));
}

std::optional<Stage> upstream(Stage s) {
  const auto& all = all_stages();
  const auto it = std::find(all.begin(), all.end(), s);
  if (it == all.begin()) return std::nullopt;
  return *(it - 1);
}

const char* kBuiltinFamilies[] = {"detector.tracker", "detector.pii", "detector.motion", "detector.claps"};

std::string fixture_version(const fs::path& file) {
  if (!fs::exists(file)) return "absent";
  const Json j = load_json(file);
  if (j.is_object() && j.contains("model_version") && j.at("model_version").is_string())
    return j.at("model_version").get<std::string>();
  return "fixture-replay/1";
}

}  // namespace

Orchestrator::Orchestrator(PipelineConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::string Orchestrator::session_id() const {
  if (!cfg_.session_id.empty()) return cfg_.session_id;
  const auto journal = ingest::journal_from_json(load_json(cfg_.raw_dir / "session.json"));
  return journal.session_id;
}

SessionLayout Orchestrator::layout() const {
  const fs::path p = cfg_.session_dir / "views.json";
  if (!fs::exists(p)) fail(Errc::SessionUnknown, "project stage has not run for " + cfg_.session_dir.string());
  const Json j = load_json(p);
  SessionLayout l;
  l.spherical = field<std::string>(j, "source") == "dual_fisheye";
  l.primary_view = segment::stream_view_from_string(field<std::string>(j, "primary_view"));
  for (const auto& v : j.at("views")) l.views.push_back(segment::stream_view_from_string(v.get<std::string>()));
  l.duration = field<double>(j, "duration");
  l.has_audio = field<bool>(j, "has_audio");
  return l;
}

Json Orchestrator::status() const {
  const fs::path p = cfg_.session_dir / "status.json";
  return fs::exists(p) ? load_json(p) : Json{{"stages", Json::object()}};
}

void Orchestrator::fill_provenance(const std::map<std::string, std::pair<std::string, Json>>& slots) const {
  const fs::path p = cfg_.session_dir / "ledger.json";
  auto ledger = ingest::ledger_from_json(load_json(p));
  for (const auto& [module, slot] : slots) ledger.fill_provenance(module, slot.first, slot.second);
  save_json(p, to_json(ledger));
}

Json Orchestrator::stage_inputs(Stage s) const {
  Json in{{"stage", std::string(to_string(s))}, {"software_build", cfg_.software_build}};
  if (const auto up = upstream(s)) {
    const Json st = status();
    const std::string name(to_string(*up));
    if (!st.at("stages").contains(name))
      fail(Errc::StageFailed, "stage " + std::string(to_string(s)) + ": upstream stage " + name + " has not run");
    in["upstream"] = st.at("stages").at(name).at("output_digest");
  }
  switch (s) {
    case Stage::ingest:
      in["raw"] = digest_paths(cfg_.raw_dir, {"session.json", "frames", "fisheye_layout.json", "audio.wav"});
      in["session_id"] = cfg_.session_id;
      in["epoch"] = cfg_.epoch;
      break;
    case Stage::project: {
      const auto& p = cfg_.projection;
      in["projection"] = {{"erp_width", p.erp_width}, {"erp_height", p.erp_height}, {"view_width", p.view_width},
                          {"view_height", p.view_height}, {"hfov_deg", p.hfov_deg}};
      break;
    }
    case Stage::segment: in["segmenter"] = segment::to_json(cfg_.segmenter); break;
    case Stage::detect:
      in["detectors"] = detect::to_json(cfg_.detectors);
      in["fixtures"] = digest_or_absent(cfg_.raw_dir / "fixtures");
      if (cfg_.detectors.external_dir) in["external"] = digest_or_absent(*cfg_.detectors.external_dir);
      break;
    case Stage::fuse: in["fusion"] = fusion::to_json(cfg_.fusion); break;
    case Stage::serve:
      in["review"] = {{"qa_fraction", cfg_.review.qa_fraction}, {"qa_seed", cfg_.review.qa_seed}, {"start_time", cfg_.review.start_time}};
      in["script"] = digest_or_absent(cfg_.raw_dir / "review_script.jsonl");
      in["questionnaire"] = digest_or_absent(cfg_.raw_dir / "questionnaire.json");
      break;
    case Stage::export_:
      in["export"] = {{"visual_kind", redact::to_string(cfg_.export_cfg.visual_kind)}, {"params", redact::to_json(cfg_.export_cfg.params)}};
      break;
    case Stage::report: {
      Json factors = Json::array();
      for (const auto& f : cfg_.report.factors) factors.push_back({{"name", f.name}, {"fraction", f.fraction}});
      in["report"] = {{"seed", cfg_.report.seed}, {"resamples", cfg_.report.resamples}, {"level", cfg_.report.level},
                      {"domain", cfg_.report.domain}, {"factors", factors}};
      break;
    }
  }
  return in;
}

std::string Orchestrator::output_digest(Stage s) const {
  const fs::path& d = cfg_.session_dir;
  switch (s) {
    case Stage::ingest: {
      if (!fs::exists(d / "ledger.json")) return "absent";
      const auto ledger = ingest::ledger_from_json(load_json(d / "ledger.json"));
      return sha256_hex(canonical_dump(Json{{"session", digest_or_absent(d / "session.json")}, {"ledger", ledger.ledger_digest}}));
    }
    case Stage::project: return digest_paths(d, {"views.json", "views"});
    case Stage::segment: return digest_paths(d, {"clips.jsonl"});
    case Stage::detect: return digest_paths(d, {"evidence"});
    case Stage::fuse: return digest_paths(d, {"timeline.jsonl", "skips.jsonl", "suppressed.jsonl", "context.jsonl", "policy.json"});
    case Stage::serve: return digest_paths(d, {"review"});
    case Stage::export_: return digest_paths(d, {"deliverable"});
    case Stage::report: return digest_paths(d, {"report.json", "report.txt"});
  }
  return "absent";
}

StageOutcome Orchestrator::run_stage(Stage s, bool force) {
  const std::string name(to_string(s));
  StageOutcome out;
  out.stage = s;
  try {
    fs::create_directories(cfg_.session_dir);
    out.input_digest = sha256_hex(canonical_dump(stage_inputs(s)));
    Json st = status();
    if (!force && st.at("stages").contains(name)) {
      const Json& rec = st.at("stages").at(name);
      if (rec.at("input_digest") == out.input_digest && rec.at("output_digest") == output_digest(s)) {
        out.skipped = true;
        out.output_digest = rec.at("output_digest").get<std::string>();
        return out;
      }
    }
    switch (s) {
      case Stage::ingest: do_ingest(); break;
      case Stage::project: do_project(); break;
      case Stage::segment: do_segment(); break;
      case Stage::detect: do_detect(); break;
      case Stage::fuse: do_fuse(); break;
      case Stage::serve: do_serve(); break;
      case Stage::export_: do_export(); break;
      case Stage::report: do_report(); break;
    }
    out.output_digest = output_digest(s);
    st = status();
    st["session_id"] = session_id();
    st["stages"][name] = {{"input_digest", out.input_digest}, {"output_digest", out.output_digest}};
    save_json(cfg_.session_dir / "status.json", st);
    return out;
  } catch (const Error& e) {
    if (e.code() == Errc::StageFailed) throw;
    fail(Errc::StageFailed, "stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    fail(Errc::StageFailed, "stage " + name + ": " + e.what());
  }
}

std::vector<StageOutcome> Orchestrator::run_all(std::optional<Stage> from) {
  std::vector<StageOutcome> out;
  bool forcing = false;
  for (auto s : all_stages()) {
    if (from && s == *from) forcing = true;
    out.push_back(run_stage(s, forcing));
  }
  return out;
}

void Orchestrator::do_ingest() {
  const fs::path raw = cfg_.raw_dir;
  const std::string journal_text = read_file(raw / "session.json");
  const auto journal = ingest::journal_from_json(Json::parse(journal_text));
  if (!cfg_.session_id.empty() && cfg_.session_id != journal.session_id)
    fail(Errc::ConfigInvalid, "session_id " + cfg_.session_id + " does not match the journal (" + journal.session_id + ")");
  const std::string sid = journal.session_id;

  ingest::LocalObjectStore store(cfg_.store_root);
  const TimePoint epoch = parse_utc(cfg_.epoch);
  ingest::IngestService svc(store, [epoch] { return epoch; });
  svc.register_journal(journal);

  // The frame bundle manifest is the canonical index of per-frame hashes;
  // the frames themselves go into the store individually.
  const fs::path frames_dir = raw / "frames";
  const auto entries = read_frame_index(frames_dir);
  if (entries.empty()) fail(Errc::EmptySession, "no frames in " + frames_dir.string());
  Json frames = Json::array();
  for (const auto& e : entries) {
    const std::string bytes = read_file(frame_path(frames_dir, e.index));
    const std::string hash = sha256_hex(bytes);
    store.put_object(hash, {reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
    frames.push_back({{"index", e.index}, {"t_seconds", e.t_seconds}, {"sha256", hash}});
  }
  const fs::path layout_file = raw / "fisheye_layout.json";
  const Json bundle{{"frames", frames}, {"fisheye_layout", fs::exists(layout_file) ? load_json(layout_file) : Json(nullptr)}};

  std::vector<ingest::AssetManifest> manifests;
  manifests.push_back(svc.ingest_asset(canonical_dump(bundle), ingest::MediaKind::video_raster_bundle, sid,
                                       file_mtime(frames_dir / "frames.json")));
  if (fs::exists(raw / "audio.wav"))
    manifests.push_back(svc.ingest_asset(read_file(raw / "audio.wav"), ingest::MediaKind::audio_pcm, sid, file_mtime(raw / "audio.wav")));
  manifests.push_back(svc.ingest_asset(journal_text, ingest::MediaKind::journal, sid, file_mtime(raw / "session.json")));

  Json assets = Json::array();
  for (const auto& m : manifests) assets.push_back(ingest::to_json(m));
  save_json(cfg_.session_dir / "session.json", {{"session_id", sid}, {"journal", ingest::to_json(journal)}, {"assets", assets}});
  save_json(cfg_.session_dir / "ledger.json", ingest::to_json(svc.seal_ledger(sid)));
}

void Orchestrator::do_project() {
  const fs::path raw_frames = cfg_.raw_dir / "frames";
  const fs::path views_dir = cfg_.session_dir / "views";
  fs::remove_all(views_dir);
  const FrameSequence seq(raw_frames);
  if (seq.size() == 0) fail(Errc::EmptySession, "no frames");
  const bool spherical = fs::exists(cfg_.raw_dir / "fisheye_layout.json");
  const auto& pc = cfg_.projection;

  std::vector<StreamView> views;
  if (spherical) {
    const auto layout = projection::layout_from_json(load_json(cfg_.raw_dir / "fisheye_layout.json"));
    const Frame first = seq.load(0);
    projection::validate_layout(layout, first.image.width, first.image.height);
    const auto specs = projection::default_views(pc.view_width, pc.view_height, pc.hfov_deg);
    views.push_back(StreamView::erp);
    for (const auto& v : specs) views.push_back(segment::stream_view_from_string(projection::to_string(v.name)));
    for (auto v : views) fs::create_directories(views_dir / std::string(segment::to_string(v)));
    parallel_for(seq.size(), cfg_.workers, [&](std::size_t i) {
      const Frame erp = projection::dewarp_fisheye_to_erp(seq.load(i), layout, pc.erp_width, pc.erp_height);
      const int idx = seq.entries()[i].index;
      write_file_atomic(frame_path(views_dir / "erp", idx), ppm_bytes(erp.image));
      for (const auto& v : specs) {
        const Frame r = projection::render_rectilinear_view(erp, v);
        write_file_atomic(frame_path(views_dir / std::string(projection::to_string(v.name)), idx), ppm_bytes(r.image));
      }
    });
  } else {
    views.push_back(StreamView::front);
    fs::create_directories(views_dir / "front");
    for (const auto& e : seq.entries())
      fs::copy_file(frame_path(raw_frames, e.index), frame_path(views_dir / "front", e.index), fs::copy_options::overwrite_existing);
  }
  Json names = Json::array();
  for (auto v : views) {
    write_frame_index(views_dir / std::string(segment::to_string(v)), seq.entries());
    names.push_back(std::string(segment::to_string(v)));
  }
  save_json(cfg_.session_dir / "views.json",
            {{"source", spherical ? "dual_fisheye" : "rectilinear"},
             {"primary_view", spherical ? "erp" : "front"},
             {"views", names},
             {"duration", seq.duration()},
             {"has_audio", fs::exists(cfg_.raw_dir / "audio.wav")}});
  fill_provenance({{"projection",
                    {cfg_.software_build,
                     {{"erp_width", pc.erp_width}, {"erp_height", pc.erp_height}, {"view_width", pc.view_width},
                      {"view_height", pc.view_height}, {"hfov_deg", pc.hfov_deg}}}}});
}

namespace {

PcmAudio load_audio(const fs::path& raw_dir) {
  const fs::path p = raw_dir / "audio.wav";
  if (fs::exists(p)) return read_wav(p);
  PcmAudio none;
  none.sample_rate = 16000;
  return none;
}

std::vector<segment::ClipRecord> load_clips(const fs::path& session_dir) {
  std::vector<segment::ClipRecord> clips;
  for (const auto& j : read_jsonl(session_dir / "clips.jsonl")) clips.push_back(segment::clip_from_json(j));
  return clips;
}

}  // namespace

void Orchestrator::do_segment() {
  const auto l = layout();
  const PcmAudio audio = load_audio(cfg_.raw_dir);
  std::vector<Json> lines;
  for (auto v : l.views) {
    const FrameSequence seq(cfg_.session_dir / "views" / std::string(segment::to_string(v)));
    const auto lens = (l.spherical && v == StreamView::erp) ? segment::LensKind::fisheye : segment::LensKind::rectilinear;
    for (const auto& c : segment::segment_stream(session_id(), v, lens, seq, audio, l.duration, cfg_.segmenter, cfg_.workers))
      lines.push_back(segment::to_json(c));
  }
  write_jsonl(cfg_.session_dir / "clips.jsonl", lines);
  fill_provenance({{"segmenter", {cfg_.software_build, segment::to_json(cfg_.segmenter)}}});
}

void Orchestrator::do_detect() {
  const auto l = layout();
  const PcmAudio audio = load_audio(cfg_.raw_dir);
  detect::SuiteInputs in;
  in.session_dir = cfg_.session_dir;
  in.clips = load_clips(cfg_.session_dir);
  in.primary_view = l.primary_view;
  in.fixtures_dir = cfg_.raw_dir / "fixtures";
  in.audio = l.has_audio ? &audio : nullptr;
  in.segmenter = cfg_.segmenter;
  detect::run_detector_suite(in, cfg_.detectors, cfg_.workers);

  const fs::path fx = in.fixtures_dir;
  const Json dcfg = detect::to_json(cfg_.detectors);
  std::map<std::string, std::pair<std::string, Json>> slots{
      {"detector.caption", {fixture_version(fx / "captions.json"), {{"caption_top_k", cfg_.detectors.caption_top_k}}}},
      {"detector.tags", {fixture_version(fx / "tags.json"), Json::object()}},
      {"detector.nsfw", {fixture_version(fx / "nsfw.json"), Json::object()}},
      {"detector.age", {fixture_version(fx / "faces.json"), {{"adult_threshold", cfg_.detectors.adult_threshold}}}},
      {"detector.asr", {fixture_version(fx / "asr.json"), Json::object()}},
  };
  for (const char* m : kBuiltinFamilies) {
    const std::string key = std::string(m).substr(std::string("detector.").size());
    slots[m] = {cfg_.software_build, dcfg.contains(key) ? dcfg.at(key) : Json::object()};
  }
  fill_provenance(slots);
}

namespace {

fusion::FusionPolicy effective_policy(fusion::FusionPolicy p, bool has_audio) {
  // Without an audio track every clip reads as silent; loudness then carries no information.
  if (!has_audio) p.autoskip.loudness_below = std::numeric_limits<double>::lowest();
  return p;
}

}  // namespace

void Orchestrator::do_fuse() {
  const auto l = layout();
  const auto policy = effective_policy(cfg_.fusion, l.has_audio);
  const auto evidence = detect::load_evidence(cfg_.session_dir / "evidence");
  const auto result = fusion::build_timeline(evidence, load_clips(cfg_.session_dir), policy, l.duration, l.primary_view);
  fusion::write_fusion_outputs(cfg_.session_dir, result);
  save_json(cfg_.session_dir / "policy.json", fusion::to_json(policy));
  fill_provenance({{"fusion", {cfg_.software_build, fusion::to_json(policy)}}});
}

void Orchestrator::do_serve() {
  const auto l = layout();
  review::ReviewConfig rc;
  rc.qa_fraction = cfg_.review.qa_fraction;
  rc.qa_seed = cfg_.review.qa_seed;
  rc.duration = l.duration;
  for (const auto& [cls, thr] : cfg_.fusion.thresholds) rc.thresholds[std::string(detect::to_string(cls))] = thr;

  SteppingClock clock(parse_utc(cfg_.review.start_time));
  const fs::path review_dir = cfg_.session_dir / "review";
  fs::remove_all(review_dir);
  review::ReviewSession session(session_id(), fusion::load_timeline(cfg_.session_dir / "timeline.jsonl"),
                                fusion::load_skips(cfg_.session_dir / "skips.jsonl"), clock.as_clock(), rc, review_dir);
  const fs::path script_file = cfg_.raw_dir / "review_script.jsonl";
  const fs::path q_file = cfg_.raw_dir / "questionnaire.json";
  const auto script = fs::exists(script_file) ? read_jsonl(script_file) : std::vector<Json>{};
  const Json questionnaire = fs::exists(q_file) ? load_json(q_file) : review::questionnaire_template();
  const auto result = review::run_batch_review(session, script, questionnaire, clock);
  review::write_review_log(review_dir / "review_log.jsonl", result.review_log);
  fill_provenance({{"review", {cfg_.software_build, {{"qa_fraction", rc.qa_fraction}, {"qa_seed", rc.qa_seed}}}}});
}

void Orchestrator::do_export() {
  const auto l = layout();
  fill_provenance({{"export",
                    {cfg_.software_build,
                     {{"visual_kind", redact::to_string(cfg_.export_cfg.visual_kind)}, {"params", redact::to_json(cfg_.export_cfg.params)}}}}});
  const auto ledger = ingest::ledger_from_json(load_json(cfg_.session_dir / "ledger.json"));

  redact::ProvenanceBundle prov;
  for (const auto& [module, slot] : ledger.pipeline_provenance) {
    prov.model_versions[module] = slot.version;
    prov.thresholds[module] = slot.thresholds;
  }
  prov.software_build = cfg_.software_build;
  prov.ledger_digest = ledger.ledger_digest;
  const auto audit = review::split_lines(read_file(cfg_.session_dir / "review" / "audit.jsonl"));
  if (audit.empty()) fail(Errc::NotFinalized, "empty audit log");
  const Json last = Json::parse(audit.back());
  if (last.at("operation") != "finalize") fail(Errc::NotFinalized, "audit log does not end with finalize");
  prov.reviewer_ids = last.at("detail").at("reviewer_ids").get<std::vector<std::string>>();

  redact::ExportConfig ec;
  ec.visual_kind = cfg_.export_cfg.visual_kind;
  ec.params = cfg_.export_cfg.params;
  ec.workers = cfg_.workers;
  if (l.spherical) ec.views = projection::default_views(cfg_.projection.view_width, cfg_.projection.view_height, cfg_.projection.hfov_deg);

  redact::MediaSource media;
  media.frames_dir = cfg_.session_dir / "views" / std::string(segment::to_string(l.primary_view));
  media.view = l.primary_view;
  if (l.has_audio) media.audio = cfg_.raw_dir / "audio.wav";
  media.duration = l.duration;
  const fs::path out = cfg_.session_dir / "deliverable";
  fs::remove_all(out);
  redact::export_session(cfg_.session_dir, media, prov, ec, out);
}

void Orchestrator::do_report() {
  const auto l = layout();
  const auto r = metrics::build_session_report(cfg_.session_dir, session_id(), l.duration, cfg_.report.domain);
  metrics::ReportOptions opts;
  opts.seed = cfg_.report.seed;
  opts.resamples = cfg_.report.resamples;
  opts.level = cfg_.report.level;
  opts.factors = cfg_.report.factors;
  const Json report = metrics::build_report({r}, opts);
  save_json(cfg_.session_dir / "report.json", report);
  write_file_atomic(cfg_.session_dir / "report.txt", metrics::report_text(report, opts));
}

}  // namespace gaze::pipeline
