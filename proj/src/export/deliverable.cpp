#include "gaze/export/deliverable.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gaze/core/digest.hpp"
#include "gaze/core/thread_pool.hpp"
#include "gaze/detect/evidence.hpp"
#include "gaze/ingest/provenance.hpp"

namespace gaze::redact {

namespace fs = std::filesystem;
using segment::StreamView;

Json to_json(const ProvenanceBundle& p) {
  return Json{{"model_versions", p.model_versions},
              {"thresholds", p.thresholds},
              {"reviewer_ids", p.reviewer_ids},
              {"software_build", p.software_build},
              {"ledger_digest", p.ledger_digest}};
}

void validate_provenance(const ProvenanceBundle& p) {
  if (p.model_versions.empty()) fail(Errc::SchemaViolation, "provenance: model_versions is empty");
  for (const auto& [m, v] : p.model_versions)
    if (v.empty()) fail(Errc::SchemaViolation, "provenance: no version for " + m);
  if (p.thresholds.empty()) fail(Errc::SchemaViolation, "provenance: thresholds are empty");
  if (p.reviewer_ids.empty()) fail(Errc::SchemaViolation, "provenance: reviewer_ids is empty");
  if (p.software_build.empty()) fail(Errc::SchemaViolation, "provenance: software_build is empty");
  if (!is_hex_digest(p.ledger_digest)) fail(Errc::SchemaViolation, "provenance: ledger_digest is not a digest");
}

namespace {

std::optional<projection::ViewName> rectilinear_name(StreamView v) {
  switch (v) {
    case StreamView::front: return projection::ViewName::front;
    case StreamView::right: return projection::ViewName::right;
    case StreamView::back: return projection::ViewName::back;
    case StreamView::left: return projection::ViewName::left;
    case StreamView::erp: return std::nullopt;
  }
  return std::nullopt;
}

// Boxes in the target raster covering a region; the whole frame when the
// region's view cannot be carried over.
std::vector<Box> target_boxes(const Json& region, const ExportConfig& cfg, StreamView target, int width, int height) {
  const Box whole{0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
  const StreamView v = segment::stream_view_from_string(field<std::string>(region, "view"));
  const Box box = box_from_json(field<Json>(region, "box"));
  if (v == target) return {box};
  if (target != StreamView::erp) return {whole};
  const auto name = rectilinear_name(v);
  const auto spec = std::find_if(cfg.views.begin(), cfg.views.end(),
                                 [&](const projection::ViewSpec& s) { return name && s.name == *name; });
  if (spec == cfg.views.end()) return {whole};
  return projection::view_box_to_erp(*spec, box, width, height);
}

std::string suffix(const char* tag, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#%s%03zu", tag, i);
  return buf;
}

}  // namespace

std::vector<RedactionPlan> plans_from_labels(const std::vector<Json>& final_labels, const ExportConfig& cfg,
                                             StreamView target, int width, int height, double duration) {
  std::vector<RedactionPlan> plans;
  for (const auto& label : final_labels) {
    if (!field<bool>(label, "actionable")) continue;
    const std::string id = field<std::string>(label, "timeline_id");
    const Span span{std::clamp(field<double>(label, "t_start"), 0.0, duration),
                    std::clamp(field<double>(label, "t_end"), 0.0, duration)};
    const auto action = detect::action_from_string(field<std::string>(label, "action"));
    RedactionPlan base;
    base.span = span;
    base.params = cfg.params;
    switch (action) {
      case detect::Action::blur:
      case detect::Action::blur_and_review: {
        base.kind = cfg.visual_kind;
        base.view = target;
        std::vector<Box> boxes;
        for (const auto& r : field_or<Json>(label, "regions", Json::array())) {
          const auto b = target_boxes(r, cfg, target, width, height);
          boxes.insert(boxes.end(), b.begin(), b.end());
        }
        if (boxes.empty()) boxes.push_back({0.0, 0.0, static_cast<double>(width), static_cast<double>(height)});
        for (std::size_t i = 0; i < boxes.size(); ++i) {
          RedactionPlan p = base;
          p.plan_id = id + suffix("r", i);
          p.box = boxes[i];
          plans.push_back(std::move(p));
        }
        break;
      }
      case detect::Action::mute:
      case detect::Action::tone_replace:
      case detect::Action::withhold: {
        base.kind = action == detect::Action::mute           ? PlanKind::mute
                    : action == detect::Action::tone_replace ? PlanKind::tone_replace
                                                             : PlanKind::withhold;
        base.plan_id = id + suffix("a", 0);
        plans.push_back(std::move(base));
        break;
      }
      case detect::Action::text_overlay: {
        base.kind = PlanKind::text_overlay;
        base.view = target;
        // caption bar over the bottom tenth of the frame
        const double bar = std::max(1.0, std::round(height * 0.1));
        base.box = Box{0.0, height - bar, static_cast<double>(width), bar};
        std::string text;
        for (const auto& l : field_or<std::vector<std::string>>(label, "labels", {})) text += (text.empty() ? "" : ",") + l;
        base.text = "[" + (text.empty() ? std::string("REDACTED") : text) + "]";
        base.plan_id = id + suffix("t", 0);
        plans.push_back(std::move(base));
        break;
      }
      case detect::Action::skip:
      case detect::Action::none:
        break;
    }
  }
  for (const auto& p : plans) validate_plan(p);
  std::sort(plans.begin(), plans.end(), [](const RedactionPlan& a, const RedactionPlan& b) { return a.plan_id < b.plan_id; });
  return plans;
}

std::vector<std::string> unredacted_governance(const std::vector<Json>& final_labels,
                                               const std::vector<MappingSegment>& mapping) {
  std::vector<std::string> out;
  for (const auto& label : final_labels) {
    if (!field<bool>(label, "actionable")) continue;
    if (!detect::is_governance(detect::evidence_class_from_string(field<std::string>(label, "class")))) continue;
    const std::string id = field<std::string>(label, "timeline_id");
    const Span span{field<double>(label, "t_start"), field<double>(label, "t_end")};
    for (const auto& m : mapping) {
      if (!m.exported || !intersects(m.raw, span)) continue;
      const bool covered = std::any_of(m.plan_ids.begin(), m.plan_ids.end(),
                                       [&](const std::string& p) { return p.rfind(id + "#", 0) == 0; });
      if (!covered) {
        out.push_back(id + " exported unredacted over [" + std::to_string(m.raw.start) + ", " + std::to_string(m.raw.end) + "]");
        break;
      }
    }
  }
  return out;
}

namespace {

bool inside_any(const std::vector<Span>& spans, double t) {
  return std::any_of(spans.begin(), spans.end(), [t](const Span& s) { return t >= s.start && t < s.end; });
}

double withheld_before(const std::vector<Span>& spans, double t) {
  double total = 0.0;
  for (const auto& s : spans) total += std::max(0.0, std::min(s.end, t) - s.start);
  return total;
}

}  // namespace

ExportSummary export_session(const fs::path& session_dir, const MediaSource& media, const ProvenanceBundle& provenance,
                             const ExportConfig& cfg, const fs::path& out_dir) {
  const fs::path review = session_dir / "review";
  if (!fs::exists(review / "state.json") || !load_json(review / "state.json").value("finalized", false))
    fail(Errc::NotFinalized, "review for " + session_dir.string() + " has not been finalized");
  const Json state = load_json(review / "state.json");
  const std::string finalized_at = field<std::string>(state, "finalized_at");
  validate_provenance(provenance);
  if (!(media.duration > 0.0)) fail(Errc::ZeroDuration, "export needs a positive media duration");

  const auto labels = read_jsonl(review / "final_labels.jsonl");
  const FrameSequence frames(media.frames_dir);
  if (frames.size() == 0) fail(Errc::EmptySession, "no frames to export");
  const Frame first = frames.load(0);

  ExportSummary sum;
  sum.plans = plans_from_labels(labels, cfg, media.view, first.image.width, first.image.height, media.duration);
  sum.mapping = build_mapping(sum.plans, media.duration);
  const auto withheld = withheld_spans(sum.plans);
  sum.export_duration = media.duration - withheld_before(withheld, media.duration);

  fs::remove_all(out_dir);
  fs::create_directories(out_dir / "frames");

  // frames: decide per frame, then render in parallel
  struct Job {
    std::size_t src = 0;
    int out_index = 0;
    std::vector<const RedactionPlan*> plans;
  };
  std::vector<Job> jobs;
  std::vector<FrameEntry> out_entries;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double t = frames.entries()[i].t_seconds;
    if (inside_any(withheld, t)) {
      ++sum.frames_withheld;
      continue;
    }
    Job job{i, static_cast<int>(out_entries.size()), {}};
    for (const auto& p : sum.plans)
      if (is_visual(p.kind) && t >= p.span.start && t <= p.span.end) job.plans.push_back(&p);
    out_entries.push_back({job.out_index, t - withheld_before(withheld, t)});
    jobs.push_back(std::move(job));
  }
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    const fs::path src = frame_path(media.frames_dir, frames.entries()[job.src].index);
    const fs::path dst = frame_path(out_dir / "frames", job.out_index);
    if (job.plans.empty()) {
      write_file_atomic(dst, read_file(src));
      return;
    }
    write_ppm(dst, render_visual_plans(read_ppm(src), job.plans));
  });
  for (const auto& j : jobs) sum.frames_rendered += !j.plans.empty();
  sum.frames_written = jobs.size();
  write_frame_index(out_dir / "frames", out_entries);

  // audio: lowest plan id wins where audio plans overlap, so apply highest first
  if (media.audio) {
    const PcmAudio raw = read_wav(*media.audio);
    PcmAudio audio = raw;
    bool touched = false;
    for (auto it = sum.plans.rbegin(); it != sum.plans.rend(); ++it) {
      if (!is_audio(it->kind)) continue;
      RedactionPlan p = *it;
      p.view.reset();
      p.box.reset();
      p.kind = it->kind == PlanKind::text_overlay ? PlanKind::mute : it->kind;
      p.span.end = std::min(p.span.end, audio.duration());
      p.span.start = std::min(p.span.start, p.span.end);
      audio = render_audio_redaction(audio, p);
      touched = true;
    }
    if (!withheld.empty()) {
      std::vector<std::int16_t> kept;
      kept.reserve(audio.samples.size());
      std::size_t cursor = 0;
      for (const auto& w : withheld) {
        Span s{std::min(w.start, audio.duration()), std::min(w.end, audio.duration())};
        const auto [b, e] = sample_range(s, audio.sample_rate, audio.samples.size());
        kept.insert(kept.end(), audio.samples.begin() + static_cast<std::ptrdiff_t>(cursor),
                    audio.samples.begin() + static_cast<std::ptrdiff_t>(std::max(b, cursor)));
        cursor = std::max(cursor, e);
      }
      kept.insert(kept.end(), audio.samples.begin() + static_cast<std::ptrdiff_t>(cursor), audio.samples.end());
      audio.samples = std::move(kept);
      touched = true;
    }
    if (touched)
      write_wav(out_dir / "audio.wav", audio);
    else
      write_file_atomic(out_dir / "audio.wav", read_file(*media.audio));
  }

  Json mapping = Json::array();
  for (const auto& m : sum.mapping) mapping.push_back(to_json(m));
  save_json(out_dir / "mapping.json", Json{{"duration", media.duration}, {"export_duration", sum.export_duration}, {"segments", mapping}});
  std::vector<Json> plan_lines;
  for (const auto& p : sum.plans) plan_lines.push_back(to_json(p));
  write_jsonl(out_dir / "plans.jsonl", plan_lines);
  save_json(out_dir / "provenance.json", to_json(provenance));
  write_file_atomic(out_dir / "final_labels.jsonl", read_file(review / "final_labels.jsonl"));

  // deliverable ledger, hashed the same way as ingest
  ingest::SessionLedger ledger;
  ledger.session_id = field<std::string>(state, "session_id");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(out_dir))
    if (e.is_regular_file() && e.path().filename() != "export_ledger.json") files.push_back(fs::relative(e.path(), out_dir));
  std::sort(files.begin(), files.end());
  for (const auto& rel : files) {
    const fs::path abs = out_dir / rel;
    ledger.entries.push_back({rel.generic_string(), sha256_file(abs), static_cast<std::uint64_t>(fs::file_size(abs)), finalized_at});
  }
  ledger.ledger_digest = ingest::SessionLedger::compute_digest(ledger.entries);
  for (const auto& [m, v] : provenance.model_versions) ledger.fill_provenance(m, v, provenance.thresholds.value(m, Json::object()));
  save_json(out_dir / "export_ledger.json", to_json(ledger));
  return sum;
}

}  // namespace gaze::redact
