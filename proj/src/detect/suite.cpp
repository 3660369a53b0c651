#include "gaze/detect/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gaze/core/thread_pool.hpp"

namespace gaze::detect {

namespace fs = std::filesystem;

Json to_json(const DetectorConfig& c) {
  Json j{{"claps",
          {{"band_low_hz", c.claps.band_low_hz},
           {"band_high_hz", c.claps.band_high_hz},
           {"min_gap_s", c.claps.min_gap_s},
           {"k_sigma", c.claps.k_sigma},
           {"hop_s", c.claps.hop_s}}},
         {"pii", to_json(c.pii)},
         {"motion", to_json(c.motion)},
         {"tracker", to_json(c.tracker)},
         {"caption_top_k", c.caption_top_k},
         {"face_fps", c.face_fps},
         {"adult_threshold", c.adult_threshold},
         {"crowd_window_s", c.crowd_window_s}};
  j["external_dir"] = c.external_dir ? Json(c.external_dir->string()) : Json(nullptr);
  return j;
}

DetectorConfig detector_config_from_json(const Json& j) {
  DetectorConfig c;
  if (j.contains("claps")) {
    const auto& k = j.at("claps");
    c.claps.band_low_hz = field_or<double>(k, "band_low_hz", c.claps.band_low_hz, Errc::BadConfig);
    c.claps.band_high_hz = field_or<double>(k, "band_high_hz", c.claps.band_high_hz, Errc::BadConfig);
    c.claps.min_gap_s = field_or<double>(k, "min_gap_s", c.claps.min_gap_s, Errc::BadConfig);
    c.claps.k_sigma = field_or<double>(k, "k_sigma", c.claps.k_sigma, Errc::BadConfig);
    c.claps.hop_s = field_or<double>(k, "hop_s", c.claps.hop_s, Errc::BadConfig);
  }
  if (j.contains("pii")) c.pii = pii_policy_from_json(j.at("pii"));
  if (j.contains("motion")) c.motion = motion_params_from_json(j.at("motion"));
  if (j.contains("tracker")) c.tracker = tracker_params_from_json(j.at("tracker"));
  c.caption_top_k = field_or<std::size_t>(j, "caption_top_k", c.caption_top_k, Errc::BadConfig);
  c.face_fps = field_or<double>(j, "face_fps", c.face_fps, Errc::BadConfig);
  c.adult_threshold = field_or<double>(j, "adult_threshold", c.adult_threshold, Errc::BadConfig);
  c.crowd_window_s = field_or<double>(j, "crowd_window_s", c.crowd_window_s, Errc::BadConfig);
  if (j.contains("external_dir") && !j.at("external_dir").is_null())
    c.external_dir = fs::path(field<std::string>(j, "external_dir", Errc::BadConfig));
  return c;
}

const std::vector<std::string>& evidence_item_files() {
  static const std::vector<std::string> files{"caption.jsonl", "tags.jsonl",   "tracks.jsonl", "age.jsonl",
                                              "nsfw.jsonl",    "pii.jsonl",    "motion.jsonl", "claps.jsonl",
                                              "external.jsonl"};
  return files;
}

SessionFrames::SessionFrames(const fs::path& session_dir) {
  for (auto v : {StreamView::erp, StreamView::front, StreamView::right, StreamView::back, StreamView::left}) {
    const auto dir = session_dir / "views" / std::string(segment::to_string(v));
    if (fs::exists(dir / "frames.json")) views_.emplace(v, FrameSequence(dir));
  }
}

const FrameSequence* SessionFrames::sequence(StreamView view) const {
  const auto it = views_.find(view);
  return it == views_.end() ? nullptr : &it->second;
}

std::optional<std::size_t> SessionFrames::nearest(StreamView view, double t) const {
  const auto* seq = sequence(view);
  if (!seq || seq->size() == 0) return std::nullopt;
  const auto& e = seq->entries();
  const auto it = std::lower_bound(e.begin(), e.end(), t, [](const FrameEntry& a, double v) { return a.t_seconds < v; });
  if (it == e.begin()) return 0;
  if (it == e.end()) return e.size() - 1;
  const auto hi = static_cast<std::size_t>(it - e.begin());
  return (t - e[hi - 1].t_seconds <= it->t_seconds - t) ? hi - 1 : hi;
}

std::string SessionFrames::uri(StreamView view, std::size_t pos) const {
  const auto* seq = sequence(view);
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.ppm", seq->entries()[pos].index);
  return "views/" + std::string(segment::to_string(view)) + "/" + buf;
}

std::optional<std::string> SessionFrames::uri_at(StreamView view, double t) const {
  const auto pos = nearest(view, t);
  if (!pos) return std::nullopt;
  return uri(view, *pos);
}

std::optional<Image> SessionFrames::image_at(StreamView view, double t) const {
  const auto pos = nearest(view, t);
  if (!pos) return std::nullopt;
  return sequence(view)->load(*pos).image;
}

std::vector<std::size_t> SessionFrames::window(StreamView view, double t0, double t1) const {
  const auto* seq = sequence(view);
  return seq ? seq->in_window(t0, t1) : std::vector<std::size_t>{};
}

namespace {

enum class Task { motion, claps, asr, captions, tags, nsfw, faces, persons };

struct TaskOutput {
  std::vector<EvidenceItem> items;
  std::vector<Json> lines;  // asr segments or crowdness rows
};

Json load_fixture(const fs::path& dir, const char* name) {
  const auto path = dir / name;
  if (dir.empty() || !fs::exists(path)) return nullptr;
  try {
    return load_json(path);
  } catch (const Error& e) {
    fail(Errc::FixtureInvalid, path.filename().string() + ": " + e.what());
  } catch (const std::exception& e) {
    fail(Errc::FixtureInvalid, path.filename().string() + ": " + e.what());
  }
}

std::string index4(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

std::string file_safe(std::string s) {
  for (auto& c : s)
    if (c == '/' || c == ':') c = '_';
  return s;
}

Action plan_action(RedactionPlanKind k) {
  switch (k) {
    case RedactionPlanKind::mute_window: return Action::mute;
    case RedactionPlanKind::tone_replace: return Action::tone_replace;
    case RedactionPlanKind::text_overlay: return Action::text_overlay;
  }
  return Action::mute;
}

std::vector<float> clip_audio(const PcmAudio* audio, const segment::ClipRecord& clip) {
  if (!audio || audio->samples.empty()) return {};
  const auto s0 = static_cast<std::size_t>(std::llround(clip.t_start * audio->sample_rate));
  const auto s1 = static_cast<std::size_t>(std::llround(clip.t_end * audio->sample_rate));
  return audio->normalized(std::min(s0, audio->samples.size()), std::min(s1, audio->samples.size()));
}

}  // namespace

std::map<std::string, std::size_t> run_detector_suite(const SuiteInputs& in, const DetectorConfig& config,
                                                      std::size_t workers) {
  const fs::path evidence_dir = in.session_dir / "evidence";
  fs::remove_all(evidence_dir);
  fs::create_directories(evidence_dir / "keyframes");
  fs::create_directories(evidence_dir / "snippets");

  const SessionFrames frames(in.session_dir);
  const Json captions = load_fixture(in.fixtures_dir, "captions.json");
  const Json tags = load_fixture(in.fixtures_dir, "tags.json");
  const Json nsfw = load_fixture(in.fixtures_dir, "nsfw.json");
  const Json faces = load_fixture(in.fixtures_dir, "faces.json");
  const Json persons = load_fixture(in.fixtures_dir, "persons.json");
  const Json asr = load_fixture(in.fixtures_dir, "asr.json");
  const auto transcript = asr.is_null() ? std::vector<TranscriptSegment>{} : parse_asr_fixture(asr);

  ScriptedOptions opts;
  opts.caption_top_k = config.caption_top_k;
  opts.face_fps = config.face_fps;
  opts.adult_threshold = config.adult_threshold;
  opts.tracker = config.tracker;
  opts.default_view = in.primary_view;
  opts.frames = &frames;
  opts.write_keyframe = [&](const std::string& name, const Image& img) {
    const std::string rel = "evidence/keyframes/" + file_safe(name) + ".ppm";
    write_file_atomic(in.session_dir / rel, ppm_bytes(img));
    return rel;
  };

  const Json* fixture_for[8] = {nullptr, nullptr, nullptr, &captions, &tags, &nsfw, &faces, &persons};
  std::vector<std::pair<std::size_t, Task>> tasks;
  for (std::size_t ci = 0; ci < in.clips.size(); ++ci) {
    const auto& clip = in.clips[ci];
    for (auto t : {Task::motion, Task::claps, Task::asr, Task::captions, Task::tags, Task::nsfw, Task::faces, Task::persons}) {
      const Json* fx = fixture_for[static_cast<int>(t)];
      if (fx) {
        if (fx->is_null() || clip.view != fixture_view(*fx, in.primary_view)) continue;
      } else if (clip.view != in.primary_view) {
        continue;
      } else if (t == Task::asr && transcript.empty()) {
        continue;
      }
      tasks.emplace_back(ci, t);
    }
  }

  auto run_task = [&](std::size_t k) -> TaskOutput {
    const auto& [ci, task] = tasks[k];
    const auto& clip = in.clips[ci];
    TaskOutput out;
    switch (task) {
      case Task::motion: {
        std::vector<Frame> fr;
        std::vector<std::string> uris;
        for (auto pos : frames.window(clip.view, clip.t_start, clip.t_end)) {
          fr.push_back(frames.sequence(clip.view)->load(pos));
          uris.push_back(frames.uri(clip.view, pos));
        }
        const auto pcm = clip_audio(in.audio, clip);
        const int sr = in.audio ? in.audio->sample_rate : 16000;
        out.items = run_motion_detector(clip, fr, uris, pcm, sr, config.motion, in.segmenter);
        break;
      }
      case Task::claps: {
        if (!in.audio) break;
        const auto pcm = clip_audio(in.audio, clip);
        const auto anchors = detect_claps(pcm, in.audio->sample_rate, config.claps);
        for (std::size_t i = 0; i < anchors.size(); ++i) {
          EvidenceItem e;
          e.item_id = clip.clip_id + "/claps/" + index4(i);
          e.clip_id = clip.clip_id;
          e.view = clip.view;
          e.cls = EvidenceClass::clap_anchor;
          e.t_start = e.t_end = anchors[i].t;
          e.confidence = std::clamp(anchors[i].z / (2.0 * config.claps.k_sigma), 0.0, 1.0);
          e.payload = Json{{"energy", anchors[i].energy}, {"z", anchors[i].z}};
          out.items.push_back(std::move(e));
        }
        break;
      }
      case Task::asr: {
        const auto segs = clip_transcript(transcript, clip);
        for (std::size_t si = 0; si < segs.size(); ++si) {
          auto line = to_json(segs[si]);
          line["clip_id"] = clip.clip_id;
          line["segment"] = si;
          out.lines.push_back(std::move(line));
        }
        const auto hits = scan_pii(segs, config.pii, Span{0.0, clip.t_end - clip.t_start});
        for (std::size_t i = 0; i < hits.size(); ++i) {
          const auto& h = hits[i];
          EvidenceItem e;
          e.item_id = clip.clip_id + "/pii/" + index4(i);
          e.clip_id = clip.clip_id;
          e.view = clip.view;
          e.cls = EvidenceClass::pii;
          e.t_start = h.window.start;
          e.t_end = h.window.end;
          e.confidence = h.confidence;
          e.payload = to_json(h);
          e.suggested_action = plan_action(h.plan);
          e.evidence_uris.push_back("evidence/asr.jsonl#" + clip.clip_id + ":" + std::to_string(h.segment));
          if (in.audio && !in.audio->samples.empty()) {
            const std::string rel = "evidence/snippets/" + file_safe(e.item_id) + ".wav";
            const auto n = in.audio->samples.size();
            const auto s0 = std::min(n, static_cast<std::size_t>(std::llround((clip.t_start + h.window.start) * in.audio->sample_rate)));
            const auto s1 = std::min(n, static_cast<std::size_t>(std::llround((clip.t_start + h.window.end) * in.audio->sample_rate)));
            PcmAudio snippet{in.audio->sample_rate,
                             std::vector<std::int16_t>(in.audio->samples.begin() + static_cast<long>(s0),
                                                       in.audio->samples.begin() + static_cast<long>(s1))};
            write_file_atomic(in.session_dir / rel, wav_bytes(snippet));
            e.evidence_uris.insert(e.evidence_uris.begin(), rel);
          }
          out.items.push_back(std::move(e));
        }
        break;
      }
      case Task::captions:
        out.items = run_scripted_detector(ScriptedKind::captions, captions, {clip}, opts);
        break;
      case Task::tags:
        out.items = run_scripted_detector(ScriptedKind::tags, tags, {clip}, opts);
        break;
      case Task::nsfw:
        out.items = run_scripted_detector(ScriptedKind::nsfw, nsfw, {clip}, opts);
        break;
      case Task::faces:
        out.items = run_scripted_detector(ScriptedKind::faces, faces, {clip}, opts);
        break;
      case Task::persons: {
        out.items = run_scripted_detector(ScriptedKind::persons, persons, {clip}, opts);
        std::vector<Track> spans;
        for (const auto& e : out.items) {
          Track t;
          t.points.push_back({});
          t.t_start = e.t_start;
          t.t_end = e.t_end;
          spans.push_back(std::move(t));
        }
        out.lines.push_back({{"clip_id", clip.clip_id},
                             {"window_s", config.crowd_window_s},
                             {"counts", crowdness(spans, config.crowd_window_s, clip.t_end - clip.t_start)}});
        break;
      }
    }
    return out;
  };

  auto results = parallel_map(tasks.size(), workers, run_task);

  std::map<std::string, std::vector<EvidenceItem>> items_by_file;
  std::map<std::string, std::vector<Json>> lines_by_file;
  for (const auto& f : evidence_item_files()) items_by_file[f];
  lines_by_file["asr.jsonl"];
  lines_by_file["crowdness.jsonl"];
  static const char* const item_file[] = {"motion.jsonl", "claps.jsonl", "pii.jsonl",   "caption.jsonl",
                                          "tags.jsonl",   "nsfw.jsonl",  "age.jsonl",   "tracks.jsonl"};
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto task = tasks[k].second;
    auto& dst = items_by_file[item_file[static_cast<int>(task)]];
    for (auto& e : results[k].items) dst.push_back(std::move(e));
    const char* line_file = task == Task::asr ? "asr.jsonl" : task == Task::persons ? "crowdness.jsonl" : nullptr;
    if (line_file)
      for (auto& l : results[k].lines) lines_by_file[line_file].push_back(std::move(l));
  }

  if (config.external_dir) {
    std::vector<fs::path> files;
    if (fs::is_directory(*config.external_dir))
      for (const auto& entry : fs::directory_iterator(*config.external_dir))
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::map<std::string, bool> known;
    for (const auto& c : in.clips) known[c.clip_id] = true;
    for (const auto& f : files) {
      for (const auto& line : read_jsonl(f)) {
        auto e = evidence_from_json(line);
        if (!known.count(e.clip_id)) fail(Errc::UnknownClip, "external evidence names unknown clip " + e.clip_id);
        items_by_file["external.jsonl"].push_back(std::move(e));
      }
    }
  }

  std::map<std::string, std::size_t> counts;
  for (auto& [file, items] : items_by_file) {
    sort_evidence(items);
    std::vector<Json> lines;
    for (const auto& e : items) {
      const auto problems = evidence_problems(e);
      if (!problems.empty()) fail(Errc::SchemaViolation, "detector emitted invalid item " + e.item_id + ": " + problems.front());
      lines.push_back(to_json(e));
    }
    write_jsonl(evidence_dir / file, lines);
    counts[file] = items.size();
  }
  for (auto& [file, lines] : lines_by_file) {
    std::stable_sort(lines.begin(), lines.end(), [](const Json& a, const Json& b) {
      return a.at("clip_id").get<std::string>() < b.at("clip_id").get<std::string>();
    });
    write_jsonl(evidence_dir / file, lines);
    counts[file] = lines.size();
  }
  return counts;
}

std::vector<EvidenceItem> load_evidence(const fs::path& evidence_dir) {
  std::vector<EvidenceItem> out;
  for (const auto& f : evidence_item_files()) {
    const auto path = evidence_dir / f;
    if (!fs::exists(path)) continue;
    for (const auto& line : read_jsonl(path)) out.push_back(evidence_from_json(line));
  }
  return out;
}

}  // namespace gaze::detect
