#include "gaze/detect/scripted.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace gaze::detect {

std::string_view to_string(ScriptedKind k) {
  switch (k) {
    case ScriptedKind::captions: return "captions";
    case ScriptedKind::tags: return "tags";
    case ScriptedKind::nsfw: return "nsfw";
    case ScriptedKind::faces: return "faces";
    case ScriptedKind::persons: return "persons";
  }
  return "captions";
}

std::optional<Span> clip_relative(const Span& s, const segment::ClipRecord& clip) {
  if (s.start == s.end) {
    if (s.start >= clip.t_start && s.start < clip.t_end) return Span{s.start - clip.t_start, s.start - clip.t_start};
    return std::nullopt;
  }
  if (!intersects(s, clip.span())) return std::nullopt;
  return Span{std::max(s.start, clip.t_start) - clip.t_start, std::min(s.end, clip.t_end) - clip.t_start};
}

StreamView fixture_view(const Json& fixture, StreamView fallback) {
  if (!fixture.is_object() || !fixture.contains("view")) return fallback;
  try {
    return segment::stream_view_from_string(field<std::string>(fixture, "view", Errc::FixtureInvalid));
  } catch (const Error& e) {
    fail(Errc::FixtureInvalid, e.what());
  }
}

namespace {

std::string fallback_uri(ScriptedKind kind, double t) {
  std::ostringstream os;
  os << "fixture://" << to_string(kind) << "#t=" << round6(t);
  return os.str();
}

std::string frame_uri(const ScriptedOptions& o, ScriptedKind kind, StreamView view, double t) {
  if (o.frames)
    if (auto u = o.frames->uri_at(view, t)) return *u;
  return fallback_uri(kind, t);
}

double checked_confidence(const Json& j, const char* key) {
  const double c = field<double>(j, key, Errc::FixtureInvalid);
  if (!(c >= 0.0 && c <= 1.0)) fail(Errc::FixtureInvalid, std::string(key) + " must be in [0, 1]");
  return c;
}

Span checked_span(const Json& j) {
  Span s{field<double>(j, "t_start", Errc::FixtureInvalid), field<double>(j, "t_end", Errc::FixtureInvalid)};
  if (!(s.start <= s.end) || s.start < 0.0) fail(Errc::FixtureInvalid, "fixture span must satisfy 0 <= t_start <= t_end");
  return s;
}

const Json& checked_array(const Json& fixture, const char* key) {
  if (!fixture.is_object()) fail(Errc::FixtureInvalid, "fixture must be a JSON object");
  static const Json empty = Json::array();
  if (!fixture.contains(key)) return empty;
  const auto& a = fixture.at(key);
  if (!a.is_array()) fail(Errc::FixtureInvalid, std::string(key) + " must be an array");
  return a;
}

Box checked_box(const Json& j) {
  try {
    return box_from_json(j);
  } catch (const Error& e) {
    fail(Errc::FixtureInvalid, e.what());
  }
}

struct ReplayFrame {
  int index;
  double t;
  const Json* detections;
};

// Sorted, cadence-limited fixture frames with global indices.
std::vector<ReplayFrame> replay_frames(const Json& fixture, double fps) {
  std::vector<ReplayFrame> out;
  long last_bucket = -1;
  double last_t = -1.0;
  int index = 0;
  for (const auto& f : checked_array(fixture, "frames")) {
    const double t = field<double>(f, "t", Errc::FixtureInvalid);
    if (!(t > last_t)) fail(Errc::FixtureInvalid, "fixture frames must have strictly increasing t");
    last_t = t;
    const long bucket = fps > 0.0 ? static_cast<long>(std::floor(t * fps + 1e-9)) : index;
    if (bucket == last_bucket) continue;
    last_bucket = bucket;
    if (!f.contains("detections") || !f.at("detections").is_array())
      fail(Errc::FixtureInvalid, "fixture frame needs a detections array");
    out.push_back({index++, t, &f.at("detections")});
  }
  return out;
}

std::string index4(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

void assign_ids(std::vector<EvidenceItem>& items, const std::string& clip_id, ScriptedKind kind) {
  std::stable_sort(items.begin(), items.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
    return std::tie(a.t_start, a.t_end) < std::tie(b.t_start, b.t_end);
  });
  for (std::size_t i = 0; i < items.size(); ++i)
    items[i].item_id = clip_id + "/" + std::string(to_string(kind)) + "/" + index4(i);
}

EvidenceItem base_item(const segment::ClipRecord& clip, StreamView view, EvidenceClass cls, const Span& rel) {
  EvidenceItem e;
  e.clip_id = clip.clip_id;
  e.view = view;
  e.cls = cls;
  e.t_start = rel.start;
  e.t_end = rel.end;
  return e;
}

std::vector<std::string> keyframe_uris(const Track& track, const segment::ClipRecord& clip, StreamView view,
                                       ScriptedKind kind, const ScriptedOptions& o) {
  std::vector<std::string> uris;
  const std::pair<const char*, int> picks[] = {
      {"entrance", track.keyframes.entrance}, {"peak", track.keyframes.peak}, {"exit", track.keyframes.exit}};
  for (const auto& [name, frame] : picks) {
    const auto it = std::find_if(track.points.begin(), track.points.end(), [&](const TrackPoint& p) { return p.frame == frame; });
    if (it == track.points.end()) continue;
    const double t_session = clip.t_start + it->t;
    std::string uri;
    if (o.write_keyframe && o.frames) {
      if (auto img = o.frames->image_at(view, t_session)) {
        const std::string key = clip.clip_id + "_" + std::string(to_string(kind)) + "_t" + std::to_string(track.track_id) + "_" + name;
        uri = o.write_keyframe(key, crop(*img, it->box));
      }
    }
    if (uri.empty()) uri = frame_uri(o, kind, view, t_session);
    if (std::find(uris.begin(), uris.end(), uri) == uris.end()) uris.push_back(uri);
  }
  return uris;
}

}  // namespace

std::vector<Track> replay_tracks(const Json& fixture, const segment::ClipRecord& clip, const ScriptedOptions& options,
                                 bool with_ages) {
  const StreamView view = fixture_view(fixture, options.default_view);
  std::vector<FrameDetections> frames;
  for (const auto& rf : replay_frames(fixture, options.face_fps)) {
    if (rf.t < clip.t_start || rf.t >= clip.t_end) continue;
    FrameDetections fd{rf.index, rf.t - clip.t_start, {}};
    std::optional<Image> img;
    bool img_loaded = false;
    for (const auto& d : *rf.detections) {
      Detection det;
      det.box = checked_box(field<Json>(d, "box", Errc::FixtureInvalid));
      det.score = checked_confidence(d, "score");
      if (with_ages) {
        if (!d.contains("age")) fail(Errc::FixtureInvalid, "face detections need an age estimate");
        det.age = field<double>(d, "age", Errc::FixtureInvalid);
      }
      if (options.frames) {
        if (!img_loaded) {
          img = options.frames->image_at(view, rf.t);
          img_loaded = true;
        }
        if (img) det.embedding = appearance_embedding(*img, det.box);
      }
      fd.detections.push_back(std::move(det));
    }
    frames.push_back(std::move(fd));
  }
  return run_tracker(frames, options.tracker);
}

std::vector<TranscriptSegment> parse_asr_fixture(const Json& fixture) {
  std::vector<TranscriptSegment> out;
  for (const auto& s : checked_array(fixture, "segments")) out.push_back(transcript_from_json(s));
  return out;
}

std::vector<TranscriptSegment> clip_transcript(const std::vector<TranscriptSegment>& session_segments,
                                               const segment::ClipRecord& clip) {
  std::vector<TranscriptSegment> out;
  for (const auto& s : session_segments) {
    TranscriptSegment c{s.speaker, {}, s.source};
    for (const auto& w : s.words)
      if (w.t_start >= clip.t_start && w.t_end <= clip.t_end)
        c.words.push_back({w.text, w.t_start - clip.t_start, w.t_end - clip.t_start});
    if (!c.words.empty()) out.push_back(std::move(c));
  }
  return out;
}

std::vector<EvidenceItem> run_scripted_detector(ScriptedKind kind, const Json& fixture,
                                                const std::vector<segment::ClipRecord>& clips,
                                                const ScriptedOptions& options) {
  if (fixture.is_null()) return {};
  if (!fixture.is_object()) fail(Errc::FixtureInvalid, "fixture must be a JSON object");
  const StreamView view = fixture_view(fixture, options.default_view);
  std::vector<EvidenceItem> all;

  for (const auto& clip : clips) {
    if (clip.view != view) continue;
    std::vector<EvidenceItem> items;
    switch (kind) {
      case ScriptedKind::captions: {
        for (const auto& c : checked_array(fixture, "captions")) {
          const Span s = checked_span(c);
          const auto rel = clip_relative(s, clip);
          const double conf = checked_confidence(c, "confidence");
          const auto text = field<std::string>(c, "text", Errc::FixtureInvalid);
          if (!rel) continue;
          std::vector<std::pair<double, double>> frames;  // (t, score)
          for (const auto& f : field_or<Json>(c, "frames", Json::array(), Errc::FixtureInvalid))
            frames.emplace_back(field<double>(f, "t", Errc::FixtureInvalid), checked_confidence(f, "score"));
          std::stable_sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
          });
          if (frames.size() > options.caption_top_k) frames.resize(options.caption_top_k);
          auto e = base_item(clip, view, EvidenceClass::caption, *rel);
          e.confidence = conf;
          Json kept = Json::array();
          for (const auto& [t, score] : frames) {
            kept.push_back({{"t", t}, {"score", score}});
            e.evidence_uris.push_back(frame_uri(options, kind, view, t));
          }
          if (e.evidence_uris.empty()) e.evidence_uris.push_back(frame_uri(options, kind, view, (s.start + s.end) / 2));
          e.payload = Json{{"text", text}, {"frames", kept}};
          items.push_back(std::move(e));
        }
        break;
      }
      case ScriptedKind::tags: {
        for (const auto& t : checked_array(fixture, "tags")) {
          const Span s = checked_span(t);
          const double conf = checked_confidence(t, "confidence");
          const auto label = field<std::string>(t, "label", Errc::FixtureInvalid);
          const auto rel = clip_relative(s, clip);
          if (!rel) continue;
          auto e = base_item(clip, view, EvidenceClass::activity_tag, *rel);
          e.confidence = conf;
          e.payload = Json{{"label", label}};
          e.evidence_uris.push_back(frame_uri(options, kind, view, clip.t_start + (rel->start + rel->end) / 2));
          items.push_back(std::move(e));
        }
        break;
      }
      case ScriptedKind::nsfw: {
        for (const auto& n : checked_array(fixture, "scores")) {
          const Span s = checked_span(n);
          const double score = checked_confidence(n, "score");
          const auto rel = clip_relative(s, clip);
          if (!rel) continue;
          auto e = base_item(clip, view, EvidenceClass::nsfw, *rel);
          e.confidence = score;
          e.suggested_action = Action::withhold;
          e.payload = Json{{"score", score}};
          e.evidence_uris.push_back(frame_uri(options, kind, view, clip.t_start + (rel->start + rel->end) / 2));
          items.push_back(std::move(e));
        }
        break;
      }
      case ScriptedKind::faces:
      case ScriptedKind::persons: {
        const bool faces = kind == ScriptedKind::faces;
        for (const auto& track : replay_tracks(fixture, clip, options, faces)) {
          double best = 0.0;
          for (const auto& p : track.points) best = std::max(best, p.score);
          Json payload{{"track_id", track.track_id},
                       {"dwell_time", track.dwell_time},
                       {"reentry_count", track.reentry_count},
                       {"box_count", track.points.size()},
                       {"keyframes",
                        {{"entrance", track.keyframes.entrance},
                         {"peak", track.keyframes.peak},
                         {"exit", track.keyframes.exit}}}};
          if (track.embedding.size() > 0) {
            Json emb = Json::array();
            for (Eigen::Index i = 0; i < track.embedding.size(); ++i) emb.push_back(static_cast<double>(track.embedding[i]));
            payload["embedding"] = emb;
          }
          EvidenceClass cls = EvidenceClass::person_track;
          Action action = Action::none;
          if (faces) {
            const auto verdict = aggregate_track_age(track.ages(), options.adult_threshold);
            if (!verdict.minor_risk) continue;
            cls = EvidenceClass::minor_risk;
            action = Action::blur_and_review;
            payload["track_age"] = verdict.track_age;
          }
          auto e = base_item(clip, view, cls, {track.t_start, track.t_end});
          e.confidence = best;
          e.box = track.union_box();
          e.payload = payload;
          e.suggested_action = action;
          e.evidence_uris = keyframe_uris(track, clip, view, kind, options);
          items.push_back(std::move(e));
        }
        break;
      }
    }
    assign_ids(items, clip.clip_id, kind);
    for (auto& e : items) all.push_back(std::move(e));
  }
  sort_evidence(all);
  return all;
}

}  // namespace gaze::detect
