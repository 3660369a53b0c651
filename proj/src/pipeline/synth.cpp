#include "gaze/pipeline/synth.hpp"

#include <cmath>
#include <numbers>

#include "gaze/core/json.hpp"
#include "gaze/core/media_io.hpp"
#include "gaze/core/random.hpp"
#include "gaze/ingest/provenance.hpp"
#include "gaze/projection/geometry.hpp"
#include "gaze/projection/render.hpp"
#include "gaze/review/questionnaire.hpp"

namespace gaze::pipeline {

namespace fs = std::filesystem;

namespace {

bool in_idle(const SynthOptions& o, double t) { return t >= o.idle.start && t < o.idle.end; }

// A still idle stretch freezes the last live frame; a black one blanks it.
double scene_time(const SynthOptions& o, double t) { return in_idle(o, t) ? o.idle.start - 1.0 / o.fps : t; }

Image rectilinear_frame(const SynthOptions& o, double t) {
  Image img(o.width, o.height);
  if (in_idle(o, t) && o.black_idle) return img;
  t = scene_time(o, t);
  const int side = std::max(4, o.height / 4);
  const int span = std::max(1, o.width - side);
  const int step = std::max(3, o.width / 9);
  const int x0 = static_cast<int>(std::lround(t * o.fps)) * step % span;
  const int y0 = o.height / 3;
  for (int y = 0; y < o.height; ++y)
    for (int x = 0; x < o.width; ++x) {
      const bool target = x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
      const auto g = static_cast<std::uint8_t>(60 + (x * 5 + y * 3) % 80);
      if (target)
        img.set(x, y, 250, 250, 250);
      else
        img.set(x, y, g, static_cast<std::uint8_t>(g / 2 + 30), static_cast<std::uint8_t>(120 - g / 3));
    }
  return img;
}

std::array<std::uint8_t, 3> scene_color(double lon, double lat, double t) {
  const double target_lon = std::fmod(t * 0.7, 2.0 * std::numbers::pi) - std::numbers::pi;
  double dl = std::remainder(lon - target_lon, 2.0 * std::numbers::pi);
  if (std::hypot(dl * std::cos(lat), lat) < 0.25) return {250, 250, 250};
  const int cell = static_cast<int>(std::floor((lon + std::numbers::pi) / (std::numbers::pi / 6))) +
                   static_cast<int>(std::floor((lat + std::numbers::pi / 2) / (std::numbers::pi / 6)));
  const auto g = static_cast<std::uint8_t>((cell % 2) ? 70 : 140);
  return {g, static_cast<std::uint8_t>(g / 2 + 40), static_cast<std::uint8_t>(200 - g)};
}

projection::FisheyeLayout synth_layout(int h) {
  projection::FisheyeLayout layout;
  const double r = h / 2.0 - 1.0;
  layout.lenses[0] = {h / 2.0 - 0.5, h / 2.0 - 0.5, r, 190.0, 0.0};
  layout.lenses[1] = {h + h / 2.0 - 0.5, h / 2.0 - 0.5, r, 190.0, 180.0};
  return layout;
}

Image fisheye_frame(const SynthOptions& o, const projection::FisheyeLayout& layout, double t) {
  const int h = o.fisheye_height;
  Image img(2 * h, h);
  if (in_idle(o, t) && o.black_idle) return img;
  t = scene_time(o, t);
  for (const auto& lens : layout.lenses)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < 2 * h; ++x) {
        if (std::hypot(x - lens.cx, y - lens.cy) > lens.radius) continue;
        const auto d = projection::fisheye_to_direction<double>(lens, x, y);
        const auto ll = projection::lonlat<double>(d);
        const auto c = scene_color(ll.x(), ll.y(), t);
        img.set(x, y, c[0], c[1], c[2]);
      }
  return img;
}

PcmAudio synth_audio(const SynthOptions& o) {
  PcmAudio a;
  a.sample_rate = o.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(o.duration * o.sample_rate));
  a.samples.resize(n);
  Rng rng(o.seed ^ 0xa0d10ULL);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / o.sample_rate;
    double v = in_idle(o, t) ? 0.0 : 0.08 * std::sin(2.0 * std::numbers::pi * 220.0 * t) + 0.01 * rng.normal();
    for (double c : o.claps) {
      const double dt = t - c;
      if (dt >= 0.0 && dt < 0.02) v += 0.8 * std::exp(-dt / 0.004) * (rng.uniform01() * 2.0 - 1.0);
    }
    a.samples[i] = static_cast<std::int16_t>(std::clamp(std::lround(v * 32767.0), -32768L, 32767L));
  }
  return a;
}

Json box(int x, int y, int w, int h) { return Json::array({x, y, w, h}); }

}  // namespace

void write_synthetic_session(const fs::path& raw_dir, const SynthOptions& o) {
  fs::create_directories(raw_dir / "frames");
  fs::create_directories(raw_dir / "fixtures");

  ingest::SessionJournal journal;
  journal.session_id = o.session_id;
  journal.free_text_notes = "synthetic kitchen session";
  journal.device_id = o.spherical ? "dualcam-01" : "cam-01";
  journal.frame_rate = o.fps;
  if (o.spherical) journal.lens_model = "dual-fisheye-190";
  journal.consent_ack = o.consent;
  journal.device_logs = {{"battery", Json::array({100, 97, 95})}, {"dropped_frames", 0}};
  save_json(raw_dir / "session.json", ingest::to_json(journal));

  const auto frames = static_cast<int>(std::llround(o.duration * o.fps));
  std::vector<FrameEntry> entries;
  const auto layout = synth_layout(o.fisheye_height);
  if (o.spherical) save_json(raw_dir / "fisheye_layout.json", projection::to_json(layout));
  for (int i = 0; i < frames; ++i) {
    const double t = i / o.fps;
    entries.push_back({i, t});
    write_ppm(frame_path(raw_dir / "frames", i), o.spherical ? fisheye_frame(o, layout, t) : rectilinear_frame(o, t));
  }
  write_frame_index(raw_dir / "frames", entries);
  if (o.audio) write_wav(raw_dir / "audio.wav", synth_audio(o));

  // Fixture boxes live in the grid of the view they name.
  const std::string view = "front";
  const int vw = o.spherical ? o.view_width : o.width;
  const int vh = o.spherical ? o.view_height : o.height;

  Json tags = Json::array();
  if (o.idle.start > 0.0) tags.push_back({{"t_start", 0.0}, {"t_end", o.idle.start}, {"label", "cooking"}, {"confidence", 0.9}});
  if (o.idle.end < o.duration) tags.push_back({{"t_start", o.idle.end}, {"t_end", o.duration}, {"label", "cooking"}, {"confidence", 0.9}});
  save_json(raw_dir / "fixtures" / "tags.json", {{"view", view}, {"model_version", "tagger-fixture/2"}, {"tags", tags}});

  save_json(raw_dir / "fixtures" / "captions.json",
            {{"view", view},
             {"captions", Json::array({{{"t_start", 10.0}, {"t_end", 20.0}, {"text", "a person chops vegetables"}, {"confidence", 0.8},
                                        {"frames", Json::array({{{"t", 12.0}, {"score", 0.7}}, {{"t", 15.0}, {"score", 0.9}}})}}})}});

  save_json(raw_dir / "fixtures" / "nsfw.json", {{"view", view}, {"scores", Json::array({{{"t_start", 70.0}, {"t_end", 75.0}, {"score", 0.85}}})}});

  Json faces = Json::array();
  Json persons = Json::array();
  const int fw = std::max(4, vw / 6), fh = std::max(4, vh / 6);
  for (double t = 30.0; t < 40.0; t += 0.5) {
    faces.push_back({{"t", t}, {"detections", Json::array({{{"box", box(vw / 2 - fw / 2, vh / 4, fw, fh)}, {"score", 0.9}, {"age", 12.0}}})}});
    persons.push_back({{"t", t}, {"detections", Json::array({{{"box", box(vw / 2 - fw, vh / 4, 2 * fw, vh / 2)}, {"score", 0.9}}})}});
  }
  save_json(raw_dir / "fixtures" / "faces.json", {{"view", view}, {"frames", faces}});
  save_json(raw_dir / "fixtures" / "persons.json", {{"view", view}, {"frames", persons}});

  if (o.audio) {
    Json words = Json::array();
    const char* text[] = {"you", "can", "email", "me", "at", "jane@example.com", "any", "time"};
    double t = 50.0;
    for (const char* w : text) {
      words.push_back({{"text", w}, {"t_start", t}, {"t_end", t + 0.4}});
      t += 0.5;
    }
    save_json(raw_dir / "fixtures" / "asr.json", {{"segments", Json::array({{{"speaker", "S1"}, {"words", words}}})}});
  }

  if (o.review_script) {
    write_jsonl(raw_dir / "review_script.jsonl",
                {Json{{"operation", "accept"}, {"reviewer_id", "r1"}, {"dwell_ms", 4000}},
                 Json{{"operation", "accept"}, {"reviewer_id", "r1"}, {"dwell_ms", 6000}}});
  }
  if (o.questionnaire) {
    Json q = review::questionnaire_template();
    q["metadata"]["domain"]["video"] = "yes";
    q["metadata"]["activity"]["video"] = "yes";
    q["compliance"]["minors"]["video"] = "yes";
    q["compliance"]["minors"]["video_interval"] = {{"start", "00:30"}, {"end", "00:40"}};
    q["compliance"]["nudity"]["video"] = "yes";
    q["compliance"]["nudity"]["video_interval"] = {{"start", "01:10"}, {"end", "01:15"}};
    if (o.audio) {
      q["compliance"]["pii"]["audio"] = "yes";
      q["compliance"]["pii"]["audio_pii_types"] = Json::array({"EMAIL"});
    }
    save_json(raw_dir / "questionnaire.json", q);
  }
}

}  // namespace gaze::pipeline
