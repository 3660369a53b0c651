#include <cmath>

#include "doctest.h"
#include "gaze/core/random.hpp"
#include "gaze/detect/claps.hpp"
#include "gaze/detect/motion.hpp"
#include "gaze/detect/pii.hpp"
#include "gaze/detect/scripted.hpp"
#include "gaze/detect/tracker.hpp"
#include "support/tracker_oracle.hpp"

using namespace gaze;
using namespace gaze::detect;

namespace {

FrameDetections frame_with(int f, std::vector<Box> boxes) {
  FrameDetections fd{f, f / 10.0, {}};
  for (const auto& b : boxes) fd.detections.push_back({b, 0.9, {}, std::nullopt});
  return fd;
}

std::vector<double> impulse_response(const std::array<Biquad, 2>& sos, std::size_t n) {
  std::vector<float> x(n, 0.0f);
  x[0] = 1.0f;
  return sos_filter(sos, x);
}

segment::ClipRecord clip(const std::string& id, double t0, double t1) {
  segment::ClipRecord c;
  c.clip_id = id;
  c.view = StreamView::front;
  c.t_start = t0;
  c.t_end = t1;
  c.fps = 2.0;
  c.resolution = "64x48";
  return c;
}

TranscriptSegment words(std::vector<std::string> ws, double step = 0.4) {
  TranscriptSegment s{"spk", {}, TranscriptSource::scripted};
  double t = 0.0;
  for (auto& w : ws) {
    s.words.push_back({w, t, t + step * 0.9});
    t += step;
  }
  return s;
}

}  // namespace

TEST_CASE("tracker follows a drifting box") {
  std::vector<FrameDetections> frames;
  for (int f = 0; f < 40; ++f) frames.push_back(frame_with(f, {{10.0 + f, 20.0, 30, 30}}));
  const auto tracks = run_tracker(frames, {});
  REQUIRE(tracks.size() == 1);
  CHECK(tracks[0].points.size() == 40);
  CHECK(tracks[0].keyframes.entrance == 0);
  CHECK(tracks[0].keyframes.exit == 39);
  CHECK(tracks[0].dwell_time == doctest::Approx(3.9));
}

TEST_CASE("tracker age-out boundary") {
  TrackerParams p;
  p.age_out_frames = 5;
  const Box b{0, 0, 20, 20};
  // delta missing frames in between: still the same track
  auto tracks = run_tracker({frame_with(0, {b}), frame_with(6, {b})}, p);
  CHECK(tracks.size() == 1);
  // delta + 1 missing frames: a new track
  tracks = run_tracker({frame_with(0, {b}), frame_with(7, {b})}, p);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].track_id == 1);
  CHECK(tracks[1].points.front().frame == 7);
  CHECK_THROWS_AS(run_tracker({frame_with(3, {b}), frame_with(3, {b})}, p), Error);
}

TEST_CASE("tracker keeps two crossing objects apart while they are separable") {
  std::vector<FrameDetections> frames;
  for (int f = 0; f < 20; ++f) frames.push_back(frame_with(f, {{4.0 * f, 0, 20, 20}, {80.0 - 4.0 * f, 40, 20, 20}}));
  const auto tracks = run_tracker(frames, {});
  REQUIRE(tracks.size() == 2);
  for (const auto& t : tracks) {
    CHECK(t.points.size() == 20);
    for (const auto& pt : t.points) CHECK(pt.box.y == t.points.front().box.y);
  }
}

TEST_CASE("tracker agrees with an exhaustive assignment oracle") {
  Rng rng(11);
  int agree = 0, total = 0;
  for (int i = 0; i < 100; ++i) {
    const bool lanes = i % 2 == 0;
    const auto scene = test::random_scene(rng, lanes);
    TrackerParams p;
    p.age_out_frames = 3;
    const auto got = run_tracker(scene.frames, p);
    const auto want = test::oracle_tracker(scene.frames, p.iou_threshold, p.age_out_frames);
    const bool same = test::same_tracks(got, want);
    if (lanes) CHECK(same);
    agree += same;
    ++total;
  }
  CHECK(agree >= 95 * total / 100);
}

TEST_CASE("crowdness counts tracks per window") {
  auto track = [](double t0, double t1) {
    Track t;
    t.points.push_back({0, t0, {}, 1, {}});
    t.points.push_back({1, t1, {}, 1, {}});
    t.t_start = t0;
    t.t_end = t1;
    return t;
  };
  const std::vector<Track> tracks{track(5, 20), track(30, 70), track(50, 55)};
  CHECK(crowdness(tracks, 60, 120) == std::vector<int>{3, 1});

  Rng rng(5);
  std::vector<Track> many;
  for (int i = 0; i < 40; ++i) {
    const double a = rng.uniform(0, 300), b = rng.uniform(0, 300);
    many.push_back(track(std::min(a, b), std::max(a, b)));
  }
  const auto counts = crowdness(many, 45, 300);
  REQUIRE(counts.size() == 7);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    int n = 0;
    for (const auto& t : many) {
      bool seen = false;
      // a track is present in window k when some instant of it falls inside
      for (double s = t.t_start; s <= t.t_end && !seen; s += 0.01)
        seen = s >= 45.0 * k && s < 45.0 * (k + 1);
      if (t.t_end >= 45.0 * k && t.t_end < 45.0 * (k + 1)) seen = true;
      n += seen;
    }
    CHECK(counts[k] == n);
  }
}

TEST_CASE("band-pass matches a reference Butterworth design at 16 kHz") {
  const auto sos = design_bandpass(2000, 6000, 16000);
  const double ref_h[] = {0.29289321881345259, 0, -0.58578643762690519, 0, 0.24264068711928505,
                          0, 0.10050506338833473, 0, -0.041630560342615794, 0};
  const auto h = impulse_response(sos, 10);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(h[i] - ref_h[i]) < 1e-12);
  const std::pair<double, double> ref_mag[] = {{100, 0.00154371066930651}, {1000, 0.169101978725763},
                                               {2000, 0.707106781186548},  {3000, 0.9855985596534893},
                                               {3464.1016151377544, 0.9989606172914808},
                                               {5000, 0.9855985596534889}, {6000, 0.7071067811865478},
                                               {7000, 0.16910197872576285}};
  for (const auto& [f, m] : ref_mag) CHECK(magnitude_response(sos, f, 16000) == doctest::Approx(m).epsilon(1e-9));
}

TEST_CASE("band-pass at 8 kHz uses the clamped upper edge") {
  const auto sos = design_bandpass(2000, 0.45 * 8000, 8000);
  const double ref_h[] = {0.206572083826148,    -0.3556267346602396, -0.04793269257884072, 0.39354585485807003,
                          -0.2574064111030645,  0.06867764887283297, -0.01867271558257443, 0.01530738258209547,
                          0.00840101421654829, -0.03588956402795884};
  const auto h = impulse_response(sos, 10);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(h[i] - ref_h[i]) < 1e-12);
  const std::pair<double, double> ref_mag[] = {{500, 0.02836851079071553}, {2000, 0.7071067811865478},
                                               {2683.28, 0.9930084481618733}, {3600, 0.7071067811865459},
                                               {3900, 0.04440660912579027}};
  for (const auto& [f, m] : ref_mag) CHECK(magnitude_response(sos, f, 8000) == doctest::Approx(m).epsilon(1e-9));
  CHECK_THROWS_AS(design_bandpass(3000, 2000, 16000), Error);
  CHECK_THROWS_AS(design_bandpass(2000, 8000, 16000), Error);
}

TEST_CASE("clap detection") {
  const int sr = 16000;
  Rng rng(2);
  auto quiet = [&](double seconds) {
    std::vector<float> x(static_cast<std::size_t>(seconds * sr));
    for (auto& v : x) v = static_cast<float>(rng.normal() * 1e-3);
    return x;
  };
  auto x = quiet(4.0);
  x[2 * sr] = 0.9f;
  x[2 * sr + sr / 2] = 0.9f;
  auto claps = detect_claps(x, sr);
  REQUIRE(claps.size() == 2);
  CHECK(std::abs(claps[0].t - 2.0) <= 0.020);
  CHECK(std::abs(claps[1].t - 2.5) <= 0.020);
  CHECK(claps[0].z > 4.0);

  auto close = quiet(4.0);
  close[2 * sr] = 0.9f;
  close[2 * sr + sr / 5] = 0.8f;
  claps = detect_claps(close, sr);
  REQUIRE(claps.size() == 1);
  CHECK(std::abs(claps[0].t - 2.0) <= 0.020);

  CHECK(detect_claps(std::vector<float>(4 * sr, 0.0f), sr).empty());
  CHECK_THROWS_AS(detect_claps(quiet(1.0), 7999), Error);
  auto at8k = std::vector<float>(3 * 8000, 0.0f);
  at8k[8000] = 1.0f;
  claps = detect_claps(at8k, 8000);
  REQUIRE(claps.size() == 1);
  CHECK(std::abs(claps[0].t - 1.0) <= 0.020);
}

TEST_CASE("pii scanning") {
  PiiPolicy policy;
  auto hits = scan_pii({words({"call", "me", "at", "555-0142"})}, policy);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].entity_type == PiiType::PHONE);
  CHECK(hits[0].text == "555-0142");
  CHECK(hits[0].word_span.start == doctest::Approx(1.2));
  CHECK(hits[0].window.start == doctest::Approx(1.2 - 0.25));
  CHECK(hits[0].window.end == doctest::Approx(1.2 + 0.36 + 0.25));

  hits = scan_pii({words({"mail", "a@x.org", "or", "b.c@y.co.uk", "please"})}, policy);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].entity_type == PiiType::EMAIL);
  CHECK(hits[1].entity_type == PiiType::EMAIL);
  CHECK(hits[0].word_span.end < hits[1].word_span.start);

  CHECK(scan_pii({words({"we", "walked", "to", "the", "park", "on", "sunday"})}, policy).empty());

  policy.names = {"Jane Doe"};
  hits = scan_pii({words({"ask", "jane", "doe", "later"})}, policy, Span{0.0, 1.3});
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].entity_type == PiiType::NAME);
  CHECK(hits[0].word_span == Span{0.4, 0.8 + 0.36});
  CHECK(hits[0].window.end == 1.3);
  CHECK(scan_pii({words({"ask", "janet", "later"})}, policy).empty());
}

TEST_CASE("track age aggregation") {
  auto v = aggregate_track_age({25, 24, 17, 26});
  CHECK(v.track_age == 17);
  CHECK(v.minor_risk);
  CHECK_FALSE(aggregate_track_age({30}).minor_risk);
  CHECK_FALSE(aggregate_track_age({18, 18}).minor_risk);
  CHECK_THROWS_AS(aggregate_track_age({}), Error);
}

TEST_CASE("scripted detectors rebase fixture spans to clips") {
  const std::vector<segment::ClipRecord> clips{clip("s_front_000000", 0, 60), clip("s_front_000001", 57.5, 117.5)};
  const Json nsfw = Json::parse(R"({"scores": [{"t_start": 30, "t_end": 40, "score": 0.8},
                                               {"t_start": 58, "t_end": 59, "score": 0.7}]})");
  const auto items = run_scripted_detector(ScriptedKind::nsfw, nsfw, clips, {});
  REQUIRE(items.size() == 3);
  CHECK(items[0].clip_id == "s_front_000000");
  CHECK(items[0].t_start == 30);
  CHECK(items[0].suggested_action == Action::withhold);
  CHECK(items[1].clip_id == "s_front_000000");
  CHECK(items[2].clip_id == "s_front_000001");
  CHECK(items[2].t_start == doctest::Approx(0.5));
  CHECK(items[2].t_end == doctest::Approx(1.5));
  for (const auto& e : items) CHECK(evidence_problems(e).empty());

  const Json caps = Json::parse(R"({"captions": [{"t_start": 10, "t_end": 20, "text": "a dog", "confidence": 0.9,
      "frames": [{"t": 11, "score": 0.2}, {"t": 12, "score": 0.9}, {"t": 13, "score": 0.5},
                 {"t": 14, "score": 0.7}, {"t": 15, "score": 0.1}]}]})");
  const auto c = run_scripted_detector(ScriptedKind::captions, caps, clips, {});
  REQUIRE(c.size() == 1);
  const auto& kept = c[0].payload.at("frames");
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].at("t") == 12);
  CHECK(kept[1].at("t") == 14);
  CHECK(kept[2].at("t") == 13);
  CHECK(c[0].evidence_uris.size() == 3);

  CHECK(run_scripted_detector(ScriptedKind::tags, Json(nullptr), clips, {}).empty());
  CHECK(run_scripted_detector(ScriptedKind::tags, Json::parse(R"({"tags": []})"), clips, {}).empty());
  CHECK_THROWS_AS(run_scripted_detector(ScriptedKind::nsfw, Json::parse(R"({"scores": [{"t_start": 5}]})"), clips, {}),
                  Error);
}

TEST_CASE("scripted faces flag minors only") {
  const std::vector<segment::ClipRecord> clips{clip("s_front_000000", 0, 60)};
  Json frames = Json::array();
  for (int i = 0; i < 10; ++i) {
    frames.push_back({{"t", 30 + i * 0.5},
                      {"detections",
                       {{{"box", {10 + i, 10, 20, 20}}, {"score", 0.9}, {"age", i == 4 ? 15 : 30}},
                        {{"box", {100, 10, 20, 20}}, {"score", 0.8}, {"age", 40}}}}});
  }
  const auto items = run_scripted_detector(ScriptedKind::faces, Json{{"frames", frames}}, clips, {});
  REQUIRE(items.size() == 1);
  CHECK(items[0].cls == EvidenceClass::minor_risk);
  CHECK(items[0].suggested_action == Action::blur_and_review);
  CHECK(items[0].payload.at("track_age") == 15);
  CHECK(items[0].t_start == 30);
  CHECK(items[0].t_end == 34.5);
  REQUIRE(items[0].box);
  CHECK(*items[0].box == Box{10, 10, 29, 20});
  const auto persons = run_scripted_detector(ScriptedKind::persons, Json{{"frames", frames}}, clips, {});
  CHECK(persons.size() == 2);
}

TEST_CASE("transcripts are cut to clips") {
  const auto segs = parse_asr_fixture(Json::parse(R"({"segments": [{"speaker": "a", "words": [
      {"text": "one", "t_start": 59, "t_end": 59.5}, {"text": "two", "t_start": 59.8, "t_end": 60.3},
      {"text": "three", "t_start": 61, "t_end": 61.4}]}]})"));
  const auto first = clip_transcript(segs, clip("c0", 0, 60));
  REQUIRE(first.size() == 1);
  CHECK(first[0].text() == "one");
  const auto second = clip_transcript(segs, clip("c1", 57.5, 117.5));
  REQUIRE(second.size() == 1);
  CHECK(second[0].text() == "one two three");
  CHECK(second[0].words[0].t_start == doctest::Approx(1.5));
  CHECK_THROWS_AS(parse_asr_fixture(Json::parse(R"({"segments": [{"speaker": "a", "words": [
      {"text": "x", "t_start": 2, "t_end": 1}]}]})")), Error);
}

TEST_CASE("motion detector cues") {
  auto gray = [](std::uint8_t v) {
    Image img(16, 12);
    for (auto& b : img.rgb) b = v;
    return img;
  };
  const auto c = clip("m_front_000000", 10, 14);
  std::vector<Frame> frames;
  std::vector<std::string> uris;
  for (int i = 0; i < 8; ++i) {
    const std::uint8_t v = i < 4 ? 128 : (i % 2 ? 0 : 255);
    frames.push_back({gray(v), 10 + i * 0.5});
    uris.push_back("views/front/" + std::to_string(i) + ".ppm");
  }
  std::vector<float> audio(4 * 8000);
  for (std::size_t i = 0; i < audio.size(); ++i) audio[i] = (i / 4) % 2 ? 0.5f : -0.5f;
  const auto items = run_motion_detector(c, frames, uris, audio, 8000, {}, {});
  int idle = 0, high = 0, scene = 0;
  for (const auto& e : items) {
    CHECK(evidence_problems(e).empty());
    if (e.cls == EvidenceClass::idle) {
      ++idle;
      CHECK(e.t_start == 0);
      CHECK(e.t_end == 2);
      CHECK(e.payload.at("reason") == "idle");
      CHECK(e.suggested_action == Action::skip);
    } else if (e.cls == EvidenceClass::high_motion) {
      ++high;
      CHECK(e.t_start == 2);
      CHECK(e.t_end == 4);
      CHECK(e.payload.at("peak_motion") == doctest::Approx(1.0));
    } else if (e.cls == EvidenceClass::scene_change) {
      ++scene;
    }
  }
  CHECK(idle == 1);
  CHECK(high == 1);
  CHECK(scene == 4);

  std::vector<float> silent(audio.size(), 0.0f);
  const auto quiet = run_motion_detector(c, frames, uris, silent, 8000, {}, {});
  std::vector<std::string> reasons;
  for (const auto& e : quiet)
    if (e.cls == EvidenceClass::idle) reasons.push_back(e.payload.at("reason"));
  CHECK(reasons == std::vector<std::string>{"idle", "silent"});
}

TEST_CASE("evidence schema") {
  EvidenceItem e;
  e.item_id = "c/x/0000";
  e.clip_id = "c";
  e.cls = EvidenceClass::idle;
  e.t_start = 1;
  e.t_end = 2;
  e.confidence = 1;
  CHECK(evidence_problems(e).empty());
  const auto back = evidence_from_json(to_json(e));
  CHECK(to_json(back) == to_json(e));
  e.cls = EvidenceClass::nsfw;
  CHECK(evidence_problems(e).size() == 1);
  e.evidence_uris = {"views/front/1.ppm"};
  e.t_end = 0.5;
  e.confidence = 1.2;
  CHECK(evidence_problems(e).size() == 2);
  CHECK_THROWS_AS(evidence_from_json(to_json(e)), Error);
  CHECK(is_governance(EvidenceClass::pii));
  CHECK_FALSE(is_governance(EvidenceClass::caption));
}
