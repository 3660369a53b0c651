#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gaze/core/digest.hpp"
#include "gaze/export/deliverable.hpp"
#include "gaze/ingest/provenance.hpp"
#include "gaze/review/questionnaire.hpp"
#include "gaze/review/session.hpp"
#include "support/errors.hpp"
#include "support/redaction_oracle.hpp"
#include "support/tmpdir.hpp"

using namespace gaze;
using namespace gaze::redact;
using test::error_code;

namespace fs = std::filesystem;

namespace {

RedactionPlan visual(const std::string& id, PlanKind kind, Box box) {
  RedactionPlan p;
  p.plan_id = id;
  p.kind = kind;
  p.span = {0, 1};
  p.view = segment::StreamView::front;
  p.box = box;
  if (kind == PlanKind::text_overlay) p.text = "[NAME]";
  return p;
}

RedactionPlan audio_plan(PlanKind kind, double a, double b) {
  RedactionPlan p;
  p.plan_id = "a";
  p.kind = kind;
  p.span = {a, b};
  return p;
}

PcmAudio noise_audio(double seconds, int sr) {
  Rng rng(8);
  PcmAudio a;
  a.sample_rate = sr;
  a.samples.resize(static_cast<std::size_t>(seconds * sr));
  for (auto& s : a.samples) s = static_cast<std::int16_t>(rng.uniform(-8000, 8000));
  return a;
}

ProvenanceBundle provenance() {
  ProvenanceBundle p;
  p.model_versions = {{"detector", "fixture/1"}};
  p.thresholds = Json{{"detector", {{"nsfw", 0.5}}}};
  p.reviewer_ids = {"r1"};
  p.software_build = "gaze-test";
  p.ledger_digest = std::string(64, 'a');
  return p;
}

fusion::TimelineItem tl_item(const std::string& id, detect::EvidenceClass cls, double a, double b, detect::Action act,
                             int rank) {
  fusion::TimelineItem t;
  t.timeline_id = id;
  t.cls = cls;
  t.t_start = a;
  t.t_end = b;
  t.confidence = 0.9;
  t.evidence_refs = {id + "/e"};
  t.views = {segment::StreamView::front};
  t.suggested_action = act;
  t.priority_rank = rank;
  return t;
}

// 60 s session at 1 fps with audio, reviewed and finalized with `timeline`.
MediaSource make_session(const fs::path& dir, std::vector<fusion::TimelineItem> timeline) {
  const fs::path frames = dir / "views" / "front";
  fs::create_directories(frames);
  std::vector<FrameEntry> entries;
  for (int i = 0; i < 60; ++i) {
    entries.push_back({i, static_cast<double>(i)});
    write_ppm(frame_path(frames, i), test::noise_image(40, 30, 100 + i));
  }
  write_frame_index(frames, entries);
  write_wav(dir / "audio.wav", noise_audio(60, 16000));
  SteppingClock clock(parse_utc("2026-01-01T00:00:00Z"));
  review::ReviewSession s("sess", std::move(timeline), {}, clock.as_clock(), {}, dir / "review");
  while (auto it = s.next_item("r1")) {
    review::ReviewerAction a;
    a.timeline_id = it->timeline_id;
    a.reviewer_id = "r1";
    s.apply_action(a);
  }
  s.finalize(review::questionnaire_template(), "r1");
  return {frames, segment::StreamView::front, dir / "audio.wav", 60.0};
}

}  // namespace

TEST_CASE("pixel rectangles cover the box") {
  CHECK(pixel_rect({1.2, 2.7, 3.0, 1.0}, 10, 10).x0 == 1);
  CHECK(pixel_rect({1.2, 2.7, 3.0, 1.0}, 10, 10).x1 == 5);
  CHECK(pixel_rect({1.2, 2.7, 3.0, 1.0}, 10, 10).y1 == 4);
  CHECK(pixel_rect({-5, -5, 8, 8}, 10, 10).x0 == 0);
  CHECK(pixel_rect({8, 8, 5, 5}, 10, 10).x1 == 10);
  CHECK(pixel_rect({3, 3, 0, 4}, 10, 10).empty());
}

TEST_CASE("visual redactions match the reference renderers bit for bit") {
  const Image src = test::noise_image(97, 61, 1);
  const Box boxes[] = {{10.5, 7.25, 40, 30}, {0, 0, 97, 61}, {90, 50, 20, 20}, {33, 20, 1, 1}};
  for (const auto& b : boxes) {
    const auto r = test::covering_rect(b, src.width, src.height);
    auto p = visual("p", PlanKind::blur, b);
    CHECK(render_visual_redaction(src, p).rgb == test::oracle_blur(src, r, p.params.blur_radius, p.params.blur_passes).rgb);
    p.params.blur_radius = 2;
    p.params.blur_passes = 1;
    CHECK(render_visual_redaction(src, p).rgb == test::oracle_blur(src, r, 2, 1).rgb);
    p = visual("p", PlanKind::mosaic, b);
    CHECK(render_visual_redaction(src, p).rgb == test::oracle_mosaic(src, r, p.params.mosaic_cell).rgb);
    p.params.mosaic_cell = 5;
    CHECK(render_visual_redaction(src, p).rgb == test::oracle_mosaic(src, r, 5).rgb);
    p = visual("p", PlanKind::box, b);
    CHECK(render_visual_redaction(src, p).rgb == test::oracle_fill(src, r, 0, 0, 0).rgb);
    p = visual("p", PlanKind::text_overlay, b);
    const auto h = sha256_hex("[NAME]");
    CHECK(render_visual_redaction(src, p).rgb ==
          test::oracle_fill(src, r, static_cast<std::uint8_t>(std::stoi(h.substr(0, 2), nullptr, 16)),
                            static_cast<std::uint8_t>(std::stoi(h.substr(2, 2), nullptr, 16)),
                            static_cast<std::uint8_t>(std::stoi(h.substr(4, 2), nullptr, 16)))
              .rgb);
  }
  CHECK(render_visual_redaction(src, visual("p", PlanKind::blur, {200, 200, 5, 5})).rgb == src.rgb);
}

TEST_CASE("overlapping plans render independently of their order") {
  const Image src = test::noise_image(64, 48, 2);
  const auto a = visual("x#r000", PlanKind::mosaic, {5, 5, 30, 30});
  const auto b = visual("x#r001", PlanKind::box, {20, 20, 30, 20});
  const auto c = visual("y#r000", PlanKind::blur, {0, 30, 64, 18});
  const auto ref = render_visual_plans(src, {&a, &b, &c});
  std::vector<const RedactionPlan*> order{&a, &b, &c};
  do {
    CHECK(render_visual_plans(src, order).rgb == ref.rgb);
  } while (std::next_permutation(order.begin(), order.end()));
  // the overlap of a and b belongs to a, the smaller plan id
  const auto mosaic = test::oracle_mosaic(src, {5, 5, 35, 35}, 16);
  CHECK(std::equal(ref.pixel(25, 25), ref.pixel(25, 25) + 3, mosaic.pixel(25, 25)));
  CHECK(ref.pixel(45, 25)[0] == 0);
}

TEST_CASE("audio redactions") {
  const auto raw = noise_audio(10, 16000);
  const auto muted = render_audio_redaction(raw, audio_plan(PlanKind::mute, 3, 4));
  CHECK(sample_range({3, 4}, 16000, raw.samples.size()) == std::pair<std::size_t, std::size_t>{48000, 64000});
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (i >= 48000 && i < 64000) CHECK(muted.samples[i] == 0);
    else if (muted.samples[i] != raw.samples[i]) FAIL("sample " << i << " changed");
  }
  const auto toned = render_audio_redaction(raw, audio_plan(PlanKind::tone_replace, 2, 5));
  double acc = 0;
  for (std::size_t i = 32000; i < 80000; ++i) acc += std::pow(toned.samples[i] / 32768.0, 2);
  CHECK(20 * std::log10(std::sqrt(acc / 48000)) == doctest::Approx(-20.0).epsilon(0.005));
  CHECK(std::equal(raw.samples.begin(), raw.samples.begin() + 32000, toned.samples.begin()));
  CHECK(std::equal(raw.samples.begin() + 80000, raw.samples.end(), toned.samples.begin() + 80000));
  CHECK(error_code([&] { render_audio_redaction(raw, audio_plan(PlanKind::mute, 9, 11)); }) == Errc::SpanOutOfRange);
  CHECK(error_code([&] { render_audio_redaction(raw, audio_plan(PlanKind::box, 1, 2)); }) == Errc::SchemaViolation);
}

TEST_CASE("plan validation") {
  auto p = visual("p", PlanKind::blur, {0, 0, 4, 4});
  validate_plan(p);
  p.box.reset();
  CHECK(error_code([&] { validate_plan(p); }) == Errc::SchemaViolation);
  auto m = audio_plan(PlanKind::mute, 2, 1);
  CHECK(error_code([&] { validate_plan(m); }) == Errc::SchemaViolation);
  m = audio_plan(PlanKind::withhold, 1, 2);
  validate_plan(m);
  m.box = Box{0, 0, 1, 1};
  CHECK(error_code([&] { validate_plan(m); }) == Errc::SchemaViolation);
  const auto ok = visual("p", PlanKind::mosaic, {1, 2, 3, 4});
  CHECK(to_json(redaction_plan_from_json(to_json(ok))) == to_json(ok));
}

TEST_CASE("withheld time is cut from the export timeline") {
  auto w = audio_plan(PlanKind::withhold, 10, 20);
  auto mute = audio_plan(PlanKind::mute, 30, 31);
  mute.plan_id = "b";
  const auto mapping = build_mapping({w, mute}, 60);
  REQUIRE(mapping.size() == 5);
  CHECK(mapping[0].exported == Span{0, 10});
  CHECK_FALSE(mapping[1].exported);
  CHECK(mapping[2].raw == Span{20, 30});
  CHECK(mapping[2].exported == Span{10, 20});
  CHECK(mapping[3].plan_ids == std::vector<std::string>{"b"});
  CHECK(mapping[4].exported == Span{21, 50});
  CHECK(export_to_raw(mapping, 15.0) == 25.0);
  CHECK_FALSE(raw_to_export(mapping, 15.0));
  CHECK(raw_to_export(mapping, 45.0) == 35.0);
  CHECK_FALSE(export_to_raw(mapping, 55.0));
  for (double t = 0; t < 50; t += 0.37) CHECK(raw_to_export(mapping, *export_to_raw(mapping, t)) == doctest::Approx(t));
  CHECK(to_json(mapping_segment_from_json(to_json(mapping[1]))) == to_json(mapping[1]));
}

TEST_CASE("an export with nothing to redact is the identity") {
  test::TempDir d("identity");
  const auto media = make_session(d.path(), {tl_item("tl_cap", detect::EvidenceClass::activity_tag, 1, 5, detect::Action::none, 1)});
  const auto out = d.path() / "deliverable";
  const auto sum = export_session(d.path(), media, provenance(), {}, out);
  CHECK(sum.plans.empty());
  CHECK(sum.frames_written == 60);
  CHECK(sum.frames_rendered == 0);
  CHECK(sum.export_duration == 60.0);
  for (int i = 0; i < 60; ++i) CHECK(sha256_file(frame_path(out / "frames", i)) == sha256_file(frame_path(media.frames_dir, i)));
  CHECK(sha256_file(out / "audio.wav") == sha256_file(*media.audio));
  const auto ledger = ingest::ledger_from_json(load_json(out / "export_ledger.json"));
  CHECK(ledger.verify());
  CHECK(ingest::ledger_problems(load_json(out / "export_ledger.json")).empty());
}

TEST_CASE("export applies withhold, mute and blur") {
  test::TempDir d("export");
  auto minor = tl_item("tl_minor", detect::EvidenceClass::minor_risk, 30, 33, detect::Action::blur_and_review, 2);
  minor.regions.push_back({segment::StreamView::front, {4, 4, 10, 10}, {30, 33}, "tl_minor/e"});
  const auto media = make_session(d.path(), {tl_item("tl_nsfw", detect::EvidenceClass::nsfw, 10, 20, detect::Action::withhold, 1), minor,
                                             tl_item("tl_pii", detect::EvidenceClass::pii, 3, 4, detect::Action::mute, 3)});
  const auto out = d.path() / "deliverable";
  ExportConfig cfg;
  cfg.visual_kind = PlanKind::mosaic;
  cfg.workers = 3;
  const auto sum = export_session(d.path(), media, provenance(), cfg, out);
  CHECK(sum.plans.size() == 3);
  CHECK(sum.export_duration == 50.0);
  // frames at t = 10..19 fall inside the half-open withheld span
  CHECK(sum.frames_withheld == 10);
  CHECK(sum.frames_written == 50);
  CHECK(sum.frames_rendered == 4);
  const FrameSequence exported(out / "frames");
  CHECK(exported.entries()[10].t_seconds == 10.0);  // raw t = 20
  const Image raw30 = read_ppm(frame_path(media.frames_dir, 30));
  const Image out30 = read_ppm(frame_path(out / "frames", 20));
  CHECK(out30.rgb == test::oracle_mosaic(raw30, {4, 4, 14, 14}, 16).rgb);

  const auto audio = read_wav(out / "audio.wav");
  const auto raw = read_wav(*media.audio);
  CHECK(audio.samples.size() == 50u * 16000u);
  for (std::size_t i = 48000; i < 64000; ++i) REQUIRE(audio.samples[i] == 0);
  CHECK(std::equal(audio.samples.begin() + 160000, audio.samples.end(), raw.samples.begin() + 320000));
  CHECK(unredacted_governance(read_jsonl(out / "final_labels.jsonl"), sum.mapping).empty());
  CHECK(ingest::ledger_problems(load_json(out / "export_ledger.json")).empty());

  // the same export with more workers is byte identical
  const auto again = d.path() / "deliverable2";
  cfg.workers = 1;
  export_session(d.path(), media, provenance(), cfg, again);
  CHECK(read_file(out / "export_ledger.json") == read_file(again / "export_ledger.json"));
}

TEST_CASE("export refuses an unfinished review and thin provenance") {
  test::TempDir d("refuse");
  fs::create_directories(d.path() / "review");
  SteppingClock clock(parse_utc("2026-01-01T00:00:00Z"));
  review::ReviewSession s("sess", {tl_item("tl_a", detect::EvidenceClass::nsfw, 1, 2, detect::Action::withhold, 1)}, {},
                          clock.as_clock(), {}, d.path() / "review");
  MediaSource media{d.path(), segment::StreamView::front, std::nullopt, 10};
  CHECK(error_code([&] { export_session(d.path(), media, provenance(), {}, d.path() / "out"); }) == Errc::NotFinalized);
  auto p = provenance();
  p.reviewer_ids.clear();
  CHECK(error_code([&] { validate_provenance(p); }) == Errc::SchemaViolation);
  p = provenance();
  p.ledger_digest = "xyz";
  CHECK(error_code([&] { validate_provenance(p); }) == Errc::SchemaViolation);
}
