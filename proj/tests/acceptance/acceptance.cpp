// One line per acceptance criterion; exits non-zero when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gaze/core/digest.hpp"
#include "gaze/core/random.hpp"
#include "gaze/detect/claps.hpp"
#include "gaze/detect/tracker.hpp"
#include "gaze/export/redaction.hpp"
#include "gaze/fusion/timeline.hpp"
#include "gaze/metrics/report.hpp"
#include "gaze/metrics/rtr.hpp"
#include "gaze/pipeline/config.hpp"
#include "gaze/pipeline/orchestrator.hpp"
#include "gaze/pipeline/synth.hpp"
#include "gaze/projection/render.hpp"
#include "gaze/review/audit.hpp"
#include "gaze/review/session.hpp"
#include "support/fusion_scenes.hpp"
#include "support/geometry_checks.hpp"
#include "support/redaction_oracle.hpp"
#include "support/tmpdir.hpp"
#include "support/tracker_oracle.hpp"

using namespace gaze;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> check;
};

// ---- savings table

void savings(Outcome& o) {
  const auto& factors = metrics::default_savings_factors();
  const auto r = metrics::savings_model(factors);
  const auto table = metrics::savings_table(factors, r);
  const char* minutes[] = {"3.0", "6.0", "4.8", "7.2"};
  std::istringstream rows(table);
  std::string line;
  std::getline(rows, line);  // header
  for (int i = 0; i < 4; ++i) {
    std::getline(rows, line);
    const auto last = line.find_last_not_of(' ');
    const auto first = line.find_last_of(' ', last) + 1;
    o.require(line.substr(first, last - first + 1) == minutes[i], "row " + std::to_string(i) + " prints " + minutes[i]);
    o.require(r.minutes_per_factor[i] == 60.0 * factors[i].fraction, "row minutes are 60 f");
  }
  o.require(std::abs(r.combined - 0.308) <= 0.005, "combined 30.8% +- 0.5%");
  o.require(std::abs(r.minutes_per_hour - 18.5) <= 0.5, "18.5 +- 0.5 min");
  o.detail << "combined " << 100 * r.combined << "%, " << r.minutes_per_hour << " min/h";
}

// ---- RTR

void rtr_suite(Outcome& o) {
  o.require(metrics::rtr(3600, 3600) == 0.0, "rtr(x,x) = 0");
  o.require(metrics::rtr(0, 3600) == 1.0, "rtr(0,x) = 1");
  const auto s = metrics::simulate_session("one-hour", 3600, 44 * 60, 3);
  const auto d = metrics::compute_dwell(s.log, s.flagged, {});
  const double one = metrics::rtr(d.t_hitl_s, 3600);
  o.require(std::abs(one - 0.26666666666666666) <= 1e-9, "44 min dwell gives 0.2667");

  std::vector<metrics::BootstrapCi> runs;
  for (int k = 0; k < 3; ++k) {
    const auto batch = metrics::simulate_batch(40, 3600, 42 * 60, 300, 2026);
    runs.push_back(metrics::bootstrap_mean_ci(batch.rtrs, 0.95, 10000, 7));
  }
  o.require(std::abs(runs[0].mean - 0.30) <= 1e-9, "batch mean 0.30");
  o.require(runs[0].lo < runs[0].mean && runs[0].mean < runs[0].hi, "CI brackets the mean");
  for (int k = 1; k < 3; ++k)
    o.require(runs[k].mean == runs[0].mean && runs[k].lo == runs[0].lo && runs[k].hi == runs[0].hi, "same triple across runs");
  char buf[160];
  std::snprintf(buf, sizeof buf, "1h/44min RTR %.10f; batch %.4f [%.4f, %.4f] x3", one, runs[0].mean, runs[0].lo, runs[0].hi);
  o.detail << buf;
}

// ---- conservative auto-skip

void auto_skip(Outcome& o) {
  Rng rng(2024);
  std::size_t violations = 0, skips = 0;
  for (int i = 0; i < 50; ++i) {
    const auto scene = test::random_fusion_scene(rng);
    const auto r = fusion::build_timeline(scene.evidence, scene.clips, fusion::FusionPolicy::defaults(), scene.duration,
                                          segment::StreamView::front);
    violations += fusion::conservativeness_violations(r.timeline, r.skips);
    violations += test::raw_governance_violations(scene, r.skips);
    skips += r.skips.size();
  }
  o.require(violations == 0, "no skip covers pii, minor_risk or nsfw");
  o.require(skips > 0, "the sessions produce skips at all");

  // 8% of a 5 minute session is black and silent
  test::TempDir d("accept-idle");
  pipeline::SynthOptions opt;
  opt.duration = 300;
  opt.idle = {240, 264};
  opt.black_idle = true;
  opt.claps = {4};
  pipeline::write_synthetic_session(d.path() / "raw", opt);
  auto cfg = pipeline::pipeline_config_from_json(Json{{"raw_dir", "raw"}, {"session_dir", "session"}}, d.path());
  pipeline::Orchestrator orch(cfg);
  for (auto s : {pipeline::Stage::ingest, pipeline::Stage::project, pipeline::Stage::segment, pipeline::Stage::detect,
                 pipeline::Stage::fuse})
    orch.run_stage(s);
  const auto timeline = fusion::load_timeline(cfg.session_dir / "timeline.jsonl");
  const auto skip_spans = fusion::load_skips(cfg.session_dir / "skips.jsonl");
  const double reduction = fusion::review_volume_reduction(timeline, skip_spans, opt.duration);
  double skipped = 0;
  for (const auto& s : skip_spans) skipped += s.t_end - s.t_start;
  // 1 - 276/300 is 0.0799999... in doubles
  o.require(reduction >= 0.08 - 1e-12, "review_volume_reduction >= 0.08");
  o.require(skipped / opt.duration >= 0.08 - 1e-12, "skips cover the 8% idle stretch");
  o.require(fusion::conservativeness_violations(timeline, skip_spans) == 0, "pipeline skips are conservative");
  o.detail << violations << " violations over 50 sessions (" << skips << " skips); 8% idle session: reduction "
           << reduction << ", skipped " << skipped / opt.duration;
}

// ---- tracker

void tracker(Outcome& o) {
  Rng rng(11);
  int agree = 0, lanes_total = 0, lanes_agree = 0;
  for (int i = 0; i < 100; ++i) {
    const bool lanes = i % 2 == 0;
    const auto scene = test::random_scene(rng, lanes);
    detect::TrackerParams p;
    p.age_out_frames = 3;
    const bool same = test::same_tracks(detect::run_tracker(scene.frames, p),
                                        test::oracle_tracker(scene.frames, p.iou_threshold, p.age_out_frames));
    agree += same;
    lanes_total += lanes;
    lanes_agree += lanes && same;
  }
  o.require(agree >= 95, ">= 95% agreement");
  o.require(lanes_agree == lanes_total, "exact on crossing-free scenes");

  detect::TrackerParams p;
  p.age_out_frames = 5;
  const Box b{0, 0, 20, 20};
  auto at = [&](int f) { return detect::FrameDetections{f, f / 10.0, {{b, 0.9, {}, std::nullopt}}}; };
  o.require(detect::run_tracker({at(0), at(6)}, p).size() == 1, "delta missing frames keep the track");
  o.require(detect::run_tracker({at(0), at(7)}, p).size() == 2, "delta + 1 missing frames start a new one");
  o.detail << agree << "/100 scenes, " << lanes_agree << "/" << lanes_total << " crossing-free, age-out boundary at 5";
}

// ---- geometry

void geometry(Outcome& o) {
  const auto rt = test::fisheye_roundtrip(1024, 2.0);
  o.require(rt.max_error <= 3, "round trip within 3/255");
  o.require(rt.compared > 1024u * 512u * 9 / 10, "compared most of the raster");

  const Image erp = test::smooth_erp(1024, 512);
  const projection::ViewSpec front{projection::ViewName::front, 0.0, 0.0, 90.0, 257, 257};
  const Frame v = projection::render_rectilinear_view({erp, 0.0}, front);
  const auto want = projection::sample_erp(erp, 0.0, 0.0);
  const auto* got = v.image.pixel(128, 128);
  o.require(got[0] == want[0] && got[1] == want[1] && got[2] == want[2], "front center equals the erp (0,0) sample");

  const int yaw = test::yaw_equivariance_error(erp, 129);
  o.require(yaw <= 2, "yaw equivariance within 2/255");
  o.detail << "round trip max " << rt.max_error << "/255 over " << rt.compared << " px; yaw " << yaw << "/255";
}

// ---- redaction

bool outside_identical(const Image& src, const Image& out, const test::Rect& r) {
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) continue;
      if (!std::equal(src.pixel(x, y), src.pixel(x, y) + 3, out.pixel(x, y))) return false;
    }
  return true;
}

void redaction(Outcome& o) {
  const Image src = test::noise_image(160, 120, 5);
  const Box boxes[] = {{12.5, 9.25, 70, 45}, {0, 0, 160, 120}, {150, 100, 30, 30}, {40, 40, 1, 1}};
  int checked = 0;
  for (const auto& box : boxes) {
    const auto rect = test::covering_rect(box, src.width, src.height);
    for (auto kind : {redact::PlanKind::blur, redact::PlanKind::mosaic, redact::PlanKind::box, redact::PlanKind::text_overlay}) {
      redact::RedactionPlan p;
      p.plan_id = "p";
      p.kind = kind;
      p.span = {0, 1};
      p.view = segment::StreamView::front;
      p.box = box;
      if (kind == redact::PlanKind::text_overlay) p.text = "[FACE]";
      const Image out = redact::render_visual_redaction(src, p);
      const std::string k(redact::to_string(kind));
      o.require(outside_identical(src, out, rect), k + " leaves the outside untouched");
      Image want;
      if (kind == redact::PlanKind::blur) want = test::oracle_blur(src, rect, p.params.blur_radius, p.params.blur_passes);
      if (kind == redact::PlanKind::mosaic) want = test::oracle_mosaic(src, rect, p.params.mosaic_cell);
      if (kind == redact::PlanKind::box) want = test::oracle_fill(src, rect, 0, 0, 0);
      if (kind == redact::PlanKind::text_overlay) {
        const auto h = sha256_hex("[FACE]");
        auto byte = [&](int i) { return static_cast<std::uint8_t>(std::stoi(h.substr(2 * i, 2), nullptr, 16)); };
        want = test::oracle_fill(src, rect, byte(0), byte(1), byte(2));
      }
      o.require(out.rgb == want.rgb, k + " matches its reference");
      ++checked;
    }
  }

  PcmAudio audio;
  audio.sample_rate = 16000;
  Rng rng(9);
  audio.samples.resize(10 * 16000);
  for (auto& s : audio.samples) s = static_cast<std::int16_t>(rng.uniform(-9000, 9000));
  for (auto kind : {redact::PlanKind::mute, redact::PlanKind::tone_replace}) {
    redact::RedactionPlan p;
    p.plan_id = "a";
    p.kind = kind;
    p.span = {3.25, 4.5};
    const auto out = redact::render_audio_redaction(audio, p);
    // 3.25 s and 4.5 s at 16 kHz are samples 52000 and 72000
    const std::size_t a = 52000, b = 72000;
    o.require(redact::sample_range(p.span, 16000, audio.samples.size()) == std::pair{a, b}, "sample range");
    bool outside = true, zero = true;
    for (std::size_t i = 0; i < audio.samples.size(); ++i) {
      if (i < a || i >= b) outside = outside && out.samples[i] == audio.samples[i];
      else zero = zero && out.samples[i] == 0;
    }
    const std::string k(redact::to_string(kind));
    o.require(outside, k + " leaves other samples untouched");
    if (kind == redact::PlanKind::mute) o.require(zero, "mute zeroes [52000, 72000)");
    ++checked;
  }

  // withheld time is cut and everything around it keeps its content
  redact::RedactionPlan w;
  w.plan_id = "w";
  w.kind = redact::PlanKind::withhold;
  w.span = {10, 20};
  const auto mapping = redact::build_mapping({w}, 60);
  o.require(!redact::raw_to_export(mapping, 15).has_value(), "withheld time has no export time");
  o.require(redact::raw_to_export(mapping, 30) == 20.0, "later time shifts by the withheld length");
  o.require(redact::raw_to_export(mapping, 5) == 5.0, "earlier time is unchanged");
  ++checked;
  o.detail << checked << " kind/region cases bit-exact";
}

// ---- audit chain

void audit(Outcome& o) {
  SteppingClock clock(parse_utc("2026-01-01T00:00:00Z"));
  std::vector<fusion::TimelineItem> tl;
  for (int i = 0; i < 1000; ++i) {
    fusion::TimelineItem t;
    t.timeline_id = "tl_" + std::to_string(10000 + i);
    t.cls = i % 5 ? detect::EvidenceClass::activity_tag : detect::EvidenceClass::pii;
    t.t_start = i * 3.0;
    t.t_end = i * 3.0 + 2.0;
    t.confidence = 0.8;
    t.evidence_refs = {t.timeline_id + "/e"};
    t.views = {segment::StreamView::front};
    t.priority_rank = i + 1;
    tl.push_back(t);
  }
  review::ReviewConfig cfg;
  cfg.duration = 3000;
  review::ReviewSession s("audit", tl, {}, clock.as_clock(), cfg);
  int k = 0;
  while (auto it = s.next_item("r" + std::to_string(k % 4))) {
    clock.advance(std::chrono::milliseconds(900));
    review::ReviewerAction a;
    a.timeline_id = it->timeline_id;
    a.reviewer_id = "r" + std::to_string(k % 4);
    a.dwell_ms = 900;
    if (k % 7 == 3) {
      a.op = review::Operation::adjust;
      a.t_start = it->t_start + 0.5;
    } else if (k % 7 == 5) {
      a.op = review::Operation::override_;
      a.new_action = detect::Action::none;
      a.rationale = review::Rationale::FP;
    }
    s.apply_action(a);
    ++k;
  }
  const auto lines = s.audit_lines();
  o.require(lines.size() == 1000, "1000 records");
  o.require(!review::verify_chain(lines), "the chain verifies end to end");

  const auto pre = review::replay_pre_states(lines);
  bool replay = pre.size() == 1000;
  for (const auto& [id, state] : pre) replay = replay && state == fusion::to_json(s.original(id));
  o.require(replay, "replay reconstructs every pre-state");

  // A change to record i can only surface at record i (content, digest, form)
  // or at record i + 1 (its prev digest), so each flip is checked on that pair.
  std::size_t flips = 0, caught = 0;
  std::vector<std::string> window;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string prev = i == 0 ? review::genesis_digest() : Json::parse(lines[i - 1]).at("record_digest").get<std::string>();
    window.assign(lines.begin() + i, lines.begin() + i + std::min<std::size_t>(2, lines.size() - i));
    for (std::size_t b = 0; b < lines[i].size(); ++b) {
      window[0][b] = static_cast<char>(lines[i][b] ^ 0x01);
      caught += review::verify_chain(window, prev, i + 1).has_value();
      window[0][b] = lines[i][b];
      ++flips;
    }
  }
  o.require(caught == flips, "every single-byte flip is detected");
  o.detail << lines.size() << " records, " << caught << "/" << flips << " flips detected, " << pre.size() << " pre-states replayed";
}

// ---- determinism

void determinism(Outcome& o) {
  test::TempDir d("accept-det");
  pipeline::SynthOptions opt;
  opt.duration = 180;
  opt.spherical = true;
  pipeline::write_synthetic_session(d.path() / "raw", opt);
  std::vector<fs::path> dirs;
  for (std::size_t workers : {1u, 8u}) {
    auto cfg = pipeline::pipeline_config_from_json(
        Json{{"raw_dir", "raw"}, {"session_dir", "w" + std::to_string(workers)}, {"workers", workers}}, d.path());
    pipeline::Orchestrator(cfg).run_all();
    dirs.push_back(cfg.session_dir);
  }
  std::vector<std::string> files{"clips.jsonl", "timeline.jsonl", "skips.jsonl", "review/final_labels.jsonl", "review/audit.jsonl",
                                 "report.json"};
  for (const auto& e : fs::recursive_directory_iterator(dirs[0] / "deliverable"))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dirs[0]).generic_string());
  std::size_t same = 0;
  for (const auto& f : files) {
    const bool eq = fs::exists(dirs[1] / f) && sha256_file(dirs[0] / f) == sha256_file(dirs[1] / f);
    o.require(eq, f + " identical");
    same += eq;
  }
  o.detail << same << "/" << files.size() << " artifacts byte-identical (workers 1 vs 8, 3 min spherical)";
}

// ---- claps

void claps(Outcome& o) {
  const int sr = 16000;
  Rng rng(21);
  auto noise = [&](double seconds) {
    std::vector<float> x(static_cast<std::size_t>(seconds * sr));
    for (auto& v : x) v = static_cast<float>(rng.normal() * 1e-3);
    return x;
  };
  auto x = noise(4);
  x[2 * sr] = 0.9f;
  x[2 * sr + sr / 2] = 0.9f;
  auto anchors = detect::detect_claps(x, sr);
  o.require(anchors.size() == 2, "two anchors");
  if (anchors.size() == 2) {
    o.require(std::abs(anchors[0].t - 2.0) <= 0.020 && std::abs(anchors[1].t - 2.5) <= 0.020, "within 20 ms");
    o.detail << "anchors at " << anchors[0].t << ", " << anchors[1].t << "; ";
  }
  auto near = noise(4);
  near[2 * sr] = 0.9f;
  near[2 * sr + sr / 5] = 0.8f;
  const auto merged = detect::detect_claps(near, sr);
  o.require(merged.size() == 1, "0.2 s apart merge");
  o.require(detect::detect_claps(std::vector<float>(4 * sr, 0.0f), sr).empty(), "silence yields none");
  o.detail << merged.size() << " anchor for the close pair";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"savings table", 1.0, savings},
      {"rtr suite", 10.0, rtr_suite},
      {"conservative auto-skip", 30.0, auto_skip},
      {"tracker oracle equivalence", 60.0, tracker},
      {"geometry round trip 1024x512", 30.0, geometry},
      {"redaction bit-exactness", 10.0, redaction},
      {"audit chain", 5.0, audit},
      {"determinism workers 1 vs 8", 120.0, determinism},
      {"clap anchors", 10.0, claps},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.check(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[threw: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool ok = o.pass && in_time;
    failed += !ok;
    std::printf("%s  %-30s %7.2f s / %5.0f s%s  %s\n", ok ? "PASS" : "FAIL", c.name, secs, c.budget_s,
                in_time ? "" : " (over budget)", o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
