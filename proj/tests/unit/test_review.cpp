#include <set>

#include "doctest.h"
#include "gaze/core/digest.hpp"
#include "gaze/core/json.hpp"
#include "gaze/review/audit.hpp"
#include "gaze/review/questionnaire.hpp"
#include "gaze/review/script.hpp"
#include "gaze/review/session.hpp"
#include "support/errors.hpp"
#include "support/tmpdir.hpp"

using namespace gaze;
using namespace gaze::review;
using detect::Action;
using segment::StreamView;
using detect::EvidenceClass;
using test::error_code;

namespace {

TimePoint t0() { return parse_utc("2026-01-01T00:00:00Z"); }

TimelineItem item(const std::string& id, EvidenceClass cls, double a, double b, int rank) {
  TimelineItem t;
  t.timeline_id = id;
  t.cls = cls;
  t.t_start = a;
  t.t_end = b;
  t.confidence = 0.9;
  t.evidence_refs = {id + "/ev"};
  t.views = {StreamView::front};
  t.priority_rank = rank;
  return t;
}

std::vector<TimelineItem> sample_timeline(int n) {
  std::vector<TimelineItem> out;
  for (int i = 0; i < n; ++i)
    out.push_back(item("tl_" + std::to_string(100 + i), i % 3 ? EvidenceClass::activity_tag : EvidenceClass::nsfw, i * 2.0,
                       i * 2.0 + 1.5, i + 1));
  return out;
}

ReviewConfig config() {
  ReviewConfig c;
  c.duration = 600;
  return c;
}

ReviewerAction accept(const std::string& id, const std::string& who, std::int64_t dwell = 1000) {
  ReviewerAction a;
  a.timeline_id = id;
  a.reviewer_id = who;
  a.dwell_ms = dwell;
  return a;
}

}  // namespace

TEST_CASE("next_item hands out the lowest pending rank and locks it") {
  SteppingClock clock(t0());
  auto tl = sample_timeline(4);
  ReviewSession s("s", tl, {{5.5, 6.0, fusion::SkipReason::idle}}, clock.as_clock(), config());
  const auto a = s.next_item("r1");
  REQUIRE(a);
  CHECK(a->timeline_id == "tl_100");
  CHECK(s.next_item("r1")->timeline_id == "tl_100");  // own lock comes back
  const auto b = s.next_item("r2");
  CHECK(b->timeline_id == "tl_101");
  CHECK(error_code([&] { s.apply_action(accept("tl_100", "r2")); }) == Errc::NotLocked);
  s.apply_action(accept("tl_100", "r1"));
  // tl_102 is [4, 5.5] and does not meet the skip; tl_103 [6, 7.5] touches only its end
  CHECK(s.next_item("r1")->timeline_id == "tl_102");
  CHECK(s.next_item("r3")->timeline_id == "tl_103");
  CHECK_FALSE(s.next_item("r4"));

  // locks lapse after the TTL
  clock.advance(std::chrono::minutes(16));
  CHECK(s.next_item("r4")->timeline_id == "tl_101");
  int expired = 0;
  for (const auto& l : s.audit_lines()) expired += Json::parse(l).at("operation") == "lock_expired";
  CHECK(expired == 3);
}

TEST_CASE("items inside a skip span are not served") {
  SteppingClock clock(t0());
  ReviewSession s("s", {item("tl_a", EvidenceClass::idle, 10, 20, 1), item("tl_b", EvidenceClass::nsfw, 30, 31, 2)},
                  {{5, 25, fusion::SkipReason::idle}}, clock.as_clock(), config());
  CHECK(s.next_item("r1")->timeline_id == "tl_b");
  CHECK_FALSE(s.next_item("r2"));
}

TEST_CASE("accept, adjust and override") {
  SteppingClock clock(t0());
  ReviewSession s("s", sample_timeline(3), {}, clock.as_clock(), config());
  auto id = s.next_item("r1")->timeline_id;
  ReviewerAction adj = accept(id, "r1");
  adj.op = Operation::adjust;
  CHECK(error_code([&] { s.apply_action(adj); }) == Errc::InvalidTransition);  // nothing changed
  adj.t_end = 700.0;
  CHECK(error_code([&] { s.apply_action(adj); }) == Errc::InvalidTransition);  // past the end
  adj.t_start = 0.5;
  adj.t_end = 1.0;
  const auto rec = s.apply_action(adj);
  CHECK(rec.operation == "adjust");
  CHECK(s.item(id)->status == ItemStatus::adjusted);
  CHECK(s.item(id)->span() == Span{0.5, 1.0});
  CHECK(s.original(id).span() == Span{0, 1.5});
  CHECK(error_code([&] { s.apply_action(accept(id, "r1")); }) == Errc::NotLocked);

  id = s.next_item("r1")->timeline_id;
  ReviewerAction ov = accept(id, "r1");
  ov.op = Operation::override_;
  ov.new_action = Action::none;
  CHECK(error_code([&] { s.apply_action(ov); }) == Errc::MissingRationale);
  ov.rationale = Rationale::FP;
  CHECK(s.apply_action(ov).rationale_code == "FP");
  CHECK(s.item(id)->suggested_action == Action::none);
  CHECK(s.item(id)->status == ItemStatus::overridden);

  Json bad = to_json(ov);
  bad["rationale_code"] = "BECAUSE";
  CHECK(error_code([&] { reviewer_action_from_json(bad); }) == Errc::MissingRationale);
  CHECK(to_json(reviewer_action_from_json(to_json(adj))) == to_json(adj));
  CHECK(s.t_hitl_ms() == 2000);
}

TEST_CASE("audit chain detects every single-byte change") {
  SteppingClock clock(t0());
  ReviewSession s("s", sample_timeline(40), {}, clock.as_clock(), config());
  int k = 0;
  while (auto it = s.next_item("r" + std::to_string(k % 3))) {
    clock.advance(std::chrono::milliseconds(700));
    auto a = accept(it->timeline_id, "r" + std::to_string(k % 3), 700);
    if (k % 4 == 1) {
      a.op = Operation::override_;
      a.new_action = Action::blur;
      a.rationale = Rationale::WRONG_CLASS;
    }
    s.apply_action(a);
    ++k;
  }
  const auto lines = s.audit_lines();
  REQUIRE(lines.size() == 40);
  CHECK_FALSE(verify_chain(lines));

  std::size_t flips = 0, caught = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string prev = i == 0 ? genesis_digest() : Json::parse(lines[i - 1]).at("record_digest").get<std::string>();
    const std::size_t n = std::min<std::size_t>(2, lines.size() - i);
    for (std::size_t b = 0; b < lines[i].size(); ++b) {
      std::vector<std::string> window(lines.begin() + i, lines.begin() + i + n);
      window[0][b] = static_cast<char>(window[0][b] ^ 0x01);
      ++flips;
      const auto problem = verify_chain(window, prev, i + 1);
      caught += problem.has_value();
    }
  }
  CHECK(caught == flips);

  // a removed record is caught at the position it left
  auto gap = lines;
  gap.erase(gap.begin() + 7);
  const auto problem = verify_chain(gap);
  REQUIRE(problem);
  CHECK(problem->seq == 8);

  // pre-states replay to the original items
  const auto pre = replay_pre_states(lines);
  CHECK(pre.size() == 40);
  for (const auto& [id, state] : pre) CHECK(state == fusion::to_json(s.original(id)));
}

TEST_CASE("audit log on disk") {
  test::TempDir d("audit");
  SteppingClock clock(t0());
  {
    ReviewSession s("s", sample_timeline(3), {}, clock.as_clock(), config(), d.path());
    s.next_item("r1");
    s.apply_action(accept("tl_100", "r1"));
  }
  CHECK_FALSE(verify_chain_file(d.path() / "audit.jsonl"));
  std::string text = read_file(d.path() / "audit.jsonl");
  write_file_atomic(d.path() / "audit.jsonl", text.substr(0, text.size() - 1));
  CHECK(verify_chain_file(d.path() / "audit.jsonl"));
  const auto at = text.find("\"r1\"");
  text[at + 2] = '2';
  write_file_atomic(d.path() / "audit.jsonl", text);
  const auto p = verify_chain_file(d.path() / "audit.jsonl");
  REQUIRE(p);
  CHECK(p->seq == 1);
}

TEST_CASE("review state survives a restart") {
  test::TempDir d("state");
  SteppingClock clock(t0());
  {
    std::vector<Json> lines;
    for (const auto& t : sample_timeline(3)) lines.push_back(fusion::to_json(t));
    write_jsonl(d.path() / "timeline.jsonl", lines);
    auto s = ReviewSession::open("s", d.path(), clock.as_clock(), config());
    s->next_item("r1");
    s->apply_action(accept("tl_100", "r1"));
    s->next_item("r2");
  }
  auto s = ReviewSession::open("s", d.path(), clock.as_clock(), config());
  CHECK(s->item("tl_100")->status == ItemStatus::accepted);
  CHECK(s->next_item("r1")->timeline_id == "tl_102");  // tl_101 is still locked by r2
  s->apply_action(accept("tl_102", "r1"));
  CHECK(s->audit_lines().size() == 2);
  CHECK_FALSE(verify_chain_file(d.path() / "review" / "audit.jsonl"));
  CHECK(error_code([&] { ReviewSession::open("other", d.path(), clock.as_clock(), config()); }) == Errc::SessionUnknown);
}

TEST_CASE("QA sampling") {
  SteppingClock clock(t0());
  auto run = [&](int n, std::uint64_t seed) {
    ReviewSession s("s", sample_timeline(n), {}, clock.as_clock(), config());
    while (auto it = s.next_item("r1")) s.apply_action(accept(it->timeline_id, "r1"));
    return s.draw_qa_sample("qa", 0.10, seed).timeline_ids;
  };
  CHECK(run(30, 1).size() == 3);
  CHECK(run(31, 1).size() == 4);
  CHECK(run(1, 1).size() == 1);
  CHECK(run(30, 9) == run(30, 9));
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 0; seed < 10; ++seed) distinct.insert(run(30, seed));
  CHECK(distinct.size() > 1);

  ReviewSession s("s", sample_timeline(10), {}, clock.as_clock(), config());
  CHECK(error_code([&] { s.draw_qa_sample("qa"); }) == Errc::NothingAccepted);
  while (auto it = s.next_item("r1")) s.apply_action(accept(it->timeline_id, "r1"));
  const auto sample = s.draw_qa_sample("qa", 0.3, 4);
  REQUIRE(sample.timeline_ids.size() == 3);
  CHECK(error_code([&] { s.qa_review(sample.timeline_ids[0], "r1", true, 10); }) == Errc::InvalidTransition);
  s.qa_review(sample.timeline_ids[0], "qa", true, 10);
  s.qa_review(sample.timeline_ids[1], "qa", false, 10);
  CHECK(s.item(sample.timeline_ids[1])->status == ItemStatus::adjudication);
  CHECK(error_code([&] { s.finalize(questionnaire_template(), "r1"); }) == Errc::PendingItemsRemain);
  const auto again = s.next_item("r2");
  REQUIRE(again);
  CHECK(again->timeline_id == sample.timeline_ids[1]);
  ReviewerAction ov = accept(again->timeline_id, "r2", 500);
  ov.op = Operation::override_;
  ov.new_action = Action::none;
  ov.rationale = Rationale::FP;
  s.apply_action(ov);
  CHECK(s.qa_dwell_ms() == 520);
  CHECK(s.qa_outcomes().size() == 2);
}

TEST_CASE("inter-annotator agreement") {
  std::vector<std::pair<bool, bool>> pairs;
  auto add = [&](bool a, bool b, int n) {
    for (int i = 0; i < n; ++i) pairs.emplace_back(a, b);
  };
  add(true, true, 20);
  add(true, false, 5);
  add(false, true, 10);
  add(false, false, 15);
  CHECK(compute_iaa(pairs) == doctest::Approx(0.4));
  CHECK(compute_iaa({{true, true}, {true, true}}) == 1.0);
  CHECK(error_code([] { compute_iaa({}); }) == Errc::NoPairs);
}

TEST_CASE("finalize writes labels and closes the session") {
  test::TempDir d("final");
  SteppingClock clock(t0());
  auto tl = sample_timeline(3);
  tl.push_back(item("tl_skip", EvidenceClass::idle, 100, 120, 4));
  ReviewSession s("s", tl, {{90, 130, fusion::SkipReason::idle}}, clock.as_clock(), config(), d.path());
  int hook_calls = 0;
  s.on_finalize([&](const FinalizeResult&) { ++hook_calls; });
  CHECK(error_code([&] { s.finalize(questionnaire_template(), "r1"); }) == Errc::PendingItemsRemain);
  while (auto it = s.next_item("r1")) s.apply_action(accept(it->timeline_id, "r1"));
  Json bad = questionnaire_template();
  bad["compliance"]["nudity"]["video"] = "yes";
  CHECK(error_code([&] { s.finalize(bad, "r1"); }) == Errc::QuestionnaireInvalid);
  const auto res = s.finalize(questionnaire_template(), "r1");
  CHECK(hook_calls == 1);
  CHECK(res.final_labels.size() == 3);
  CHECK(res.reviewer_ids == std::vector<std::string>{"r1"});
  CHECK(res.final_labels[0].at("action") == "none");
  CHECK(res.final_labels[0].at("status") == "accepted");
  CHECK(s.finalized());
  CHECK(error_code([&] { s.finalize(questionnaire_template(), "r1"); }) == Errc::InvalidTransition);
  CHECK(error_code([&] { s.draw_qa_sample("qa"); }) == Errc::InvalidTransition);
  const auto last = Json::parse(s.audit_lines().back());
  CHECK(last.at("operation") == "finalize");
  CHECK(last.at("detail").at("unreviewed_in_skip") == Json::array({"tl_skip"}));
  const auto labels = read_jsonl(d.path() / "final_labels.jsonl");
  CHECK(labels.size() == 3);
  CHECK(last.at("detail").at("final_labels_digest") == sha256_hex(read_file(d.path() / "final_labels.jsonl")));
}

TEST_CASE("threshold report recommends without applying") {
  std::vector<Json> labels;
  for (int i = 0; i < 4; ++i)
    labels.push_back({{"class", "nsfw"}, {"status", i ? "accepted" : "overridden"}, {"rationale_code", i ? Json(nullptr) : Json("FP")}});
  const auto r = threshold_report(labels, {{"nsfw", 0.5}});
  CHECK(r.at("applied") == false);
  CHECK(r.at("recommended_thresholds").at("nsfw") == doctest::Approx(0.55));
  CHECK(r.at("classes").at("nsfw").at("false_positive_rate") == doctest::Approx(0.25));
}

TEST_CASE("questionnaire validation") {
  CHECK(questionnaire_problems(questionnaire_template()).empty());
  CHECK(parse_mmss("00:30") == 30);
  CHECK(parse_mmss("125:59") == 125 * 60 + 59);
  CHECK_FALSE(parse_mmss("1:60"));
  CHECK_FALSE(parse_mmss("12:5"));
  CHECK_FALSE(parse_mmss(":30"));

  Json q = questionnaire_template();
  q["compliance"]["minors"] = {{"video", "yes"}, {"audio", "no"}, {"video_interval", {{"start", "01:10"}, {"end", "00:40"}}}};
  CHECK(questionnaire_problems(q).size() == 1);
  q["compliance"]["minors"]["video_interval"]["end"] = "01:40";
  CHECK(questionnaire_problems(q).empty());
  q["compliance"]["pii"]["audio"] = "yes";
  CHECK(questionnaire_problems(q).size() == 1);
  q["compliance"]["pii"]["audio_pii_types"] = {"EMAIL", "EMAIL"};
  CHECK(questionnaire_problems(q).size() == 1);
  q["compliance"]["pii"]["audio_pii_types"] = {"EMAIL"};
  CHECK(questionnaire_problems(q).empty());
  q["metadata"]["room"]["video"] = "maybe";
  q["extra"] = 1;
  CHECK(questionnaire_problems(q).size() == 2);
}

TEST_CASE("batch review runs a script and accepts the rest") {
  SteppingClock clock(t0());
  ReviewConfig cfg = config();
  cfg.qa_seed = 3;
  ReviewSession s("s", sample_timeline(6), {}, clock.as_clock(), cfg);
  const std::vector<Json> script{Json{{"reviewer_id", "r1"}, {"operation", "adjust"}, {"t_end", 1.0}, {"dwell_ms", 4000}},
                                 Json{{"reviewer_id", "r1"}, {"operation", "accept"}, {"dwell_ms", 2000}}};
  const auto res = run_batch_review(s, script, questionnaire_template(), clock);
  CHECK(res.scripted == 2);
  CHECK(res.auto_accepted == 4);
  CHECK(res.qa_sampled == 1);
  CHECK(s.t_hitl_ms() == 4000 + 2000 + 4 * 1500);
  CHECK(res.finalized.final_labels.size() == 6);
  CHECK(res.review_log.size() == 3 * 7);
  CHECK(clock.now() - t0() == std::chrono::milliseconds(4000 + 2000 + 4 * 1500 + 1500));

  ReviewSession extra("s", sample_timeline(1), {}, clock.as_clock(), cfg);
  CHECK(error_code([&] { run_batch_review(extra, {script[1], script[1]}, questionnaire_template(), clock); }) ==
        Errc::InvalidTransition);
}
