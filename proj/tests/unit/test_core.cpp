#include <cmath>

#include "doctest.h"
#include "gaze/core/digest.hpp"
#include "gaze/core/interval.hpp"
#include "gaze/core/json.hpp"
#include "gaze/core/media_io.hpp"
#include "gaze/core/random.hpp"
#include "gaze/core/thread_pool.hpp"
#include "gaze/core/time.hpp"
#include "support/tmpdir.hpp"

using namespace gaze;

TEST_CASE("sha256 known vectors") {
  // values from python hashlib
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 inc;
  inc.update("a").update("bc");
  CHECK(inc.hex_digest() == sha256_hex("abc"));
  CHECK(is_hex_digest(sha256_hex("x")));
  CHECK_FALSE(is_hex_digest("ABC"));
  CHECK_FALSE(is_hex_digest(std::string(64, 'G')));
}

TEST_CASE("canonical json sorts keys and rounds lines") {
  const Json j = Json::parse(R"({"b": 1, "a": [1.0, 0.1234567891], "c": {"z": null, "y": -0.0}})");
  CHECK(canonical_dump(j) == R"({"a":[1.0,0.1234567891],"b":1,"c":{"y":-0.0,"z":null}})");
  CHECK(canonical_line(j) == R"({"a":[1.0,0.123457],"b":1,"c":{"y":0.0,"z":null}})");
  CHECK(round6(2.5e-7) == doctest::Approx(0.0));
}

TEST_CASE("json field helpers report schema errors") {
  const Json j{{"n", 3}, {"s", "x"}};
  CHECK(field<int>(j, "n") == 3);
  CHECK(field_or<int>(j, "m", 7) == 7);
  try {
    field<int>(j, "s");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaViolation);
  }
  CHECK_THROWS_AS(field<int>(j, "missing", Errc::ConfigInvalid), Error);
}

TEST_CASE("jsonl reports the malformed line") {
  test::TempDir d("jsonl");
  write_file_atomic(d / "a.jsonl", "{\"a\":1}\n{\"a\":\n{\"a\":3}\n");
  try {
    read_jsonl(d / "a.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaViolation);
    CHECK(std::string(e.what()).find("a.jsonl:2:") != std::string::npos);
  }
}

TEST_CASE("interval algebra") {
  CHECK(intersects({0, 10}, {9, 20}));
  CHECK_FALSE(intersects({0, 10}, {10, 20}));
  CHECK(overlap_length({0, 10}, {5, 20}) == 5.0);
  const auto u = union_spans({{9, 20}, {0, 10}, {30, 31}});
  REQUIRE(u.size() == 2);
  CHECK(u[0] == Span{0, 20});
  CHECK(union_spans({{0, 10}, {10.4, 20}}, 0.5).size() == 1);
  CHECK(union_spans({{0, 10}, {10.4, 20}}, 0.3).size() == 2);
  const auto s = subtract_spans({{0, 100}}, {{10, 20}, {50, 60}});
  REQUIRE(s.size() == 3);
  CHECK(s[1] == Span{20, 50});
  CHECK(covered_length({{0, 10}, {5, 15}, {20, 21}}) == 16.0);
  CHECK(time_iou({0, 10}, {5, 15}) == doctest::Approx(5.0 / 15.0));
}

TEST_CASE("interval properties on random spans") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Span> a, holes;
    for (int i = 0; i < 6; ++i) {
      const double s = rng.uniform(0, 100);
      a.push_back({s, s + rng.uniform(0, 20)});
      const double h = rng.uniform(0, 100);
      holes.push_back({h, h + rng.uniform(0, 10)});
    }
    const auto u = union_spans(a);
    for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i - 1].end < u[i].start);
    const auto rest = subtract_spans(u, holes);
    for (const auto& r : rest)
      for (const auto& h : holes) CHECK_FALSE(intersects(r, h));
    // sampled membership oracle
    for (int k = 0; k < 50; ++k) {
      const double t = rng.uniform(0, 120);
      const bool in_a = std::any_of(a.begin(), a.end(), [&](const Span& s) { return t > s.start && t < s.end; });
      const bool in_h = std::any_of(holes.begin(), holes.end(), [&](const Span& s) { return t >= s.start && t <= s.end; });
      const bool in_rest = std::any_of(rest.begin(), rest.end(), [&](const Span& s) { return t > s.start && t < s.end; });
      if (in_a && !in_h) CHECK(in_rest);
      if (in_rest) CHECK((in_a && !in_h));
    }
  }
}

TEST_CASE("utc formatting round trip") {
  const auto t = parse_utc("2024-02-29T23:59:58.250Z");
  CHECK(format_utc(t) == "2024-02-29T23:59:58.250Z");
  CHECK(format_utc(parse_utc("1970-01-01T00:00:00Z")) == "1970-01-01T00:00:00.000Z");
  CHECK(parse_utc("2024-01-01T00:00:01Z").time_since_epoch().count() == 1704067201000LL);
  CHECK_THROWS_AS(parse_utc("yesterday"), Error);
  SteppingClock c(t);
  c.advance(std::chrono::milliseconds(1750));
  CHECK(format_utc(c.as_clock()()) == "2024-03-01T00:00:00.000Z");
}

TEST_CASE("rng is reproducible") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const auto k = c.uniform_index(7);
    CHECK(k < 7);
    const double u = c.uniform01();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("parallel_map keeps order and rethrows") {
  const auto out = parallel_map(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) fail(Errc::IoFailure, "boom");
                               }),
                  Error);
}

TEST_CASE("ppm and wav round trip") {
  test::TempDir d("media");
  Image img(5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) img.set(x, y, static_cast<std::uint8_t>(x * 40), static_cast<std::uint8_t>(y * 80), 7);
  write_ppm(d / "a.ppm", img);
  const Image back = read_ppm(d / "a.ppm");
  CHECK(back.width == 5);
  CHECK(back.rgb == img.rgb);

  PcmAudio a;
  a.sample_rate = 16000;
  a.samples = {0, 1, -1, 32767, -32768, 1234};
  write_wav(d / "a.wav", a);
  const PcmAudio b = read_wav(d / "a.wav");
  CHECK(b.sample_rate == 16000);
  CHECK(b.samples == a.samples);
  CHECK(read_file(d / "a.wav").size() == 44 + 12);
  const auto n = b.normalized();
  CHECK(n[4] == -1.0f);

  write_frame_index(d.path(), {{0, 0.0}, {1, 0.5}, {2, 1.0}});
  write_ppm(frame_path(d.path(), 0), img);
  write_ppm(frame_path(d.path(), 1), img);
  write_ppm(frame_path(d.path(), 2), img);
  const FrameSequence seq(d.path());
  CHECK(seq.size() == 3);
  CHECK(seq.fps() == doctest::Approx(2.0));
  CHECK(seq.duration() == doctest::Approx(1.5));
  CHECK(seq.in_window(0.5, 1.0).size() == 1);
  CHECK(seq.load(2).t_seconds == 1.0);
}

TEST_CASE("tree digest tracks content and names") {
  test::TempDir d("tree");
  write_file_atomic(d / "a.txt", "1");
  std::filesystem::create_directories(d / "sub");
  write_file_atomic(d / "sub/b.txt", "2");
  const auto h1 = tree_digest(d.path());
  write_file_atomic(d / "sub/b.txt", "3");
  const auto h2 = tree_digest(d.path());
  CHECK(h1 != h2);
  write_file_atomic(d / "sub/b.txt", "2");
  CHECK(tree_digest(d.path()) == h1);
}
