#include "gaze/detect/pii.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace gaze::detect {

std::string TranscriptSegment::text() const {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i].text;
  }
  return out;
}

Json to_json(const TranscriptSegment& s) {
  Json words = Json::array();
  for (const auto& w : s.words) words.push_back({{"text", w.text}, {"t_start", w.t_start}, {"t_end", w.t_end}});
  return Json{{"speaker", s.speaker},
              {"words", words},
              {"source", s.source == TranscriptSource::external ? "external" : "scripted"}};
}

TranscriptSegment transcript_from_json(const Json& j) {
  TranscriptSegment s;
  s.speaker = field_or<std::string>(j, "speaker", "S0", Errc::FixtureInvalid);
  const auto src = field_or<std::string>(j, "source", "scripted", Errc::FixtureInvalid);
  if (src != "scripted" && src != "external") fail(Errc::FixtureInvalid, "unknown transcript source '" + src + "'");
  s.source = src == "external" ? TranscriptSource::external : TranscriptSource::scripted;
  for (const auto& w : field<Json>(j, "words", Errc::FixtureInvalid)) {
    Word word{field<std::string>(w, "text", Errc::FixtureInvalid), field<double>(w, "t_start", Errc::FixtureInvalid),
              field<double>(w, "t_end", Errc::FixtureInvalid)};
    if (word.text.empty() || word.text.find(' ') != std::string::npos)
      fail(Errc::FixtureInvalid, "transcript words must be non-empty and contain no spaces");
    if (word.t_end < word.t_start) fail(Errc::FixtureInvalid, "word ends before it starts");
    if (!s.words.empty() && (word.t_start < s.words.back().t_start || word.t_end < s.words.back().t_end))
      fail(Errc::FixtureInvalid, "word times must be non-decreasing");
    s.words.push_back(std::move(word));
  }
  return s;
}

std::string_view to_string(PiiType t) {
  switch (t) {
    case PiiType::NAME: return "NAME";
    case PiiType::PHONE: return "PHONE";
    case PiiType::EMAIL: return "EMAIL";
    case PiiType::ADDRESS: return "ADDRESS";
    case PiiType::ID: return "ID";
    case PiiType::CUSTOM: return "CUSTOM";
  }
  return "CUSTOM";
}

PiiType pii_type_from_string(std::string_view s) {
  for (auto t : {PiiType::NAME, PiiType::PHONE, PiiType::EMAIL, PiiType::ADDRESS, PiiType::ID, PiiType::CUSTOM})
    if (to_string(t) == s) return t;
  fail(Errc::SchemaViolation, "unknown PII type '" + std::string(s) + "'");
}

std::string_view to_string(RedactionPlanKind k) {
  switch (k) {
    case RedactionPlanKind::mute_window: return "mute_window";
    case RedactionPlanKind::tone_replace: return "tone_replace";
    case RedactionPlanKind::text_overlay: return "text_overlay";
  }
  return "mute_window";
}

RedactionPlanKind redaction_plan_from_string(std::string_view s) {
  if (s == "mute_window") return RedactionPlanKind::mute_window;
  if (s == "tone_replace") return RedactionPlanKind::tone_replace;
  if (s == "text_overlay") return RedactionPlanKind::text_overlay;
  fail(Errc::PolicyInvalid, "unknown redaction plan '" + std::string(s) + "'");
}

void PiiPolicy::validate() const {
  if (!(pad_s >= 0.0)) fail(Errc::PolicyInvalid, "pad must be >= 0");
  for (const auto* dict : {&names, &addresses, &custom})
    for (const auto& entry : *dict) {
      const bool blank = std::all_of(entry.begin(), entry.end(), [](unsigned char c) { return std::isspace(c); });
      if (blank) fail(Errc::PolicyInvalid, "dictionary entries must be non-blank");
    }
}

Json to_json(const PiiPolicy& p) {
  return Json{{"names", p.names},
              {"addresses", p.addresses},
              {"custom", p.custom},
              {"pad_s", p.pad_s},
              {"plan", to_string(p.plan)}};
}

PiiPolicy pii_policy_from_json(const Json& j) {
  PiiPolicy p;
  if (!j.is_object()) fail(Errc::PolicyInvalid, "PII policy must be an object");
  p.names = field_or<std::vector<std::string>>(j, "names", {}, Errc::PolicyInvalid);
  p.addresses = field_or<std::vector<std::string>>(j, "addresses", {}, Errc::PolicyInvalid);
  p.custom = field_or<std::vector<std::string>>(j, "custom", {}, Errc::PolicyInvalid);
  p.pad_s = field_or<double>(j, "pad_s", p.pad_s, Errc::PolicyInvalid);
  p.plan = redaction_plan_from_string(field_or<std::string>(j, "plan", "mute_window", Errc::PolicyInvalid));
  p.validate();
  return p;
}

Json to_json(const PiiHit& h) {
  return Json{{"entity_type", to_string(h.entity_type)},
              {"segment", h.segment},
              {"char_start", h.char_start},
              {"char_end", h.char_end},
              {"text", h.text},
              {"word_span", {h.word_span.start, h.word_span.end}},
              {"confidence", h.confidence},
              {"redaction_plan", to_string(h.plan)},
              {"window", {h.window.start, h.window.end}}};
}

namespace {

struct Match {
  std::size_t begin, end;
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Match> regex_matches(const std::string& text, const std::regex& re) {
  std::vector<Match> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    const auto pos = static_cast<std::size_t>(it->position(0));
    const auto len = static_cast<std::size_t>(it->length(0));
    if (len > 0) out.push_back({pos, pos + len});
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Leftmost, then longest, non-overlapping whole-word matches.
std::vector<Match> dictionary_matches(const std::string& text, const std::vector<std::string>& dict) {
  if (dict.empty()) return {};
  const std::string hay = lower(text);
  std::vector<std::string> needles;
  for (const auto& d : dict) needles.push_back(lower(d));
  std::sort(needles.begin(), needles.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::vector<Match> out;
  std::size_t i = 0;
  while (i < hay.size()) {
    bool hit = false;
    if (i == 0 || !is_word_char(hay[i - 1])) {
      for (const auto& n : needles) {
        if (hay.compare(i, n.size(), n) != 0) continue;
        const std::size_t e = i + n.size();
        if (e < hay.size() && is_word_char(hay[e]) && is_word_char(n.back())) continue;
        out.push_back({i, e});
        i = e;
        hit = true;
        break;
      }
    }
    if (!hit) ++i;
  }
  return out;
}

const std::regex& email_re() {
  static const std::regex re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})");
  return re;
}
const std::regex& phone_re() {
  static const std::regex re(R"((\+\d{1,3}[ .-]?)?(\(\d{3}\)[ .-]?|\b\d{3}[.-])?\b\d{3}[.-]\d{4}\b)");
  return re;
}
const std::regex& id_re() {
  static const std::regex re(R"(\b(\d{3}-\d{2}-\d{4}|[A-Z]{1,3}\d{6,10})\b)");
  return re;
}

}  // namespace

std::vector<PiiHit> scan_pii(const std::vector<TranscriptSegment>& segments, const PiiPolicy& policy,
                             std::optional<Span> clip) {
  policy.validate();
  std::vector<PiiHit> hits;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto& seg = segments[si];
    const std::string text = seg.text();
    std::vector<std::pair<std::size_t, std::size_t>> word_chars;  // [begin, end) per word
    std::size_t pos = 0;
    for (const auto& w : seg.words) {
      word_chars.emplace_back(pos, pos + w.text.size());
      pos += w.text.size() + 1;
    }

    auto emit = [&](PiiType type, const std::vector<Match>& matches, double confidence) {
      for (const auto& m : matches) {
        PiiHit h;
        h.entity_type = type;
        h.segment = si;
        h.char_start = m.begin;
        h.char_end = m.end;
        h.text = text.substr(m.begin, m.end - m.begin);
        bool any = false;
        for (std::size_t wi = 0; wi < seg.words.size(); ++wi) {
          if (word_chars[wi].first >= m.end || word_chars[wi].second <= m.begin) continue;
          if (!any) h.word_span = {seg.words[wi].t_start, seg.words[wi].t_end};
          h.word_span.start = std::min(h.word_span.start, seg.words[wi].t_start);
          h.word_span.end = std::max(h.word_span.end, seg.words[wi].t_end);
          any = true;
        }
        if (!any) continue;
        h.confidence = confidence;
        h.plan = policy.plan;
        h.window = {h.word_span.start - policy.pad_s, h.word_span.end + policy.pad_s};
        if (clip) {
          h.window.start = std::max(h.window.start, clip->start);
          h.window.end = std::min(h.window.end, clip->end);
        }
        hits.push_back(std::move(h));
      }
    };

    emit(PiiType::EMAIL, regex_matches(text, email_re()), 0.99);
    emit(PiiType::PHONE, regex_matches(text, phone_re()), 0.9);
    emit(PiiType::ID, regex_matches(text, id_re()), 0.85);
    emit(PiiType::NAME, dictionary_matches(text, policy.names), 0.8);
    emit(PiiType::ADDRESS, dictionary_matches(text, policy.addresses), 0.8);
    emit(PiiType::CUSTOM, dictionary_matches(text, policy.custom), 0.8);
  }
  std::stable_sort(hits.begin(), hits.end(), [](const PiiHit& a, const PiiHit& b) {
    if (a.segment != b.segment) return a.segment < b.segment;
    if (a.char_start != b.char_start) return a.char_start < b.char_start;
    return a.entity_type < b.entity_type;
  });
  return hits;
}

AgeVerdict aggregate_track_age(const std::vector<double>& estimates, double adult_threshold) {
  if (estimates.empty()) fail(Errc::NoEstimates, "age aggregation needs at least one estimate");
  const double age = *std::min_element(estimates.begin(), estimates.end());
  return {age, age < adult_threshold};
}

}  // namespace gaze::detect
