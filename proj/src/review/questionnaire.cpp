#include "gaze/review/questionnaire.hpp"

#include <algorithm>
#include <set>

#include "gaze/detect/pii.hpp"

namespace gaze::review {

const std::vector<std::string>& metadata_topics() {
  static const std::vector<std::string> t{"domain", "activity", "specific_activity", "participants", "room", "lighting"};
  return t;
}

const std::vector<std::string>& compliance_topics() {
  static const std::vector<std::string> t{"signal", "pii", "copyright", "minors", "nudity", "sensitive_topics"};
  return t;
}

std::optional<int> parse_mmss(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || text.size() - colon != 3) return std::nullopt;
  int minutes = 0;
  for (std::size_t i = 0; i < colon; ++i) {
    if (text[i] < '0' || text[i] > '9' || i > 5) return std::nullopt;
    minutes = minutes * 10 + (text[i] - '0');
  }
  const char a = text[colon + 1], b = text[colon + 2];
  if (a < '0' || a > '5' || b < '0' || b > '9') return std::nullopt;
  return minutes * 60 + (a - '0') * 10 + (b - '0');
}

namespace {

bool is_answer(const Json& v) { return v.is_string() && (v == "yes" || v == "no"); }

void check_section(const Json& q, const char* name, const std::vector<std::string>& topics,
                   std::vector<std::string>& out) {
  if (!q.contains(name) || !q.at(name).is_object()) {
    out.push_back(std::string(name) + ": missing section");
    return;
  }
  const Json& sec = q.at(name);
  for (const auto& t : topics) {
    const std::string where = std::string(name) + "." + t;
    if (!sec.contains(t) || !sec.at(t).is_object()) {
      out.push_back(where + ": missing");
      continue;
    }
    for (const char* channel : {"video", "audio"})
      if (!sec.at(t).contains(channel) || !is_answer(sec.at(t).at(channel)))
        out.push_back(where + "." + channel + ": must be \"yes\" or \"no\"");
  }
  for (const auto& [k, v] : sec.items())
    if (std::find(topics.begin(), topics.end(), k) == topics.end()) out.push_back(std::string(name) + "." + k + ": unknown topic");
}

void check_interval(const Json& topic, const std::string& where, std::vector<std::string>& out) {
  const bool required = topic.value("video", "") == "yes";
  if (!topic.contains("video_interval") || topic.at("video_interval").is_null()) {
    if (required) out.push_back(where + ".video_interval: required when video is \"yes\"");
    return;
  }
  const Json& iv = topic.at("video_interval");
  if (!iv.is_object() || !iv.contains("start") || !iv.contains("end") || !iv.at("start").is_string() ||
      !iv.at("end").is_string()) {
    out.push_back(where + ".video_interval: needs start and end as MM:SS");
    return;
  }
  const auto s = parse_mmss(iv.at("start").get<std::string>());
  const auto e = parse_mmss(iv.at("end").get<std::string>());
  if (!s || !e) {
    out.push_back(where + ".video_interval: times must be MM:SS");
    return;
  }
  if (*s > *e) out.push_back(where + ".video_interval: start after end");
}

}  // namespace

std::vector<std::string> questionnaire_problems(const Json& q) {
  std::vector<std::string> out;
  if (!q.is_object()) return {"response must be an object"};
  check_section(q, "metadata", metadata_topics(), out);
  check_section(q, "compliance", compliance_topics(), out);
  if (q.contains("compliance") && q.at("compliance").is_object()) {
    const Json& c = q.at("compliance");
    for (const char* t : {"minors", "nudity"})
      if (c.contains(t) && c.at(t).is_object()) check_interval(c.at(t), std::string("compliance.") + t, out);
    if (c.contains("pii") && c.at("pii").is_object()) {
      const Json& pii = c.at("pii");
      const bool required = pii.value("audio", "") == "yes";
      const Json types = pii.value("audio_pii_types", Json::array());
      if (!types.is_array()) {
        out.push_back("compliance.pii.audio_pii_types: must be a list");
      } else {
        std::set<std::string> seen;
        for (const auto& t : types) {
          try {
            detect::pii_type_from_string(t.get<std::string>());
            if (!seen.insert(t.get<std::string>()).second) out.push_back("compliance.pii.audio_pii_types: duplicate entry");
          } catch (const std::exception&) {
            out.push_back("compliance.pii.audio_pii_types: unknown type " + t.dump());
          }
        }
        if (required && types.empty()) out.push_back("compliance.pii.audio_pii_types: required when audio is \"yes\"");
      }
    }
  }
  if (q.contains("comments")) {
    const Json& c = q.at("comments");
    if (!c.is_object()) {
      out.push_back("comments: must be an object");
    } else {
      for (const auto& [k, v] : c.items())
        if ((k != "video" && k != "audio") || !v.is_string()) out.push_back("comments." + k + ": must be video/audio text");
    }
  }
  for (const auto& [k, v] : q.items())
    if (k != "metadata" && k != "compliance" && k != "comments") out.push_back(k + ": unknown section");
  return out;
}

void validate_questionnaire(const Json& q) {
  const auto problems = questionnaire_problems(q);
  if (!problems.empty()) fail(Errc::QuestionnaireInvalid, problems.front());
}

Json questionnaire_template() {
  Json q{{"metadata", Json::object()}, {"compliance", Json::object()}, {"comments", {{"video", ""}, {"audio", ""}}}};
  for (const auto& t : metadata_topics()) q["metadata"][t] = {{"video", "no"}, {"audio", "no"}};
  for (const auto& t : compliance_topics()) q["compliance"][t] = {{"video", "no"}, {"audio", "no"}};
  q["compliance"]["pii"]["audio_pii_types"] = Json::array();
  return q;
}

}  // namespace gaze::review
