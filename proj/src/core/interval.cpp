#include "gaze/core/interval.hpp"

namespace gaze {

double time_iou(const Span& a, const Span& b) {
  const double inter = overlap_length(a, b);
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

std::vector<Span> union_spans(std::vector<Span> spans, double gap) {
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start || (a.start == b.start && a.end < b.end); });
  std::vector<Span> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start - out.back().end <= gap) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<Span> subtract_spans(const std::vector<Span>& from, const std::vector<Span>& holes) {
  const auto cut = union_spans(holes);
  std::vector<Span> out;
  for (const auto& s : union_spans(from)) {
    double cursor = s.start;
    for (const auto& h : cut) {
      if (h.end <= cursor) continue;
      if (h.start >= s.end) break;
      if (h.start > cursor) out.push_back({cursor, h.start});
      cursor = std::max(cursor, h.end);
      if (cursor >= s.end) break;
    }
    if (cursor < s.end) out.push_back({cursor, s.end});
  }
  return out;
}

double covered_length(const std::vector<Span>& spans) {
  double total = 0.0;
  for (const auto& s : union_spans(spans)) total += s.length();
  return total;
}

}  // namespace gaze
