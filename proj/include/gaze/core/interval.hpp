#pragma once

#include <algorithm>
#include <vector>

namespace gaze {

/// Closed time span in seconds.
struct Span {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// True when the spans share an interior point; touching endpoints do not count.
inline bool intersects(const Span& a, const Span& b) { return a.start < b.end && b.start < a.end; }

inline double overlap_length(const Span& a, const Span& b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

/// Temporal IoU; two identical zero-length spans score 1.
double time_iou(const Span& a, const Span& b);

/// Sorted union; spans separated by at most `gap` are joined.
std::vector<Span> union_spans(std::vector<Span> spans, double gap = 0.0);

/// Parts of `from` not covered by any of `holes`. Output is sorted and disjoint.
std::vector<Span> subtract_spans(const std::vector<Span>& from, const std::vector<Span>& holes);

/// Length of the union.
double covered_length(const std::vector<Span>& spans);

}  // namespace gaze
