#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaze/core/image.hpp"
#include "gaze/core/interval.hpp"
#include "gaze/core/media_io.hpp"
#include "gaze/segment/segmenter.hpp"

namespace gaze::redact {

enum class PlanKind { blur, mosaic, box, mute, tone_replace, text_overlay, withhold };
std::string_view to_string(PlanKind k);
PlanKind plan_kind_from_string(std::string_view s);

/// Kinds rendered into frames. text_overlay is both: a bar on screen and muted audio.
bool is_visual(PlanKind k);
bool is_audio(PlanKind k);

struct RedactionParams {
  int blur_radius = 9;
  int blur_passes = 3;
  int mosaic_cell = 16;
  double tone_hz = 1000.0;
  double tone_dbfs = -20.0;  // RMS level
};

Json to_json(const RedactionParams& p);
RedactionParams redaction_params_from_json(const Json& j);

struct RedactionPlan {
  std::string plan_id;
  PlanKind kind = PlanKind::blur;
  Span span;
  std::optional<segment::StreamView> view;  // visual kinds
  std::optional<Box> box;                   // visual kinds
  std::string text;                         // text_overlay
  RedactionParams params;
};

Json to_json(const RedactionPlan& p);
RedactionPlan redaction_plan_from_json(const Json& j);

/// SchemaViolation when a visual kind lacks geometry, an audio-only kind or
/// withhold carries some, or the span is reversed.
void validate_plan(const RedactionPlan& p);

/// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Smallest pixel rectangle covering the box, clipped to the raster.
PixelRect pixel_rect(const Box& box, int width, int height);

/// Renders one plan. Degenerate geometry returns the input unchanged.
Image render_visual_redaction(const Image& frame, const RedactionPlan& plan);

/// Renders several plans on one frame. Each pixel belongs to the covering plan
/// with the smallest plan_id and takes that plan's output computed from the
/// untouched input, so the result does not depend on the order of `plans`.
Image render_visual_plans(const Image& frame, std::vector<const RedactionPlan*> plans);

/// Sample indices [round(t0*sr), round(t1*sr)). Throws SpanOutOfRange.
std::pair<std::size_t, std::size_t> sample_range(const Span& span, int sample_rate, std::size_t n_samples);

/// mute / text_overlay zero the span; tone_replace writes a sine at the plan's
/// frequency and RMS level. Samples outside the span are untouched.
PcmAudio render_audio_redaction(const PcmAudio& audio, const RedactionPlan& plan);

struct MappingSegment {
  Span raw;
  std::optional<Span> exported;  // nullopt: withheld
  std::vector<std::string> plan_ids;
};

Json to_json(const MappingSegment& m);
MappingSegment mapping_segment_from_json(const Json& j);

/// Partition of [0, duration] at every plan boundary, with withheld spans
/// removed from export time.
std::vector<MappingSegment> build_mapping(const std::vector<RedactionPlan>& plans, double duration);

/// Raw time of an export time; nullopt past the end of the export.
std::optional<double> export_to_raw(const std::vector<MappingSegment>& mapping, double t_export);

/// Export time of a raw time; nullopt when withheld.
std::optional<double> raw_to_export(const std::vector<MappingSegment>& mapping, double t_raw);

/// Union of withhold spans.
std::vector<Span> withheld_spans(const std::vector<RedactionPlan>& plans);

}  // namespace gaze::redact
