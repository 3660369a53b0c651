#include "gaze/export/redaction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "gaze/core/digest.hpp"

namespace gaze::redact {

std::string_view to_string(PlanKind k) {
  switch (k) {
    case PlanKind::blur: return "blur";
    case PlanKind::mosaic: return "mosaic";
    case PlanKind::box: return "box";
    case PlanKind::mute: return "mute";
    case PlanKind::tone_replace: return "tone_replace";
    case PlanKind::text_overlay: return "text_overlay";
    case PlanKind::withhold: return "withhold";
  }
  return "blur";
}

PlanKind plan_kind_from_string(std::string_view s) {
  for (auto k : {PlanKind::blur, PlanKind::mosaic, PlanKind::box, PlanKind::mute, PlanKind::tone_replace,
                 PlanKind::text_overlay, PlanKind::withhold})
    if (to_string(k) == s) return k;
  fail(Errc::SchemaViolation, "unknown redaction kind '" + std::string(s) + "'");
}

bool is_visual(PlanKind k) {
  return k == PlanKind::blur || k == PlanKind::mosaic || k == PlanKind::box || k == PlanKind::text_overlay;
}

bool is_audio(PlanKind k) { return k == PlanKind::mute || k == PlanKind::tone_replace || k == PlanKind::text_overlay; }

Json to_json(const RedactionParams& p) {
  return Json{{"blur_radius", p.blur_radius},
              {"blur_passes", p.blur_passes},
              {"mosaic_cell", p.mosaic_cell},
              {"tone_hz", p.tone_hz},
              {"tone_dbfs", p.tone_dbfs}};
}

RedactionParams redaction_params_from_json(const Json& j) {
  RedactionParams p;
  p.blur_radius = field_or<int>(j, "blur_radius", p.blur_radius, Errc::ConfigInvalid);
  p.blur_passes = field_or<int>(j, "blur_passes", p.blur_passes, Errc::ConfigInvalid);
  p.mosaic_cell = field_or<int>(j, "mosaic_cell", p.mosaic_cell, Errc::ConfigInvalid);
  p.tone_hz = field_or<double>(j, "tone_hz", p.tone_hz, Errc::ConfigInvalid);
  p.tone_dbfs = field_or<double>(j, "tone_dbfs", p.tone_dbfs, Errc::ConfigInvalid);
  if (p.blur_radius < 0 || p.blur_passes < 1 || p.mosaic_cell < 1 || !(p.tone_hz > 0) || p.tone_dbfs > 0)
    fail(Errc::ConfigInvalid, "redaction parameters out of range");
  return p;
}

Json to_json(const RedactionPlan& p) {
  Json j{{"plan_id", p.plan_id},
         {"kind", to_string(p.kind)},
         {"t_start", p.span.start},
         {"t_end", p.span.end},
         {"params", to_json(p.params)}};
  j["view"] = p.view ? Json(std::string(segment::to_string(*p.view))) : Json(nullptr);
  j["box"] = p.box ? to_json(*p.box) : Json(nullptr);
  if (p.kind == PlanKind::text_overlay) j["text"] = p.text;
  return j;
}

RedactionPlan redaction_plan_from_json(const Json& j) {
  RedactionPlan p;
  p.plan_id = field<std::string>(j, "plan_id");
  p.kind = plan_kind_from_string(field<std::string>(j, "kind"));
  p.span = {field<double>(j, "t_start"), field<double>(j, "t_end")};
  if (j.contains("view") && !j.at("view").is_null()) p.view = segment::stream_view_from_string(field<std::string>(j, "view"));
  if (j.contains("box") && !j.at("box").is_null()) p.box = box_from_json(j.at("box"));
  p.text = field_or<std::string>(j, "text", "");
  if (j.contains("params")) p.params = redaction_params_from_json(j.at("params"));
  validate_plan(p);
  return p;
}

void validate_plan(const RedactionPlan& p) {
  if (!(p.span.start <= p.span.end)) fail(Errc::SchemaViolation, "plan " + p.plan_id + ": reversed span");
  if (is_visual(p.kind) && !p.box) fail(Errc::SchemaViolation, "plan " + p.plan_id + ": visual redaction needs geometry");
  if (!is_visual(p.kind) && (p.box || p.view))
    fail(Errc::SchemaViolation, "plan " + p.plan_id + ": " + std::string(to_string(p.kind)) + " takes no geometry");
}

PixelRect pixel_rect(const Box& box, int width, int height) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) return {};
  const auto clampi = [](double v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
  };
  PixelRect r;
  r.x0 = clampi(std::floor(box.x), 0, width);
  r.y0 = clampi(std::floor(box.y), 0, height);
  r.x1 = clampi(std::ceil(box.x + box.w), 0, width);
  r.y1 = clampi(std::ceil(box.y + box.h), 0, height);
  return r;
}

namespace {

using Owner = std::vector<int>;  // per pixel of the frame, index into plans or -1

// Separable box blur confined to the rectangle (edges replicate).
std::vector<std::uint8_t> blurred_rect(const Image& src, const PixelRect& r, int radius, int passes) {
  const int w = r.x1 - r.x0, h = r.y1 - r.y0;
  std::vector<double> buf(static_cast<std::size_t>(w) * h * 3), tmp(buf.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto px = src.pixel(r.x0 + x, r.y0 + y);
      for (int c = 0; c < 3; ++c) buf[(static_cast<std::size_t>(y) * w + x) * 3 + c] = px[c];
    }
  const double norm = 1.0 / (2 * radius + 1);
  const auto pass_1d = [&](int len, int lines, auto at) {
    for (int line = 0; line < lines; ++line)
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int k = -radius; k <= radius; ++k) sum += buf[at(line, std::clamp(k, 0, len - 1)) + c];
        for (int i = 0; i < len; ++i) {
          tmp[at(line, i) + c] = sum * norm;
          sum += buf[at(line, std::min(i + radius + 1, len - 1)) + c] - buf[at(line, std::max(i - radius, 0)) + c];
        }
      }
    buf.swap(tmp);
  };
  const auto row_major = [w](int line, int i) { return (static_cast<std::size_t>(line) * w + i) * 3; };
  const auto col_major = [w](int line, int i) { return (static_cast<std::size_t>(i) * w + line) * 3; };
  for (int p = 0; p < passes; ++p) {
    pass_1d(w, h, row_major);
    pass_1d(h, w, col_major);
  }
  std::vector<std::uint8_t> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(buf[i]), 0L, 255L));
  return out;
}

std::array<std::uint8_t, 3> overlay_color(const std::string& text) {
  const std::string h = sha256_hex(text);
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<std::uint8_t>(std::stoi(h.substr(2 * c, 2), nullptr, 16));
  return rgb;
}

void render_owned(const Image& src, Image& dst, const RedactionPlan& plan, const PixelRect& r, const Owner& owner, int me) {
  const auto owned = [&](int x, int y) { return owner[static_cast<std::size_t>(y) * src.width + x] == me; };
  switch (plan.kind) {
    case PlanKind::box:
    case PlanKind::text_overlay: {
      const std::array<std::uint8_t, 3> fill =
          plan.kind == PlanKind::box ? std::array<std::uint8_t, 3>{0, 0, 0} : overlay_color(plan.text);
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
          if (owned(x, y)) dst.set(x, y, fill[0], fill[1], fill[2]);
      break;
    }
    case PlanKind::mosaic: {
      const int cell = plan.params.mosaic_cell;
      for (int cy = r.y0; cy < r.y1; cy += cell)
        for (int cx = r.x0; cx < r.x1; cx += cell) {
          const int ex = std::min(cx + cell, r.x1), ey = std::min(cy + cell, r.y1);
          std::array<long, 3> sum{0, 0, 0};
          for (int y = cy; y < ey; ++y)
            for (int x = cx; x < ex; ++x) {
              const auto px = src.pixel(x, y);
              for (int c = 0; c < 3; ++c) sum[c] += px[c];
            }
          const long n = static_cast<long>(ex - cx) * (ey - cy);
          std::array<std::uint8_t, 3> mean{};
          for (int c = 0; c < 3; ++c) mean[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
          for (int y = cy; y < ey; ++y)
            for (int x = cx; x < ex; ++x)
              if (owned(x, y)) dst.set(x, y, mean[0], mean[1], mean[2]);
        }
      break;
    }
    case PlanKind::blur: {
      const auto blurred = blurred_rect(src, r, plan.params.blur_radius, plan.params.blur_passes);
      const int w = r.x1 - r.x0;
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
          if (owned(x, y)) {
            const std::size_t i = (static_cast<std::size_t>(y - r.y0) * w + (x - r.x0)) * 3;
            dst.set(x, y, blurred[i], blurred[i + 1], blurred[i + 2]);
          }
      break;
    }
    default:
      break;
  }
}

}  // namespace

Image render_visual_plans(const Image& frame, std::vector<const RedactionPlan*> plans) {
  plans.erase(std::remove_if(plans.begin(), plans.end(),
                             [](const RedactionPlan* p) { return !is_visual(p->kind) || !p->box; }),
              plans.end());
  std::sort(plans.begin(), plans.end(), [](const RedactionPlan* a, const RedactionPlan* b) { return a->plan_id < b->plan_id; });
  std::vector<PixelRect> rects;
  for (const auto* p : plans) rects.push_back(pixel_rect(*p->box, frame.width, frame.height));
  if (std::all_of(rects.begin(), rects.end(), [](const PixelRect& r) { return r.empty(); })) return frame;

  Owner owner(static_cast<std::size_t>(frame.width) * frame.height, -1);
  for (int i = static_cast<int>(plans.size()) - 1; i >= 0; --i) {
    const auto& r = rects[i];
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) owner[static_cast<std::size_t>(y) * frame.width + x] = i;
  }
  Image out = frame;
  for (std::size_t i = 0; i < plans.size(); ++i)
    if (!rects[i].empty()) render_owned(frame, out, *plans[i], rects[i], owner, static_cast<int>(i));
  return out;
}

Image render_visual_redaction(const Image& frame, const RedactionPlan& plan) { return render_visual_plans(frame, {&plan}); }

std::pair<std::size_t, std::size_t> sample_range(const Span& span, int sample_rate, std::size_t n_samples) {
  if (!(span.start >= 0.0) || !(span.end >= span.start))
    fail(Errc::SpanOutOfRange, "span must satisfy 0 <= t_start <= t_end");
  const auto b = static_cast<std::size_t>(std::llround(span.start * sample_rate));
  const auto e = static_cast<std::size_t>(std::llround(span.end * sample_rate));
  if (e > n_samples) fail(Errc::SpanOutOfRange, "span ends after the audio stream");
  return {b, e};
}

PcmAudio render_audio_redaction(const PcmAudio& audio, const RedactionPlan& plan) {
  if (!is_audio(plan.kind)) fail(Errc::SchemaViolation, "plan " + plan.plan_id + " is not an audio redaction");
  const auto [b, e] = sample_range(plan.span, audio.sample_rate, audio.samples.size());
  PcmAudio out = audio;
  if (plan.kind == PlanKind::tone_replace) {
    const double peak = std::pow(10.0, plan.params.tone_dbfs / 20.0) * std::numbers::sqrt2 * 32768.0;
    const double w = 2.0 * std::numbers::pi * plan.params.tone_hz / audio.sample_rate;
    for (std::size_t i = b; i < e; ++i) {
      const double v = std::round(peak * std::sin(w * static_cast<double>(i - b)));
      out.samples[i] = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
    }
  } else {
    std::fill(out.samples.begin() + static_cast<std::ptrdiff_t>(b), out.samples.begin() + static_cast<std::ptrdiff_t>(e), 0);
  }
  return out;
}

Json to_json(const MappingSegment& m) {
  return Json{{"raw", {m.raw.start, m.raw.end}},
              {"export", m.exported ? Json::array({m.exported->start, m.exported->end}) : Json("WITHHELD")},
              {"plan_ids", m.plan_ids}};
}

MappingSegment mapping_segment_from_json(const Json& j) {
  MappingSegment m;
  const auto raw = field<std::vector<double>>(j, "raw");
  if (raw.size() != 2) fail(Errc::SchemaViolation, "mapping raw span needs two numbers");
  m.raw = {raw[0], raw[1]};
  const Json& ex = j.at("export");
  if (ex.is_string()) {
    if (ex != "WITHHELD") fail(Errc::SchemaViolation, "mapping export must be a span or WITHHELD");
  } else {
    const auto v = ex.get<std::vector<double>>();
    if (v.size() != 2) fail(Errc::SchemaViolation, "mapping export span needs two numbers");
    m.exported = Span{v[0], v[1]};
  }
  m.plan_ids = field<std::vector<std::string>>(j, "plan_ids");
  return m;
}

std::vector<Span> withheld_spans(const std::vector<RedactionPlan>& plans) {
  std::vector<Span> spans;
  for (const auto& p : plans)
    if (p.kind == PlanKind::withhold && p.span.end > p.span.start) spans.push_back(p.span);
  return union_spans(std::move(spans));
}

std::vector<MappingSegment> build_mapping(const std::vector<RedactionPlan>& plans, double duration) {
  if (!(duration > 0.0)) fail(Errc::ZeroDuration, "mapping needs a positive duration");
  std::vector<double> cuts{0.0, duration};
  for (const auto& p : plans)
    for (double t : {p.span.start, p.span.end})
      if (t > 0.0 && t < duration) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto withheld = withheld_spans(plans);

  std::vector<MappingSegment> out;
  double cursor = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    MappingSegment m;
    m.raw = {cuts[i], cuts[i + 1]};
    for (const auto& p : plans)
      if (intersects(p.span, m.raw)) m.plan_ids.push_back(p.plan_id);
    std::sort(m.plan_ids.begin(), m.plan_ids.end());
    const bool gone = std::any_of(withheld.begin(), withheld.end(), [&](const Span& w) { return intersects(w, m.raw); });
    if (!gone) {
      m.exported = Span{cursor, cursor + m.raw.length()};
      cursor = m.exported->end;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::optional<double> export_to_raw(const std::vector<MappingSegment>& mapping, double t_export) {
  for (const auto& m : mapping)
    if (m.exported && t_export >= m.exported->start && t_export < m.exported->end)
      return m.raw.start + (t_export - m.exported->start);
  for (auto it = mapping.rbegin(); it != mapping.rend(); ++it)
    if (it->exported) {
      if (t_export == it->exported->end) return it->raw.end;
      break;
    }
  return std::nullopt;
}

std::optional<double> raw_to_export(const std::vector<MappingSegment>& mapping, double t_raw) {
  for (const auto& m : mapping) {
    if (t_raw < m.raw.start || t_raw > m.raw.end) continue;
    if (t_raw == m.raw.end && &m != &mapping.back()) continue;
    if (!m.exported) return std::nullopt;
    return m.exported->start + (t_raw - m.raw.start);
  }
  return std::nullopt;
}

}  // namespace gaze::redact
