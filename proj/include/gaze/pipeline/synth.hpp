#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaze/core/interval.hpp"

namespace gaze::pipeline {

/// A deterministic raw session: a moving target over a textured scene, tone
/// plus noise audio with clap bursts, one frozen (or black) and silent idle stretch, and
/// fixtures that flag a minor, an NSFW span and spoken PII.
struct SynthOptions {
  std::string session_id = "synth-001";
  double duration = 180.0;
  double fps = 2.0;
  bool spherical = false;
  int width = 64;  // rectilinear frame size
  int height = 48;
  int fisheye_height = 96;  // dual-fisheye raster is 2h x h
  int view_width = 256;     // size of the rendered rectilinear views fixtures refer to when spherical
  int view_height = 256;
  bool audio = true;
  int sample_rate = 16000;
  Span idle{150.0, 165.0};
  bool black_idle = false;  // otherwise the picture freezes
  std::vector<double> claps{4.0, 92.0};
  bool consent = true;
  bool review_script = true;
  bool questionnaire = true;
  std::uint64_t seed = 1;
};

void write_synthetic_session(const std::filesystem::path& raw_dir, const SynthOptions& opt);

}  // namespace gaze::pipeline
