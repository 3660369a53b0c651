#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaze/core/image.hpp"

namespace gaze {

// Binary PPM (P6, maxval 255).
Image read_ppm(const std::filesystem::path& path);
std::string ppm_bytes(const Image& img);
void write_ppm(const std::filesystem::path& path, const Image& img);

struct FrameEntry {
  int index = 0;
  double t_seconds = 0.0;
};

/// <dir>/frame_%06d.ppm
std::filesystem::path frame_path(const std::filesystem::path& dir, int index);

/// frames.json: [{"index": n, "t_seconds": t}, ...], strictly increasing in both.
std::vector<FrameEntry> read_frame_index(const std::filesystem::path& dir);
void write_frame_index(const std::filesystem::path& dir, const std::vector<FrameEntry>& entries);

/// A frame directory on disk; frames are loaded on demand.
class FrameSequence {
 public:
  explicit FrameSequence(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<FrameEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Frame load(std::size_t i) const;
  double fps() const;
  double duration() const;

  /// Positions in entries() whose timestamps fall in [t0, t1).
  std::vector<std::size_t> in_window(double t0, double t1) const;

 private:
  std::filesystem::path dir_;
  std::vector<FrameEntry> entries_;
};

/// Mono 16-bit PCM.
struct PcmAudio {
  int sample_rate = 16000;
  std::vector<std::int16_t> samples;

  double duration() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
  /// Samples in [begin, end) scaled to [-1, 1) by 1/32768.
  std::vector<float> normalized(std::size_t begin, std::size_t end) const;
  std::vector<float> normalized() const { return normalized(0, samples.size()); }
};

PcmAudio read_wav(const std::filesystem::path& path);
std::string wav_bytes(const PcmAudio& audio);
void write_wav(const std::filesystem::path& path, const PcmAudio& audio);

}  // namespace gaze
