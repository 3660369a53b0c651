#include "gaze/core/media_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace gaze {

namespace fs = std::filesystem;

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::string& data, std::size_t& pos) {
  for (;;) {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  return data.substr(start, pos - start);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}
std::uint32_t get_u32(const std::string& d, std::size_t p) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(d[p])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(d[p + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(d[p + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(d[p + 3])) << 24;
}
std::uint16_t get_u16(const std::string& d, std::size_t p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(d[p]) | static_cast<unsigned char>(d[p + 1]) << 8);
}

}  // namespace

Image read_ppm(const fs::path& path) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  if (ppm_token(data, pos) != "P6") fail(Errc::IoFailure, path.string() + ": not a P6 pixmap");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(data, pos));
    h = std::stoi(ppm_token(data, pos));
    maxval = std::stoi(ppm_token(data, pos));
  } catch (const std::exception&) {
    fail(Errc::IoFailure, path.string() + ": bad pixmap header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) fail(Errc::IoFailure, path.string() + ": unsupported pixmap");
  ++pos;  // single whitespace byte after maxval
  Image img(w, h);
  if (data.size() < pos + img.rgb.size()) fail(Errc::IoFailure, path.string() + ": truncated pixmap");
  std::memcpy(img.rgb.data(), data.data() + pos, img.rgb.size());
  return img;
}

std::string ppm_bytes(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

void write_ppm(const fs::path& path, const Image& img) { write_file_atomic(path, ppm_bytes(img)); }

fs::path frame_path(const fs::path& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06d.ppm", index);
  return dir / name;
}

std::vector<FrameEntry> read_frame_index(const fs::path& dir) {
  const Json j = load_json(dir / "frames.json");
  if (!j.is_array()) fail(Errc::SchemaViolation, (dir / "frames.json").string() + ": expected an array");
  std::vector<FrameEntry> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    FrameEntry fe{field<int>(e, "index"), field<double>(e, "t_seconds")};
    if (!out.empty() && (fe.index <= out.back().index || fe.t_seconds <= out.back().t_seconds))
      fail(Errc::UnorderedInput, (dir / "frames.json").string() + ": frames out of order");
    out.push_back(fe);
  }
  return out;
}

void write_frame_index(const fs::path& dir, const std::vector<FrameEntry>& entries) {
  Json j = Json::array();
  for (const auto& e : entries) j.push_back({{"index", e.index}, {"t_seconds", round6(e.t_seconds)}});
  write_file_atomic(dir / "frames.json", canonical_dump(j) + "\n");
}

FrameSequence::FrameSequence(fs::path dir) : dir_(std::move(dir)), entries_(read_frame_index(dir_)) {}

Frame FrameSequence::load(std::size_t i) const {
  const auto& e = entries_.at(i);
  return Frame{read_ppm(frame_path(dir_, e.index)), e.t_seconds};
}

double FrameSequence::fps() const {
  if (entries_.size() < 2) return 1.0;
  const double span = entries_.back().t_seconds - entries_.front().t_seconds;
  return span > 0 ? static_cast<double>(entries_.size() - 1) / span : 1.0;
}

double FrameSequence::duration() const {
  if (entries_.empty()) return 0.0;
  return entries_.back().t_seconds + 1.0 / fps();
}

std::vector<std::size_t> FrameSequence::in_window(double t0, double t1) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].t_seconds >= t0 && entries_[i].t_seconds < t1) out.push_back(i);
  return out;
}

std::vector<float> PcmAudio::normalized(std::size_t begin, std::size_t end) const {
  end = std::min(end, samples.size());
  begin = std::min(begin, end);
  std::vector<float> out(end - begin);
  for (std::size_t i = begin; i < end; ++i) out[i - begin] = static_cast<float>(samples[i]) / 32768.0f;
  return out;
}

PcmAudio read_wav(const fs::path& path) {
  const std::string d = read_file(path);
  if (d.size() < 12 || d.compare(0, 4, "RIFF") != 0 || d.compare(8, 4, "WAVE") != 0)
    fail(Errc::IoFailure, path.string() + ": not a RIFF/WAVE file");
  PcmAudio audio;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= d.size()) {
    const std::string id = d.substr(pos, 4);
    const std::uint32_t size = get_u32(d, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > d.size()) fail(Errc::IoFailure, path.string() + ": truncated chunk " + id);
    if (id == "fmt ") {
      const auto format = get_u16(d, body), channels = get_u16(d, body + 2), bits = get_u16(d, body + 14);
      if (format != 1 || channels != 1 || bits != 16)
        fail(Errc::IoFailure, path.string() + ": only mono 16-bit PCM is supported");
      audio.sample_rate = static_cast<int>(get_u32(d, body + 4));
      have_fmt = true;
    } else if (id == "data") {
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i)
        audio.samples[i] = static_cast<std::int16_t>(get_u16(d, body + 2 * i));
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) fail(Errc::IoFailure, path.string() + ": missing fmt or data chunk");
  return audio;
}

std::string wav_bytes(const PcmAudio& audio) {
  const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out = "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_size);
  for (auto s : audio.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

void write_wav(const fs::path& path, const PcmAudio& audio) { write_file_atomic(path, wav_bytes(audio)); }

}  // namespace gaze
