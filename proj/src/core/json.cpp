#include "gaze/core/json.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gaze {

namespace fs = std::filesystem;

std::string canonical_dump(const Json& value) { return value.dump(); }

double round6(double x) {
  if (!std::isfinite(x)) return x;
  double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

Json rounded(const Json& value) {
  switch (value.type()) {
    case Json::value_t::number_float: return round6(value.get<double>());
    case Json::value_t::object: {
      Json out = Json::object();
      for (auto it = value.begin(); it != value.end(); ++it) out[it.key()] = rounded(it.value());
      return out;
    }
    case Json::value_t::array: {
      Json out = Json::array();
      for (const auto& v : value) out.push_back(rounded(v));
      return out;
    }
    default: return value;
  }
}

std::string canonical_line(const Json& value) { return canonical_dump(rounded(value)); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<unsigned long> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::IoFailure, "short write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(Errc::IoFailure, "rename " + tmp.string() + ": " + ec.message());
}

Json load_json(const fs::path& path) {
  std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(Errc::SchemaViolation, path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const Json& value) {
  write_file_atomic(path, canonical_dump(value) + "\n");
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::string text = read_file(path);
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      fail(Errc::SchemaViolation, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<Json>& lines) {
  std::string bytes;
  for (const auto& j : lines) {
    bytes += canonical_line(j);
    bytes += '\n';
  }
  write_file_atomic(path, bytes);
}

}  // namespace gaze
