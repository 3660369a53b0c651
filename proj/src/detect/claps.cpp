#include "gaze/detect/claps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaze/core/error.hpp"

namespace gaze::detect {

using cd = std::complex<double>;

std::array<Biquad, 2> design_bandpass(double low_hz, double high_hz, double sample_rate) {
  if (!(low_hz > 0.0 && high_hz > low_hz && high_hz < sample_rate / 2.0))
    fail(Errc::BadConfig, "band edges must satisfy 0 < low < high < Nyquist");
  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * sample_rate;
  const double w1 = fs2 * std::tan(pi * low_hz / sample_rate);
  const double w2 = fs2 * std::tan(pi * high_hz / sample_rate);
  const double bw = w2 - w1;
  const double wo = std::sqrt(w1 * w2);

  // Analog order-2 Butterworth prototype poles -exp(+-j pi/4), unity gain.
  const std::array<cd, 2> proto{-std::exp(cd(0, -pi / 4)), -std::exp(cd(0, pi / 4))};

  // Low-pass to band-pass: each prototype pole splits into two; two zeros at s = 0.
  std::array<cd, 4> p;
  for (int i = 0; i < 2; ++i) {
    const cd pl = proto[i] * (bw / 2.0);
    const cd root = std::sqrt(pl * pl - wo * wo);
    p[i] = pl + root;
    p[i + 2] = pl - root;
  }
  const double k_analog = bw * bw;

  // Bilinear transform: zeros at s = 0 map to z = 1; the two zeros at infinity map to z = -1.
  std::array<cd, 4> pz;
  cd den = 1.0;
  for (int i = 0; i < 4; ++i) {
    pz[i] = (fs2 + p[i]) / (fs2 - p[i]);
    den *= (fs2 - p[i]);
  }
  const double k_digital = k_analog * (fs2 * fs2 / den).real();

  // Pair conjugate poles; the pair in the left half of the z plane takes the
  // zeros at -1 and the overall gain.
  std::vector<cd> upper;
  for (const auto& z : pz)
    if (z.imag() >= 0.0) upper.push_back(z);
  if (upper.size() != 2) fail(Errc::BadConfig, "unexpected band-pass pole layout");
  std::sort(upper.begin(), upper.end(), [](const cd& a, const cd& b) { return a.real() < b.real(); });

  auto section = [](const cd& pole, double b0, double b1, double b2) {
    return Biquad{b0, b1, b2, -2.0 * pole.real(), std::norm(pole)};
  };
  return {section(upper[0], k_digital, 2.0 * k_digital, k_digital), section(upper[1], 1.0, -2.0, 1.0)};
}

double magnitude_response(std::span<const Biquad> sos, double freq_hz, double sample_rate) {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  const cd z1 = std::exp(cd(0, -w));
  const cd z2 = z1 * z1;
  cd h = 1.0;
  for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const float> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sos) {
    double z1 = 0.0, z2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

namespace {

std::array<Biquad, 2> filter_for(int sample_rate, const ClapParams& params) {
  if (sample_rate < 8000) fail(Errc::SampleRateTooLow, "clap detection needs >= 8 kHz audio");
  const double high = std::min(params.band_high_hz, 0.45 * sample_rate);
  return design_bandpass(params.band_low_hz, high, sample_rate);
}

}  // namespace

std::vector<double> energy_envelope(std::span<const float> samples, int sample_rate, const ClapParams& params) {
  const auto sos = filter_for(sample_rate, params);
  const auto y = sos_filter(sos, samples);
  const auto hop = static_cast<std::size_t>(std::max(1L, std::lround(params.hop_s * sample_rate)));
  std::vector<double> env;
  for (std::size_t start = 0; start + hop <= y.size(); start += hop) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + hop; ++i) acc += y[i] * y[i];
    env.push_back(acc / static_cast<double>(hop));
  }
  return env;
}

std::vector<ClapAnchor> detect_claps(std::span<const float> samples, int sample_rate, const ClapParams& params) {
  const auto env = energy_envelope(samples, sample_rate, params);
  if (env.size() < 3) return {};
  double mean = 0.0;
  for (double e : env) mean += e;
  mean /= static_cast<double>(env.size());
  double var = 0.0;
  for (double e : env) var += (e - mean) * (e - mean);
  const double sd = std::sqrt(var / static_cast<double>(env.size()));
  if (!(sd > 0.0)) return {};
  const double threshold = mean + params.k_sigma * sd;
  const double hop_s = static_cast<double>(std::max(1L, std::lround(params.hop_s * sample_rate))) / sample_rate;

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (env[i] <= threshold) continue;
    const bool left = i == 0 || env[i] >= env[i - 1];
    const bool right = i + 1 == env.size() || env[i] > env[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return env[a] > env[b]; });
  std::vector<std::size_t> kept;
  for (auto i : peaks) {
    bool clear = true;
    for (auto k : kept) {
      if (std::abs(static_cast<double>(i) - static_cast<double>(k)) * hop_s < params.min_gap_s) {
        clear = false;
        break;
      }
    }
    if (clear) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<ClapAnchor> out;
  for (auto i : kept) out.push_back({(static_cast<double>(i) + 0.5) * hop_s, env[i], (env[i] - mean) / sd});
  return out;
}

}  // namespace gaze::detect
