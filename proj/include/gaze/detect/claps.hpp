#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace gaze::detect {

/// Normalized biquad: b0 b1 b2 / 1 a1 a2.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

/// Fourth-order Butterworth band-pass as two biquads (order-2 prototype,
/// low-pass to band-pass transform, bilinear transform with prewarping).
std::array<Biquad, 2> design_bandpass(double low_hz, double high_hz, double sample_rate);

/// |H(e^{j w})| of a cascade at `freq_hz`.
double magnitude_response(std::span<const Biquad> sos, double freq_hz, double sample_rate);

/// Direct form II transposed, zero initial state.
std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const float> x);

struct ClapParams {
  double band_low_hz = 2000.0;
  double band_high_hz = 6000.0;
  double min_gap_s = 0.3;
  double k_sigma = 4.0;
  double hop_s = 0.010;
};

struct ClapAnchor {
  double t = 0.0;       // frame center, seconds from the start of `samples`
  double energy = 0.0;  // envelope value at the peak
  double z = 0.0;       // (energy - mean) / std
};

/// Mean filtered energy per non-overlapping hop.
std::vector<double> energy_envelope(std::span<const float> samples, int sample_rate, const ClapParams& params);

/// Throws SampleRateTooLow below 8 kHz. The upper band edge is clamped to
/// 0.45 of the sample rate.
std::vector<ClapAnchor> detect_claps(std::span<const float> samples, int sample_rate, const ClapParams& params = {});

}  // namespace gaze::detect
