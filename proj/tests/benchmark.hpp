// Synthetic two-mode benchmark: one resonance below and one above the slow
// Nyquist frequency (333 Hz), T_h = 0.5 ms, F = 3, N = 1200, M = 400.
#pragma once

#include "mrfrf/estimator.hpp"
#include "mrfrf/lti.hpp"
#include "mrfrf/signals.hpp"

namespace bench {

struct Benchmark {
  double t_h = 0.5e-3;
  int factor = 3;
  std::size_t n = 1200;
  std::size_t m = 400;
  mrfrf::RationalSystem system;
  mrfrf::TimeSignal u;
  mrfrf::Spectrum u_spec;
  mrfrf::TimeSignal y_slow;  // noiseless
  mrfrf::Spectrum truth;
  double noise_variance = 0.0;  // 45 dB
  mrfrf::EstimatorConfig lrm{3, 18, 4, 4, 7};
  mrfrf::EstimatorConfig lpm{3, 18, 2, 2, 0};
};

inline Benchmark make(std::uint64_t excitation_seed = 1) {
  Benchmark b;
  b.system = mrfrf::make_resonant_plant({{150.0, 0.02, 1.0}, {500.0, 0.01, 0.3}}, b.t_h);
  b.u = mrfrf::generate_multisine({b.n, 1.44, mrfrf::default_excited_bins(b.n), excitation_seed}, b.t_h);
  b.u_spec = mrfrf::dft(b.u);
  b.y_slow = mrfrf::downsample(mrfrf::simulate(b.system, b.u), b.factor);
  b.truth = mrfrf::freqresp(b.system, b.n, b.t_h);
  b.noise_variance = mrfrf::noise_variance_for_snr(b.y_slow, 45.0);
  return b;
}

inline mrfrf::Spectrum noisy_output(const Benchmark& b, std::uint64_t seed) {
  return mrfrf::dft(mrfrf::add_noise(b.y_slow, {b.noise_variance, seed, std::nullopt}));
}

}  // namespace bench
