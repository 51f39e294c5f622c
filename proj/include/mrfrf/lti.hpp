#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrfrf/common.hpp"

namespace mrfrf {

/// G(q) = B(q)/A(q) with B = sum b_i q^-i and A = sum a_i q^-i.
struct RationalSystem {
  std::vector<double> b{1.0};
  std::vector<double> a{1.0};

  /// Throws InvalidInput when a is empty or a_0 == 0.
  void validate() const;

  /// All poles strictly inside the unit circle.
  bool is_stable() const;
};

/// Past samples at the start of the record, most recent first:
/// past_inputs[0] = u(-1), past_outputs[0] = y(-1). Missing entries are zero.
struct InitialConditions {
  std::vector<double> past_inputs;
  std::vector<double> past_outputs;
};

/// Runs the difference equation sum a_i y(n-i) = sum b_i u(n-i).
/// Throws Overflow if the output leaves the finite double range.
TimeSignal simulate(const RationalSystem& sys, const TimeSignal& input,
                    const InitialConditions& initial = {});

/// G(Omega_k) with Omega_k = exp(-j w_k T) on the given bins.
/// Throws PoleOnGrid (with the bin) when |A(Omega_k)| < 1e-14.
Spectrum freqresp(const RationalSystem& sys, const FrequencyGrid& grid, double sampling_time);

/// Convenience: all N bins of the N-point grid.
Spectrum freqresp(const RationalSystem& sys, std::size_t n_points, double sampling_time);

cdouble evaluate(const RationalSystem& sys, double omega, double sampling_time);

struct NoiseSpec {
  double variance = 0.0;
  std::uint64_t seed = 0;
  std::optional<RationalSystem> shaping;
};

/// signal + H(q) e with e i.i.d. zero-mean Gaussian of the given variance.
TimeSignal add_noise(const TimeSignal& signal, const NoiseSpec& noise);

/// Noise variance giving var(signal)/variance == 10^(snr_db/10).
double noise_variance_for_snr(const TimeSignal& signal, double snr_db);

/// 10 log10(var(clean) / var(noisy - clean)).
double measured_snr_db(const TimeSignal& clean, const TimeSignal& noisy);

struct ResonantMode {
  double frequency_hz = 0.0;
  double damping = 0.0;
  double gain = 1.0;  // static gain of the mode
};

/// Parallel connection of second-order modes, each discretized by pole-zero
/// mapping (continuous zeros at infinity map to z = -1), plus a feedthrough.
RationalSystem make_resonant_plant(const std::vector<ResonantMode>& modes, double sampling_time,
                                   double feedthrough = 0.0);

/// Polynomial helpers on coefficient vectors in ascending powers of q^-1.
std::vector<double> poly_multiply(const std::vector<double>& p, const std::vector<double>& q);
std::vector<double> poly_add(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace mrfrf
