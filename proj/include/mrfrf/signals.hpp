#pragma once

#include <cstdint>
#include <vector>

#include "mrfrf/common.hpp"

namespace mrfrf {

/// X(k) = sum_n x(n) exp(-j w_k n T). Throws InvalidInput on an empty signal.
Spectrum dft(const TimeSignal& signal);

/// Inverse of dft(). The imaginary part of the synthesized sequence is
/// discarded, so the round trip is exact only for conjugate-symmetric input.
TimeSignal idft(const Spectrum& spectrum, Rate rate = Rate::Fast);

/// Complex inverse, no symmetry assumption.
std::vector<cdouble> idft_complex(const Spectrum& spectrum);

FrequencyGrid frequency_grid(std::size_t n_points, double sampling_time);

struct MultisineSpec {
  std::size_t n_points = 0;
  double rms = 1.0;
  std::vector<std::size_t> excited_bins;
  std::uint64_t seed = 0;
};

/// Bins 1..floor((N-1)/2), optionally with the Nyquist bin N/2 when N is even.
std::vector<std::size_t> default_excited_bins(std::size_t n_points, bool include_nyquist = false);

/// Random-phase multisine with flat amplitude over `excited_bins`, scaled in
/// the time domain to the requested RMS. Phases are uniform on [0, 2pi).
TimeSignal generate_multisine(const MultisineSpec& spec, double sampling_time = 1.0);

/// slow[m] = fast[m F]; the length must be a multiple of F.
TimeSignal downsample(const TimeSignal& fast, int factor);

/// True iff |U(k+r1+iM) - U(k+r2+iM)| > tol for every pair of distinct bins
/// in the estimation window of slow bin k and every band i. Bins wrap mod N.
bool check_roughness(const Spectrum& input, std::size_t k, int half_width, int factor,
                     std::size_t slow_points, double tol);

double rms(const std::vector<double>& x);

}  // namespace mrfrf
