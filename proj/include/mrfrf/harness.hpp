#pragma once

#include <vector>

#include "mrfrf/common.hpp"

namespace mrfrf {

struct SaConfig {
  std::size_t segment_length = 200;
  std::size_t overlap = 100;

  /// Throws InvalidConfig unless 0 <= overlap < segment_length <= record_length.
  void validate(std::size_t record_length) const;
  std::size_t segment_count(std::size_t record_length) const;
};

/// [y(0), 0, ..., 0, y(1), 0, ...]: F-1 zeros after every sample.
TimeSignal zero_interpolate(const TimeSignal& slow, int factor);

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Cross-spectral averaging over Hann-windowed, overlapping segments of the
/// fast input and the zero-interpolated slow output, scaled by F so a system
/// that is flat over all bands has unit gain. The estimate lives on the
/// segment grid; point p sits at fast bin p * N / segment_length.
FrfEstimate spectral_analysis(const TimeSignal& fast_input, const TimeSignal& slow_output, int factor,
                              const SaConfig& cfg);

struct CumulativeError {
  double value = 0.0;
  std::size_t skipped = 0;  // estimate points in range with a non-ok status
};

/// (1/n_points) * sum over estimate points with fast bin in [1, n] of
/// |G - G_hat|, where n_points is the estimate's own grid size (N for the
/// local-model estimates). Throws GridMismatch when the grids disagree.
CumulativeError cumulative_frf_error(const Spectrum& truth, const FrfEstimate& estimate, std::size_t n);

/// Error curve for n = 1..max_bin.
std::vector<double> cumulative_frf_error_curve(const Spectrum& truth, const FrfEstimate& estimate,
                                               std::size_t max_bin);

}  // namespace mrfrf
