#include "mrfrf/harness.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>
#include <string>

namespace mrfrf {

void SaConfig::validate(std::size_t record_length) const {
  if (segment_length == 0 || overlap >= segment_length)
    throw Error(ErrorCode::InvalidConfig, "spectral analysis: need 0 <= overlap < segment length");
  if (segment_length > record_length)
    throw Error(ErrorCode::InvalidConfig, "spectral analysis: segment length " + std::to_string(segment_length) +
                                              " exceeds the record length " + std::to_string(record_length));
}

std::size_t SaConfig::segment_count(std::size_t record_length) const {
  if (segment_length > record_length || overlap >= segment_length) return 0;
  return (record_length - segment_length) / (segment_length - overlap) + 1;
}

TimeSignal zero_interpolate(const TimeSignal& slow, int factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidInput, "zero_interpolate: factor must be >= 1");
  const auto f = static_cast<std::size_t>(factor);
  TimeSignal out;
  out.sampling_time = slow.sampling_time / factor;
  out.rate = Rate::Fast;
  out.samples.assign(slow.samples.size() * f, 0.0);
  for (std::size_t m = 0; m < slow.samples.size(); ++m) out.samples[m * f] = slow.samples[m];
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n)));
  return w;
}

FrfEstimate spectral_analysis(const TimeSignal& fast_input, const TimeSignal& slow_output, int factor,
                              const SaConfig& cfg) {
  const std::size_t n = fast_input.samples.size();
  if (factor < 1) throw Error(ErrorCode::InvalidInput, "spectral analysis: factor must be >= 1");
  if (slow_output.samples.size() * static_cast<std::size_t>(factor) != n)
    throw Error(ErrorCode::InvalidInput, "spectral analysis: input length must equal F times the output length");
  cfg.validate(n);
  const std::size_t len = cfg.segment_length;
  if (n % len != 0)
    throw Error(ErrorCode::InvalidConfig, "spectral analysis: segment length must divide the record length");

  const TimeSignal y_fast = zero_interpolate(slow_output, factor);
  const std::vector<double> window = hann_window(len);
  const std::size_t hop = len - cfg.overlap;
  const std::size_t segments = cfg.segment_count(n);

  std::vector<cdouble> cross(len, cdouble{});
  std::vector<double> power(len, 0.0);
  std::vector<cdouble> useg(len), yseg(len), uspec, yspec;
  Eigen::FFT<double> fft;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < len; ++i) {
      useg[i] = window[i] * fast_input.samples[start + i];
      yseg[i] = window[i] * y_fast.samples[start + i];
    }
    fft.fwd(uspec, useg);
    fft.fwd(yspec, yseg);
    for (std::size_t p = 0; p < len; ++p) {
      cross[p] += yspec[p] * std::conj(uspec[p]);
      power[p] += std::norm(uspec[p]);
    }
  }

  double peak = 0.0;
  for (double v : power) peak = std::max(peak, v);

  FrfEstimate est;
  est.method = Method::SA;
  est.sampling_time = fast_input.sampling_time;
  est.n_points = len;
  est.fast_points = n;
  est.fast_bins.resize(len);
  est.g_hat.resize(len);
  est.variance.assign(len, std::numeric_limits<double>::quiet_NaN());
  est.status.resize(len);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t p = 0; p < len; ++p) {
    est.fast_bins[p] = p * (n / len);
    if (power[p] <= 1e-24 * peak || power[p] == 0.0) {
      est.g_hat[p] = cdouble{nan, nan};
      est.status[p] = BinStatus::NoInputPower;
    } else {
      est.g_hat[p] = static_cast<double>(factor) * cross[p] / power[p];
      est.status[p] = BinStatus::Ok;
    }
  }
  return est;
}

namespace {
bool usable(BinStatus s) { return s == BinStatus::Ok || s == BinStatus::NoDegreesOfFreedom; }

void check_grid(const Spectrum& truth, const FrfEstimate& estimate) {
  if (truth.n_points() != estimate.fast_points)
    throw Error(ErrorCode::GridMismatch, "cumulative error: truth has " + std::to_string(truth.n_points()) +
                                             " bins, estimate refers to a " + std::to_string(estimate.fast_points) +
                                             "-bin grid");
  if (estimate.n_points == 0 || estimate.fast_bins.size() != estimate.g_hat.size())
    throw Error(ErrorCode::GridMismatch, "cumulative error: malformed estimate grid");
}
}  // namespace

CumulativeError cumulative_frf_error(const Spectrum& truth, const FrfEstimate& estimate, std::size_t n) {
  check_grid(truth, estimate);
  CumulativeError out;
  for (std::size_t i = 0; i < estimate.g_hat.size(); ++i) {
    const std::size_t bin = estimate.fast_bins[i];
    if (bin < 1 || bin > n) continue;
    if (!usable(estimate.status[i])) {
      ++out.skipped;
      continue;
    }
    out.value += std::abs(truth[bin] - estimate.g_hat[i]);
  }
  out.value /= static_cast<double>(estimate.n_points);
  return out;
}

std::vector<double> cumulative_frf_error_curve(const Spectrum& truth, const FrfEstimate& estimate,
                                               std::size_t max_bin) {
  check_grid(truth, estimate);
  std::vector<double> per_bin(max_bin + 1, 0.0);
  for (std::size_t i = 0; i < estimate.g_hat.size(); ++i) {
    const std::size_t bin = estimate.fast_bins[i];
    if (bin < 1 || bin > max_bin || !usable(estimate.status[i])) continue;
    per_bin[bin] += std::abs(truth[bin] - estimate.g_hat[i]);
  }
  std::vector<double> curve(max_bin + 1, 0.0);
  for (std::size_t b = 1; b <= max_bin; ++b) curve[b] = curve[b - 1] + per_bin[b] / static_cast<double>(estimate.n_points);
  return curve;
}

}  // namespace mrfrf
