#include "mrfrf/signals.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mrfrf/estimator.hpp"

namespace mrfrf {

Spectrum dft(const TimeSignal& signal) {
  if (signal.samples.empty()) throw Error(ErrorCode::InvalidInput, "dft: empty signal");
  if (!(signal.sampling_time > 0.0))
    throw Error(ErrorCode::InvalidInput, "dft: sampling time must be positive");

  std::vector<cdouble> in(signal.samples.begin(), signal.samples.end());
  Spectrum out;
  out.sampling_time = signal.sampling_time;
  if (in.size() == 1) {
    out.coefficients = in;
    return out;
  }
  Eigen::FFT<double> fft;
  fft.fwd(out.coefficients, in);
  return out;
}

std::vector<cdouble> idft_complex(const Spectrum& spectrum) {
  if (spectrum.coefficients.empty()) throw Error(ErrorCode::InvalidInput, "idft: empty spectrum");
  if (spectrum.coefficients.size() == 1) return spectrum.coefficients;
  std::vector<cdouble> out;
  Eigen::FFT<double> fft;
  fft.inv(out, spectrum.coefficients);
  return out;
}

TimeSignal idft(const Spectrum& spectrum, Rate rate) {
  const auto x = idft_complex(spectrum);
  TimeSignal out;
  out.sampling_time = spectrum.sampling_time;
  out.rate = rate;
  out.samples.reserve(x.size());
  for (const auto& v : x) out.samples.push_back(v.real());
  return out;
}

FrequencyGrid frequency_grid(std::size_t n_points, double sampling_time) {
  if (n_points == 0 || !(sampling_time > 0.0))
    throw Error(ErrorCode::InvalidInput, "frequency_grid: n_points and sampling_time must be positive");
  FrequencyGrid grid;
  grid.omega.resize(n_points);
  grid.bins.resize(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    grid.bins[k] = k;
    grid.omega[k] = 2.0 * pi * static_cast<double>(k) / (static_cast<double>(n_points) * sampling_time);
  }
  return grid;
}

std::vector<std::size_t> default_excited_bins(std::size_t n_points, bool include_nyquist) {
  std::vector<std::size_t> bins;
  for (std::size_t k = 1; 2 * k < n_points; ++k) bins.push_back(k);
  if (include_nyquist && n_points % 2 == 0 && n_points >= 2) bins.push_back(n_points / 2);
  return bins;
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const double ss = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

TimeSignal generate_multisine(const MultisineSpec& spec, double sampling_time) {
  const std::size_t n = spec.n_points;
  if (n == 0) throw Error(ErrorCode::InvalidInput, "multisine: n_points must be positive");
  if (spec.excited_bins.empty()) throw Error(ErrorCode::InvalidInput, "multisine: no excited bins");
  if (!(spec.rms > 0.0)) throw Error(ErrorCode::InvalidInput, "multisine: rms must be positive");

  Spectrum s;
  s.sampling_time = sampling_time;
  s.coefficients.assign(n, cdouble{});

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  for (std::size_t k : spec.excited_bins) {
    if (k < 1 || k > n / 2)
      throw Error(ErrorCode::InvalidInput,
                  "multisine: excited bin " + std::to_string(k) + " outside [1, N/2]");
    const double phi = phase(rng);
    if (2 * k == n) {
      // The Nyquist line must be real; keep its magnitude equal to the others.
      s[k] = std::cos(phi) >= 0.0 ? 1.0 : -1.0;
    } else {
      s[k] = std::polar(1.0, phi);
      s[n - k] = std::conj(s[k]);
    }
  }

  TimeSignal out = idft(s, Rate::Fast);
  const double scale = spec.rms / rms(out.samples);
  for (double& v : out.samples) v *= scale;
  return out;
}

TimeSignal downsample(const TimeSignal& fast, int factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidInput, "downsample: factor must be >= 1");
  const auto f = static_cast<std::size_t>(factor);
  if (fast.samples.empty() || fast.samples.size() % f != 0)
    throw Error(ErrorCode::InvalidInput, "downsample: signal length " + std::to_string(fast.samples.size()) +
                                             " is not a multiple of " + std::to_string(factor));
  TimeSignal slow;
  slow.sampling_time = fast.sampling_time * factor;
  slow.rate = factor == 1 ? fast.rate : Rate::Slow;
  slow.samples.reserve(fast.samples.size() / f);
  for (std::size_t m = 0; m * f < fast.samples.size(); ++m) slow.samples.push_back(fast.samples[m * f]);
  return slow;
}

bool check_roughness(const Spectrum& input, std::size_t k, int half_width, int factor,
                     std::size_t slow_points, double tol) {
  const BinRange range = band_window(k, half_width, slow_points);
  const auto m = static_cast<long long>(slow_points);
  for (int i = 0; i < factor; ++i) {
    for (long long b1 = range.first; b1 <= range.last; ++b1) {
      const cdouble u1 = input.at_wrapped(b1 + i * m);
      for (long long b2 = b1 + 1; b2 <= range.last; ++b2) {
        if (std::abs(u1 - input.at_wrapped(b2 + i * m)) <= tol) return false;
      }
    }
  }
  return true;
}

}  // namespace mrfrf
