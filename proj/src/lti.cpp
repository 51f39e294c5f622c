#include "mrfrf/lti.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mrfrf/signals.hpp"

namespace mrfrf {

void RationalSystem::validate() const {
  if (a.empty() || a.front() == 0.0)
    throw Error(ErrorCode::InvalidInput, "rational system: leading denominator coefficient must be nonzero");
  if (b.empty()) throw Error(ErrorCode::InvalidInput, "rational system: empty numerator");
  for (double v : a)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "rational system: non-finite coefficient");
  for (double v : b)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "rational system: non-finite coefficient");
}

bool RationalSystem::is_stable() const {
  validate();
  // Trailing zero coefficients are poles at the origin.
  std::size_t n = a.size();
  while (n > 1 && a[n - 1] == 0.0) --n;
  const int order = static_cast<int>(n) - 1;
  if (order == 0) return true;

  // Poles are the roots of a_0 z^n + a_1 z^(n-1) + ... + a_n.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(order, order);
  for (int i = 0; i < order; ++i) companion(0, i) = -a[static_cast<std::size_t>(i) + 1] / a[0];
  for (int i = 1; i < order; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd poles = companion.eigenvalues();
  return (poles.array().abs() < 1.0).all();
}

TimeSignal simulate(const RationalSystem& sys, const TimeSignal& input, const InitialConditions& initial) {
  sys.validate();
  if (input.samples.empty()) throw Error(ErrorCode::InvalidInput, "simulate: empty input");

  const auto& u = input.samples;
  const std::size_t n = u.size();
  const auto input_at = [&](long long i) -> double {
    if (i >= 0) return u[static_cast<std::size_t>(i)];
    const auto past = static_cast<std::size_t>(-i - 1);
    return past < initial.past_inputs.size() ? initial.past_inputs[past] : 0.0;
  };

  TimeSignal out;
  out.sampling_time = input.sampling_time;
  out.rate = input.rate;
  out.samples.resize(n);
  auto& y = out.samples;
  const auto output_at = [&](long long i) -> double {
    if (i >= 0) return y[static_cast<std::size_t>(i)];
    const auto past = static_cast<std::size_t>(-i - 1);
    return past < initial.past_outputs.size() ? initial.past_outputs[past] : 0.0;
  };

  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<long long>(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < sys.b.size(); ++i) acc += sys.b[i] * input_at(ti - static_cast<long long>(i));
    for (std::size_t i = 1; i < sys.a.size(); ++i) acc -= sys.a[i] * output_at(ti - static_cast<long long>(i));
    y[t] = acc / sys.a[0];
    if (!std::isfinite(y[t]))
      throw Error(ErrorCode::Overflow, "simulate: output diverged at sample " + std::to_string(t));
  }
  return out;
}

namespace {
cdouble polyval_lag(const std::vector<double>& c, cdouble omega) {
  // Horner in Omega = exp(-j w T).
  cdouble acc{0.0, 0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * omega + *it;
  return acc;
}
}  // namespace

cdouble evaluate(const RationalSystem& sys, double omega, double sampling_time) {
  const cdouble z = std::polar(1.0, -omega * sampling_time);
  const cdouble den = polyval_lag(sys.a, z);
  if (std::abs(den) < 1e-14) throw Error(ErrorCode::PoleOnGrid, "freqresp: pole on the frequency grid");
  return polyval_lag(sys.b, z) / den;
}

Spectrum freqresp(const RationalSystem& sys, const FrequencyGrid& grid, double sampling_time) {
  sys.validate();
  Spectrum out;
  out.sampling_time = sampling_time;
  out.coefficients.resize(grid.omega.size());
  for (std::size_t i = 0; i < grid.omega.size(); ++i) {
    try {
      out.coefficients[i] = evaluate(sys, grid.omega[i], sampling_time);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at bin " + std::to_string(grid.bins[i]), grid.bins[i]);
    }
  }
  return out;
}

Spectrum freqresp(const RationalSystem& sys, std::size_t n_points, double sampling_time) {
  return freqresp(sys, frequency_grid(n_points, sampling_time), sampling_time);
}

TimeSignal add_noise(const TimeSignal& signal, const NoiseSpec& noise) {
  if (noise.variance < 0.0) throw Error(ErrorCode::InvalidInput, "add_noise: negative variance");
  if (noise.variance == 0.0) return signal;

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(noise.variance));
  TimeSignal e{std::vector<double>(signal.samples.size()), signal.sampling_time, signal.rate};
  for (double& v : e.samples) v = dist(rng);
  if (noise.shaping) e = simulate(*noise.shaping, e);

  TimeSignal out = signal;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += e.samples[i];
  return out;
}

namespace {
double variance_of(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}
}  // namespace

double noise_variance_for_snr(const TimeSignal& signal, double snr_db) {
  return variance_of(signal.samples) / std::pow(10.0, snr_db / 10.0);
}

double measured_snr_db(const TimeSignal& clean, const TimeSignal& noisy) {
  if (clean.size() != noisy.size()) throw Error(ErrorCode::InvalidInput, "measured_snr_db: length mismatch");
  std::vector<double> diff(clean.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = noisy.samples[i] - clean.samples[i];
  return 10.0 * std::log10(variance_of(clean.samples) / variance_of(diff));
}

std::vector<double> poly_multiply(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.empty() || q.empty()) return {};
  std::vector<double> out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  return out;
}

std::vector<double> poly_add(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> out(std::max(p.size(), q.size()), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  for (std::size_t i = 0; i < q.size(); ++i) out[i] += q[i];
  return out;
}

RationalSystem make_resonant_plant(const std::vector<ResonantMode>& modes, double sampling_time,
                                   double feedthrough) {
  if (!(sampling_time > 0.0)) throw Error(ErrorCode::InvalidInput, "resonant plant: sampling time must be positive");
  const double nyquist = 0.5 / sampling_time;

  RationalSystem sys{{feedthrough}, {1.0}};
  for (const auto& mode : modes) {
    if (!(mode.frequency_hz > 0.0) || mode.frequency_hz >= nyquist)
      throw Error(ErrorCode::InvalidInput, "resonant plant: mode frequency " + std::to_string(mode.frequency_hz) +
                                               " Hz outside (0, " + std::to_string(nyquist) + ") Hz");
    if (!(mode.damping > 0.0 && mode.damping < 1.0))
      throw Error(ErrorCode::InvalidInput, "resonant plant: damping ratio must lie in (0, 1)");

    const double wn = 2.0 * pi * mode.frequency_hz;
    const double radius = std::exp(-mode.damping * wn * sampling_time);
    const double angle = wn * std::sqrt(1.0 - mode.damping * mode.damping) * sampling_time;
    const std::vector<double> den{1.0, -2.0 * radius * std::cos(angle), radius * radius};
    // Zeros at infinity map to z = -1; one sample delay keeps the mode strictly proper.
    const double dc_den = den[0] + den[1] + den[2];
    const double c = mode.gain * dc_den / 2.0;
    const std::vector<double> num{0.0, c, c};

    sys.b = poly_add(poly_multiply(sys.b, den), poly_multiply(num, sys.a));
    sys.a = poly_multiply(sys.a, den);
  }
  return sys;
}

}  // namespace mrfrf
