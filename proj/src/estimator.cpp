#include "mrfrf/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "mrfrf/signals.hpp"

namespace mrfrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double basis_scale_for(int half_width) { return static_cast<double>(std::max(half_width, 1)); }

std::string window_condition_message(const EstimatorConfig& cfg, std::size_t slow_points, bool too_small) {
  std::ostringstream os;
  if (too_small)
    os << "window of " << cfg.window_length() << " bins is smaller than the " << cfg.parameter_count()
       << " local parameters";
  else
    os << "window of " << cfg.window_length() << " bins exceeds the " << slow_points << " slow-rate bins";
  return os.str();
}

}  // namespace

EstimatorConfig EstimatorConfig::from_band_orders(int factor, int half_width, int numerator_degree,
                                                  int denominator_degree, int transient_degree) {
  EstimatorConfig cfg;
  cfg.factor = factor;
  cfg.half_width = half_width;
  cfg.system_degree = numerator_degree + denominator_degree * (factor - 1);
  cfg.transient_degree = transient_degree + denominator_degree * (factor - 1);
  cfg.denominator_degree = denominator_degree * factor;
  return cfg;
}

int ParameterLayout::power_of(int i) const {
  const int system_end = (system_degree + 1) * factor;
  if (i < system_end) return i / factor;
  const int transient_end = system_end + transient_degree + 1;
  if (i < transient_end) return i - system_end;
  return i - transient_end + 1;
}

ParameterVector ParameterVector::rescaled(double new_scale) const {
  ParameterVector out = *this;
  const double ratio = new_scale / basis_scale;
  for (int i = 0; i < values.size(); ++i) out.values(i) *= std::pow(ratio, layout.power_of(i));
  out.basis_scale = new_scale;
  return out;
}

BinRange band_window(std::size_t k, int half_width, std::size_t slow_points) {
  const auto kk = static_cast<long long>(k);
  const auto nw = static_cast<long long>(half_width);
  const auto m = static_cast<long long>(slow_points);
  if (kk <= nw) return {0, 2 * nw};
  if (kk > m - nw) return {m - 2 * nw, m};
  return {kk - nw, kk + nw};
}

LocalWindow make_window(const Spectrum& input, const Spectrum& output, std::size_t k,
                        const EstimatorConfig& cfg) {
  const std::size_t m = output.n_points();
  const BinRange range = band_window(k, cfg.half_width, m);
  const auto width = static_cast<int>(range.last - range.first + 1);
  const auto mm = static_cast<long long>(m);

  LocalWindow w;
  w.center = k;
  w.offsets.resize(static_cast<std::size_t>(width));
  w.outputs.resize(width);
  w.inputs.resize(cfg.factor, width);
  for (int i = 0; i < width; ++i) {
    const long long bin = range.first + i;
    w.offsets[static_cast<std::size_t>(i)] = static_cast<int>(bin - static_cast<long long>(k));
    w.outputs(i) = output.at_wrapped(bin);
    for (int f = 0; f < cfg.factor; ++f) w.inputs(f, i) = input.at_wrapped(bin + f * mm);
  }
  return w;
}

Regressor assemble_weighted_regressor(const LocalWindow& window, const ParameterLayout& layout,
                                      double basis_scale, const Eigen::VectorXcd& weights) {
  const int width = window.length();
  const int max_power = std::max({layout.system_degree, layout.transient_degree, layout.denominator_degree});

  Regressor reg;
  reg.center = window.center;
  reg.layout = layout;
  reg.offsets = window.offsets;
  reg.basis_scale = basis_scale;
  reg.k_w.resize(layout.size(), width);
  reg.y_w.resize(width);

  std::vector<double> powers(static_cast<std::size_t>(max_power) + 1);
  for (int i = 0; i < width; ++i) {
    const double rho = window.offsets[static_cast<std::size_t>(i)] / basis_scale;
    powers[0] = 1.0;
    for (int s = 1; s <= max_power; ++s) powers[static_cast<std::size_t>(s)] = powers[static_cast<std::size_t>(s) - 1] * rho;

    const cdouble wt = weights.size() == 0 ? cdouble{1.0} : weights(i);
    for (int s = 0; s <= layout.system_degree; ++s)
      for (int f = 0; f < layout.factor; ++f)
        reg.k_w(layout.system_index(s, f), i) = wt * powers[static_cast<std::size_t>(s)] * window.inputs(f, i);
    for (int s = 0; s <= layout.transient_degree; ++s)
      reg.k_w(layout.transient_index(s), i) = wt * powers[static_cast<std::size_t>(s)];
    for (int s = 1; s <= layout.denominator_degree; ++s)
      reg.k_w(layout.denominator_index(s), i) = -wt * powers[static_cast<std::size_t>(s)] * window.outputs(i);
    reg.y_w(i) = wt * window.outputs(i);
  }
  return reg;
}

Regressor assemble_regressor(const LocalWindow& window, const ParameterLayout& layout, double basis_scale) {
  return assemble_weighted_regressor(window, layout, basis_scale, Eigen::VectorXcd{});
}

void check_sweep_inputs(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg) {
  if (cfg.factor < 1) throw Error(ErrorCode::InvalidConfig, "downsampling factor must be >= 1");
  if (cfg.half_width < 0 || cfg.system_degree < 0 || cfg.transient_degree < 0 || cfg.denominator_degree < 0)
    throw Error(ErrorCode::InvalidConfig, "window size and local model degrees must be non-negative");
  if (output.n_points() == 0) throw Error(ErrorCode::InvalidInput, "empty output spectrum");
  if (input.n_points() != output.n_points() * static_cast<std::size_t>(cfg.factor))
    throw Error(ErrorCode::InvalidInput, "input length " + std::to_string(input.n_points()) +
                                             " differs from F * output length " +
                                             std::to_string(output.n_points() * static_cast<std::size_t>(cfg.factor)));
  if (cfg.window_length() < cfg.parameter_count())
    throw Error(ErrorCode::InvalidConfig, "window-too-small: " + window_condition_message(cfg, output.n_points(), true));
  if (static_cast<std::size_t>(cfg.window_length()) > output.n_points())
    throw Error(ErrorCode::InvalidConfig, "window-too-large: " + window_condition_message(cfg, output.n_points(), false));
}

Regressor build_regressor(const Spectrum& input, const Spectrum& output, std::size_t k, const EstimatorConfig& cfg) {
  check_sweep_inputs(input, output, cfg);
  if (k >= output.n_points()) throw Error(ErrorCode::InvalidInput, "bin outside the slow grid", k);
  return assemble_regressor(make_window(input, output, k, cfg), ParameterLayout::from(cfg),
                            basis_scale_for(cfg.half_width));
}

WindowSolve solve_window(const Regressor& reg, double rcond_threshold) {
  const Eigen::Index params = reg.k_w.rows();
  const Eigen::Index width = reg.k_w.cols();
  if (width < params)
    throw Error(ErrorCode::InvalidConfig, "window has fewer points than parameters", reg.center);

  // theta K = Y  <=>  K^T theta^T = Y^T, solved by pivoted Householder QR:
  // K^T P = Q R.
  const Eigen::MatrixXcd a = reg.k_w.transpose();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  const Eigen::MatrixXcd r = qr.matrixR().topLeftCorner(params, params).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(params, params));

  const auto norm1 = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
  double rcond = 0.0;
  if (r_inv.allFinite()) {
    const double denom = norm1(r) * norm1(r_inv);
    rcond = denom > 0.0 && std::isfinite(denom) ? 1.0 / denom : 0.0;
  }
  if (!(rcond >= rcond_threshold)) {
    std::ostringstream os;
    os << "rank-deficient window at bin " << reg.center << " (reciprocal condition " << rcond
       << "); the input spectrum may not be rough enough: neighbouring and aliased input lines must differ";
    throw Error(ErrorCode::RankDeficient, os.str(), reg.center);
  }

  WindowSolve out;
  out.center = reg.center;
  out.rcond = rcond;
  out.dof = static_cast<int>(width - params);
  out.theta.layout = reg.layout;
  out.theta.basis_scale = reg.basis_scale;
  out.theta.values = qr.solve(Eigen::VectorXcd(reg.y_w.transpose()));
  out.residual = reg.y_w - (a * out.theta.values).transpose();

  // (A^H A)^-1 = P R^-1 R^-H P^T; the diagonal entry of parameter i is the
  // squared norm of the row of R^-1 at i's pivot position.
  const auto& perm = qr.colsPermutation().indices();
  out.system_gain_diag.resize(reg.layout.factor);
  for (Eigen::Index j = 0; j < params; ++j) {
    const int original = perm(j);
    if (original < reg.layout.factor) out.system_gain_diag(original) = r_inv.row(j).squaredNorm();
  }

  // With A = K^T, |S_f| = |A (A^H A)^-1 1_f| = |Q R^-H row_j| and P_rr = ||Q_r||^2.
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(width, params);
  const Eigen::VectorXd e2 = denominator_values(out.theta, reg.offsets).cwiseAbs2();
  const Eigen::VectorXd leverage = q.rowwise().squaredNorm();
  out.noise_scale = (e2.array() * (1.0 - leverage.array())).sum();
  out.system_gain_weighted.resize(reg.layout.factor);
  for (Eigen::Index j = 0; j < params; ++j) {
    const int original = perm(j);
    if (original >= reg.layout.factor) continue;
    const Eigen::VectorXcd s = q * r_inv.row(j).adjoint();
    out.system_gain_weighted(original) = (s.cwiseAbs2().array() * e2.array()).sum();
  }
  return out;
}

BandValues extract_frf(const ParameterVector& theta) {
  const auto& l = theta.layout;
  BandValues out;
  out.g_hat.resize(static_cast<std::size_t>(l.factor));
  for (int f = 0; f < l.factor; ++f)
    out.g_hat[static_cast<std::size_t>(f)] = static_cast<double>(l.factor) * theta.values(l.system_index(0, f));
  out.transient = theta.values(l.transient_index(0));
  return out;
}

double estimate_noise_variance(const Eigen::RowVectorXcd& residual, int dof) {
  if (dof < 1)
    throw Error(ErrorCode::DegreesOfFreedom, "no degrees of freedom left for the noise variance estimate");
  return residual.squaredNorm() / static_cast<double>(dof);
}

std::vector<double> estimate_frf_variance(const WindowSolve& solve, double noise_variance) {
  const int f_count = solve.theta.layout.factor;
  const double f2 = static_cast<double>(f_count) * static_cast<double>(f_count);
  std::vector<double> out(static_cast<std::size_t>(f_count));
  for (int f = 0; f < f_count; ++f) out[static_cast<std::size_t>(f)] = f2 * solve.system_gain_diag(f) * noise_variance;
  return out;
}

double estimate_noise_variance(const WindowSolve& solve) {
  if (solve.dof < 1 || !(solve.noise_scale > 0.0))
    throw Error(ErrorCode::DegreesOfFreedom, "no degrees of freedom left for the noise variance estimate");
  return solve.residual.squaredNorm() / solve.noise_scale;
}

std::vector<double> estimate_frf_variance_weighted(const WindowSolve& solve, double noise_variance) {
  const int f_count = solve.theta.layout.factor;
  const double f2 = static_cast<double>(f_count) * static_cast<double>(f_count);
  std::vector<double> out(static_cast<std::size_t>(f_count));
  for (int f = 0; f < f_count; ++f)
    out[static_cast<std::size_t>(f)] = f2 * solve.system_gain_weighted(f) * noise_variance;
  return out;
}

Eigen::VectorXcd denominator_values(const ParameterVector& theta, const std::vector<int>& offsets) {
  const auto& l = theta.layout;
  Eigen::VectorXcd den(static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double rho = offsets[i] / theta.basis_scale;
    cdouble acc{1.0};
    double p = 1.0;
    for (int s = 1; s <= l.denominator_degree; ++s) {
      p *= rho;
      acc += theta.values(l.denominator_index(s)) * p;
    }
    den(static_cast<Eigen::Index>(i)) = acc;
  }
  return den;
}

cdouble eval_estimated_output(const ParameterVector& theta, const LocalWindow& window, int index) {
  const auto& l = theta.layout;
  const double rho = window.offsets[static_cast<std::size_t>(index)] / theta.basis_scale;

  cdouble num{};
  double p = 1.0;
  const int max_power = std::max(l.system_degree, l.transient_degree);
  cdouble den{1.0};
  for (int s = 0; s <= std::max(max_power, l.denominator_degree); ++s) {
    if (s <= l.system_degree)
      for (int f = 0; f < l.factor; ++f) num += theta.values(l.system_index(s, f)) * p * window.inputs(f, index);
    if (s <= l.transient_degree) num += theta.values(l.transient_index(s)) * p;
    if (s >= 1 && s <= l.denominator_degree) den += theta.values(l.denominator_index(s)) * p;
    p *= rho;
  }
  if (std::abs(den) < 1e-14)
    throw Error(ErrorCode::LocalPole, "local model denominator vanishes inside the window", window.center);
  return num / den;
}

std::vector<ConfigViolation> validate_config(const EstimatorConfig& cfg, std::size_t slow_points,
                                             const Spectrum* input, double roughness_tol) {
  std::vector<ConfigViolation> out;
  if (cfg.factor < 1) out.push_back({"invalid-factor", "downsampling factor must be >= 1"});
  if (cfg.half_width < 0 || cfg.system_degree < 0 || cfg.transient_degree < 0 || cfg.denominator_degree < 0)
    out.push_back({"invalid-degree", "window size and local model degrees must be non-negative"});
  if (!out.empty()) return out;

  if (cfg.window_length() < cfg.parameter_count())
    out.push_back({"window-too-small", window_condition_message(cfg, slow_points, true)});
  if (static_cast<std::size_t>(cfg.window_length()) > slow_points)
    out.push_back({"window-too-large", window_condition_message(cfg, slow_points, false)});

  if (input != nullptr) {
    if (input->n_points() != slow_points * static_cast<std::size_t>(cfg.factor)) {
      out.push_back({"length-mismatch", "input has " + std::to_string(input->n_points()) + " bins, expected F * M = " +
                                            std::to_string(slow_points * static_cast<std::size_t>(cfg.factor))});
      return out;
    }
    std::vector<std::size_t> rough_failures;
    for (std::size_t k = 0; k < slow_points; ++k)
      if (!check_roughness(*input, k, cfg.half_width, cfg.factor, slow_points, roughness_tol))
        rough_failures.push_back(k);
    if (!rough_failures.empty()) {
      std::ostringstream os;
      os << "input spectrum is not rough in " << rough_failures.size() << " of " << slow_points
         << " windows (first at bin " << rough_failures.front() << ")";
      out.push_back({"input-not-rough", os.str()});
    }
  }
  return out;
}

BinEstimate estimate_bin(const Spectrum& input, const Spectrum& output, std::size_t k, const EstimatorConfig& cfg) {
  BinEstimate out;
  const auto f = static_cast<std::size_t>(cfg.factor);
  try {
    const Regressor reg = assemble_regressor(make_window(input, output, k, cfg), ParameterLayout::from(cfg),
                                             basis_scale_for(cfg.half_width));
    const WindowSolve solve = solve_window(reg, cfg.rcond_threshold);
    const BandValues band = extract_frf(solve.theta);
    out.g_hat = band.g_hat;
    out.transient = band.transient;
    if (solve.dof >= 1) {
      out.noise_variance = estimate_noise_variance(solve);
      out.variance = estimate_frf_variance_weighted(solve, out.noise_variance);
    } else {
      out.noise_variance = kNaN;
      out.variance.assign(f, kNaN);
      out.status = BinStatus::NoDegreesOfFreedom;
      out.message = "no degrees of freedom; variance unavailable";
    }
  } catch (const Error& e) {
    out.g_hat.assign(f, cdouble{kNaN, kNaN});
    out.variance.assign(f, kNaN);
    out.transient = cdouble{kNaN, kNaN};
    out.noise_variance = kNaN;
    out.status = e.code() == ErrorCode::LocalPole ? BinStatus::LocalPole : BinStatus::RankDeficient;
    out.message = e.what();
  }
  return out;
}

FrfEstimate assemble_estimate(const std::vector<BinEstimate>& bins, const EstimatorConfig& cfg,
                              std::size_t fast_points, double fast_sampling_time, Method tag) {
  const std::size_t m = bins.size();
  FrfEstimate est;
  est.method = tag;
  est.sampling_time = fast_sampling_time;
  est.n_points = fast_points;
  est.fast_points = fast_points;
  est.fast_bins.resize(fast_points);
  for (std::size_t i = 0; i < fast_points; ++i) est.fast_bins[i] = i;
  est.g_hat.assign(fast_points, cdouble{kNaN, kNaN});
  est.variance.assign(fast_points, kNaN);
  est.status.assign(fast_points, BinStatus::RankDeficient);
  est.transient.resize(m);
  est.noise_variance.resize(m);
  est.slow_status.resize(m);

  for (std::size_t k = 0; k < m; ++k) {
    const BinEstimate& b = bins[k];
    for (int f = 0; f < cfg.factor; ++f) {
      const std::size_t fast = k + static_cast<std::size_t>(f) * m;
      est.g_hat[fast] = b.g_hat[static_cast<std::size_t>(f)];
      est.variance[fast] = b.variance[static_cast<std::size_t>(f)];
      est.status[fast] = b.status;
    }
    est.transient[k] = b.transient;
    est.noise_variance[k] = b.noise_variance;
    est.slow_status[k] = b.status;
  }
  return est;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

FrfEstimate identify_frf(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg, Method tag,
                         unsigned threads) {
  check_sweep_inputs(input, output, cfg);
  std::vector<BinEstimate> bins(output.n_points());
  parallel_for(bins.size(), threads, [&](std::size_t k) { bins[k] = estimate_bin(input, output, k, cfg); });
  return assemble_estimate(bins, cfg, input.n_points(), input.sampling_time, tag);
}

}  // namespace mrfrf
