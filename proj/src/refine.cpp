#include "mrfrf/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrfrf {

namespace {

constexpr double kDenominatorFloor = 1e-14;
constexpr double kDampingCap = 1e12;
// A window whose cost is this small relative to its output energy is an exact fit.
constexpr double kExactFitRatio = 1e-20;

struct ModelTerms {
  Eigen::VectorXcd numerator;
  Eigen::VectorXcd denominator;
};

ModelTerms model_terms(const ParameterVector& theta, const LocalWindow& window) {
  const auto& l = theta.layout;
  const int width = window.length();
  ModelTerms t{Eigen::VectorXcd::Zero(width), Eigen::VectorXcd::Ones(width)};
  const int max_power = std::max({l.system_degree, l.transient_degree, l.denominator_degree});
  for (int i = 0; i < width; ++i) {
    const double rho = window.offsets[static_cast<std::size_t>(i)] / theta.basis_scale;
    double p = 1.0;
    for (int s = 0; s <= max_power; ++s) {
      if (s <= l.system_degree)
        for (int f = 0; f < l.factor; ++f) t.numerator(i) += theta.values(l.system_index(s, f)) * p * window.inputs(f, i);
      if (s <= l.transient_degree) t.numerator(i) += theta.values(l.transient_index(s)) * p;
      if (s >= 1 && s <= l.denominator_degree) t.denominator(i) += theta.values(l.denominator_index(s)) * p;
      p *= rho;
    }
  }
  return t;
}

void require_nonvanishing(const Eigen::VectorXcd& den, std::size_t center) {
  if ((den.array().abs() < kDenominatorFloor).any())
    throw Error(ErrorCode::LocalPole, "local model denominator vanishes inside the window", center);
}

Eigen::VectorXcd model_residual(const ParameterVector& theta, const LocalWindow& window) {
  const ModelTerms t = model_terms(theta, window);
  require_nonvanishing(t.denominator, window.center);
  return window.outputs - (t.numerator.array() / t.denominator.array()).matrix();
}

}  // namespace

void RefineConfig::validate() const {
  if (sk_max_iter < 0 || lm_max_iter < 0) throw Error(ErrorCode::InvalidConfig, "iteration counts must be >= 0");
  if (!(rel_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "relative tolerance must be positive");
  if (!(lm_damping_init > 0.0)) throw Error(ErrorCode::InvalidConfig, "initial damping must be positive");
  if (!(lm_damping_up > 1.0)) throw Error(ErrorCode::InvalidConfig, "damping increase factor must exceed 1");
  if (!(lm_damping_down > 0.0 && lm_damping_down < 1.0))
    throw Error(ErrorCode::InvalidConfig, "damping decrease factor must lie in (0, 1)");
}

double eval_nonlinear_cost(const ParameterVector& theta, const LocalWindow& window) {
  return model_residual(theta, window).squaredNorm();
}

double eval_sk_cost(const ParameterVector& theta, const ParameterVector& previous, const LocalWindow& window) {
  const ModelTerms t = model_terms(theta, window);
  require_nonvanishing(t.denominator, window.center);
  const Eigen::VectorXcd prev_den = denominator_values(previous.rescaled(theta.basis_scale), window.offsets);
  require_nonvanishing(prev_den, window.center);
  const Eigen::VectorXcd weighted =
      (window.outputs.array() * t.denominator.array() - t.numerator.array()) / prev_den.array();
  return weighted.squaredNorm();
}

Eigen::VectorXd stacked_residual(const ParameterVector& theta, const LocalWindow& window) {
  const Eigen::VectorXcd e = model_residual(theta, window);
  Eigen::VectorXd out(2 * e.size());
  out << e.real(), e.imag();
  return out;
}

ResidualJacobian residual_jacobian(const ParameterVector& theta, const LocalWindow& window) {
  const auto& l = theta.layout;
  const int width = window.length();
  const int params = l.size();
  const ModelTerms t = model_terms(theta, window);
  require_nonvanishing(t.denominator, window.center);

  ResidualJacobian out;
  out.residual.resize(2 * width);
  out.jacobian.resize(2 * width, 2 * params);

  Eigen::VectorXcd d(params);
  for (int i = 0; i < width; ++i) {
    const cdouble den = t.denominator(i);
    const cdouble y_hat = t.numerator(i) / den;
    const cdouble e = window.outputs(i) - y_hat;
    out.residual(i) = e.real();
    out.residual(width + i) = e.imag();

    // Complex derivative of e with respect to each (holomorphic) parameter.
    const double rho = window.offsets[static_cast<std::size_t>(i)] / theta.basis_scale;
    double p = 1.0;
    for (int s = 0; s <= std::max({l.system_degree, l.transient_degree, l.denominator_degree}); ++s) {
      if (s <= l.system_degree)
        for (int f = 0; f < l.factor; ++f) d(l.system_index(s, f)) = -p * window.inputs(f, i) / den;
      if (s <= l.transient_degree) d(l.transient_index(s)) = -p / den;
      if (s >= 1 && s <= l.denominator_degree) d(l.denominator_index(s)) = y_hat * p / den;
      p *= rho;
    }
    for (int q = 0; q < params; ++q) {
      out.jacobian(i, q) = d(q).real();
      out.jacobian(i, params + q) = -d(q).imag();
      out.jacobian(width + i, q) = d(q).imag();
      out.jacobian(width + i, params + q) = d(q).real();
    }
  }
  return out;
}

RefineResult sk_iterate(const ParameterVector& theta0, const LocalWindow& window, const RefineConfig& cfg,
                        double rcond_threshold) {
  cfg.validate();
  RefineResult out;
  out.theta = theta0;

  ParameterVector unit = theta0;
  unit.values.setZero();  // denominator 1: the first weighting is the linear one
  double j_sk = eval_sk_cost(theta0, unit, window);
  out.trace.j_sk.push_back(j_sk);
  out.trace.j_ls.push_back(eval_nonlinear_cost(theta0, window));

  ParameterVector best = theta0;
  double best_cost = j_sk;
  double best_ls = out.trace.j_ls.front();
  int increases = 0;
  ParameterVector current = theta0;

  for (int it = 0; it < cfg.sk_max_iter; ++it) {
    const Eigen::VectorXcd den = denominator_values(current, window.offsets);
    if ((den.array().abs() < kDenominatorFloor).any()) {
      out.aborted = true;
      out.note = "reweighting denominator vanished";
      break;
    }
    const Eigen::VectorXcd weights = den.cwiseInverse();
    WindowSolve solve;
    try {
      solve = solve_window(assemble_weighted_regressor(window, current.layout, current.basis_scale, weights),
                           rcond_threshold);
    } catch (const Error& e) {
      out.aborted = true;
      out.note = e.what();
      break;
    }
    const double j_next = solve.residual.squaredNorm();
    double j_ls = std::numeric_limits<double>::infinity();
    try {
      j_ls = eval_nonlinear_cost(solve.theta, window);
    } catch (const Error&) {
      out.aborted = true;
      out.note = "model denominator vanished";
      break;
    }
    current = solve.theta;
    out.trace.j_sk.push_back(j_next);
    out.trace.j_ls.push_back(j_ls);
    ++out.trace.sk_steps;

    increases = j_next > j_sk ? increases + 1 : 0;
    const bool settled = j_sk == 0.0 || std::abs(j_sk - j_next) < cfg.rel_tol * j_sk;
    j_sk = j_next;
    if (j_next <= best_cost) {
      best_cost = j_next;
      best_ls = j_ls;
      best = current;
    }
    if (settled) {
      out.converged = true;
      break;
    }
    if (increases >= 3) {
      out.note = "SK cost increased three times in a row; returning best iterate";
      current = best;
      out.trace.j_sk.push_back(best_cost);
      out.trace.j_ls.push_back(best_ls);
      ++out.trace.sk_steps;
      break;
    }
  }
  out.theta = current;
  return out;
}

namespace {
ParameterVector apply_step(const ParameterVector& theta, const Eigen::VectorXd& step) {
  const Eigen::Index p = theta.values.size();
  ParameterVector out = theta;
  for (Eigen::Index i = 0; i < p; ++i) out.values(i) += cdouble{step(i), step(p + i)};
  return out;
}
}  // namespace

RefineResult lm_refine(const ParameterVector& theta_init, const LocalWindow& window, const RefineConfig& cfg) {
  cfg.validate();
  RefineResult out;
  out.theta = theta_init;
  double cost = eval_nonlinear_cost(theta_init, window);
  out.trace.j_sk.push_back(cost);
  out.trace.j_ls.push_back(cost);

  const double energy = window.outputs.squaredNorm();
  if (cost <= kExactFitRatio * energy) {
    out.converged = true;
    return out;
  }

  double lambda = cfg.lm_damping_init;
  for (int it = 0; it < cfg.lm_max_iter; ++it) {
    const ResidualJacobian rj = residual_jacobian(out.theta, window);
    const Eigen::MatrixXd h = rj.jacobian.transpose() * rj.jacobian;
    const Eigen::VectorXd g = rj.jacobian.transpose() * rj.residual;
    Eigen::VectorXd scale = h.diagonal();
    const double floor = std::max(scale.maxCoeff(), 1.0) * 1e-12;
    scale = scale.cwiseMax(floor);

    bool accepted = false;
    ParameterVector candidate;
    double candidate_cost = 0.0;
    while (lambda <= kDampingCap) {
      Eigen::MatrixXd damped = h;
      damped.diagonal() += lambda * scale;
      const Eigen::VectorXd step = damped.llt().solve(-g);
      if (step.allFinite()) {
        candidate = apply_step(out.theta, step);
        try {
          candidate_cost = eval_nonlinear_cost(candidate, window);
        } catch (const Error&) {
          candidate_cost = std::numeric_limits<double>::infinity();
        }
        if (candidate_cost < cost) {
          accepted = true;
          lambda = std::max(lambda * cfg.lm_damping_down, 1e-15);
          break;
        }
      }
      lambda *= cfg.lm_damping_up;
    }
    if (!accepted) {
      out.aborted = true;
      out.note = "damping limit reached";
      break;
    }

    out.trace.j_sk.push_back(eval_sk_cost(candidate, out.theta, window));
    out.trace.j_ls.push_back(candidate_cost);
    ++out.trace.lm_steps;
    const double decrease = (cost - candidate_cost) / cost;
    out.theta = candidate;
    cost = candidate_cost;
    if (decrease < cfg.rel_tol || cost <= kExactFitRatio * energy) {
      out.converged = true;
      break;
    }
  }
  return out;
}

MeanCosts mean_costs(std::span<const CostTrace> traces) {
  MeanCosts out;
  std::size_t count = 0;
  for (const auto& t : traces) {
    if (t.size() == 0) continue;
    out.mu_sk += t.j_sk.back();
    out.mu_oe += t.j_ls.back();
    ++count;
  }
  if (count > 0) {
    out.mu_sk /= static_cast<double>(count);
    out.mu_oe /= static_cast<double>(count);
  }
  return out;
}

MeanCostCurve mean_cost_curve(std::span<const CostTrace> traces) {
  std::size_t length = 0;
  std::size_t count = 0;
  for (const auto& t : traces) {
    length = std::max(length, t.size());
    if (t.size() > 0) ++count;
  }
  MeanCostCurve out;
  out.mu_sk.assign(length, 0.0);
  out.mu_oe.assign(length, 0.0);
  if (count == 0) return out;
  for (const auto& t : traces) {
    if (t.size() == 0) continue;
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t j = std::min(i, t.size() - 1);
      out.mu_sk[i] += t.j_sk[j];
      out.mu_oe[i] += t.j_ls[j];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    out.mu_sk[i] /= static_cast<double>(count);
    out.mu_oe[i] /= static_cast<double>(count);
  }
  return out;
}

RefinedSweep identify_frf_refined(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg,
                                  const RefineConfig& refine_cfg, bool with_lm, unsigned threads) {
  check_sweep_inputs(input, output, cfg);
  refine_cfg.validate();
  const std::size_t m = output.n_points();
  std::vector<BinEstimate> bins(m);
  RefinedSweep sweep;
  sweep.traces.resize(m);

  parallel_for(m, threads, [&](std::size_t k) {
    BinEstimate b = estimate_bin(input, output, k, cfg);
    if (b.status != BinStatus::Ok && b.status != BinStatus::NoDegreesOfFreedom) {
      bins[k] = std::move(b);
      return;
    }
    const LocalWindow window = make_window(input, output, k, cfg);
    const double scale = static_cast<double>(std::max(cfg.half_width, 1));
    const WindowSolve closed = solve_window(assemble_regressor(window, ParameterLayout::from(cfg), scale),
                                            cfg.rcond_threshold);
    try {
      RefineResult sk = sk_iterate(closed.theta, window, refine_cfg, cfg.rcond_threshold);
      CostTrace trace = sk.trace;
      ParameterVector theta = sk.theta;
      if (with_lm) {
        const RefineResult lm = lm_refine(theta, window, refine_cfg);
        trace.j_sk.insert(trace.j_sk.end(), lm.trace.j_sk.begin() + 1, lm.trace.j_sk.end());
        trace.j_ls.insert(trace.j_ls.end(), lm.trace.j_ls.begin() + 1, lm.trace.j_ls.end());
        trace.lm_steps = lm.trace.lm_steps;
        theta = lm.theta;
      }
      b.g_hat = extract_frf(theta).g_hat;
      b.transient = extract_frf(theta).transient;
      sweep.traces[k] = std::move(trace);
    } catch (const Error& e) {
      // The closed-form values stand when the starting point itself has a local pole.
      b.message = e.what();
    }
    bins[k] = std::move(b);
  });

  sweep.estimate = assemble_estimate(bins, cfg, input.n_points(), input.sampling_time,
                                     with_lm ? Method::LRM_SK_LM : Method::LRM_SK);
  return sweep;
}

}  // namespace mrfrf
