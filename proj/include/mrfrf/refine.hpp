#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "mrfrf/estimator.hpp"

namespace mrfrf {

struct RefineConfig {
  int sk_max_iter = 30;
  int lm_max_iter = 300;
  double rel_tol = 1e-9;
  double lm_damping_init = 1e-3;
  double lm_damping_up = 10.0;
  double lm_damping_down = 0.1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Per-iteration costs of one window, index 0 is the starting point.
/// sk_steps + lm_steps + 1 == j_ls.size() == j_sk.size().
struct CostTrace {
  std::vector<double> j_sk;
  std::vector<double> j_ls;
  int sk_steps = 0;
  int lm_steps = 0;

  std::size_t size() const { return j_ls.size(); }
};

struct RefineResult {
  ParameterVector theta;
  CostTrace trace;
  bool converged = false;  // stopped on rel_tol (or exact fit) rather than iteration cap
  bool aborted = false;    // SK hit a vanishing reweighting denominator / LM hit the damping cap
  std::string note;
};

/// Sum over the window of |Y(k+r) - Yhat(k+r, theta)|^2.
double eval_nonlinear_cost(const ParameterVector& theta, const LocalWindow& window);

/// Reweighted cost of `theta` using the denominator of `previous`:
/// sum |den(theta)/den(previous) * (Y - Yhat(theta))|^2.
double eval_sk_cost(const ParameterVector& theta, const ParameterVector& previous, const LocalWindow& window);

/// Sanathanan-Koerner iterations starting from the closed-form solution.
/// After three consecutive cost increases the best iterate is returned and
/// its costs are repeated as the last trace entry.
RefineResult sk_iterate(const ParameterVector& theta0, const LocalWindow& window, const RefineConfig& cfg,
                        double rcond_threshold = 1e-12);

/// Levenberg-Marquardt on the non-linear cost. Accepted steps strictly decrease
/// the cost, so the returned cost never exceeds that of `theta_init`.
RefineResult lm_refine(const ParameterVector& theta_init, const LocalWindow& window, const RefineConfig& cfg);

/// Real-stacked residual [Re e; Im e] with e = Y - Yhat, and its Jacobian with
/// respect to the parameters stacked as [Re theta; Im theta].
struct ResidualJacobian {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
};

Eigen::VectorXd stacked_residual(const ParameterVector& theta, const LocalWindow& window);
ResidualJacobian residual_jacobian(const ParameterVector& theta, const LocalWindow& window);

struct MeanCosts {
  double mu_sk = 0.0;
  double mu_oe = 0.0;
};

/// Averages over windows at the final iterate of every trace.
MeanCosts mean_costs(std::span<const CostTrace> traces);

/// Averages over windows per iteration; shorter traces hold their last value.
struct MeanCostCurve {
  std::vector<double> mu_sk;
  std::vector<double> mu_oe;
};

MeanCostCurve mean_cost_curve(std::span<const CostTrace> traces);

struct RefinedSweep {
  FrfEstimate estimate;
  std::vector<CostTrace> traces;  // one per slow bin; empty for failed bins
};

/// Closed form, then `sk_max_iter` SK iterations, then (when `with_lm`)
/// `lm_max_iter` LM iterations on every window. Variances are the closed-form
/// ones.
RefinedSweep identify_frf_refined(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg,
                                  const RefineConfig& refine_cfg, bool with_lm, unsigned threads = 1);

}  // namespace mrfrf
