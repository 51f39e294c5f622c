#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mrfrf/common.hpp"

namespace mrfrf {

/// Local model orders for the multiband estimator.
///
/// Over a window of 2*half_width+1 slow bins around bin k, the slow output is
/// modeled as
///
///   Y(k+r) ~ [ sum_f sum_{s<=Rg} g_{s,f} r^s U(k+r+fM) + sum_{s<=Rt} t_s r^s ]
///            / (1 + sum_{1<=s<=Re} e_s r^s)
///
/// so one window yields the FRF at the F aliased fast bins k+fM jointly.
struct EstimatorConfig {
  int factor = 1;
  int half_width = 0;
  int system_degree = 0;
  int transient_degree = 0;
  int denominator_degree = 0;
  double rcond_threshold = 1e-12;

  /// Degrees from per-band orders: Rg = Rn + Rd(F-1), Rt = Rm + Rd(F-1),
  /// Re = Rd F.
  static EstimatorConfig from_band_orders(int factor, int half_width, int numerator_degree,
                                         int denominator_degree, int transient_degree);

  int parameter_count() const {
    return (system_degree + 1) * factor + transient_degree + 1 + denominator_degree;
  }
  int window_length() const { return 2 * half_width + 1; }
  int degrees_of_freedom() const { return window_length() - parameter_count(); }
};

/// Index bookkeeping of the parameter row vector
/// [theta_G (F), theta_g (Rg*F, power-major), T, t_1..t_Rt, e_1..e_Re].
struct ParameterLayout {
  int factor = 1;
  int system_degree = 0;
  int transient_degree = 0;
  int denominator_degree = 0;

  static ParameterLayout from(const EstimatorConfig& cfg) {
    return {cfg.factor, cfg.system_degree, cfg.transient_degree, cfg.denominator_degree};
  }

  int size() const { return (system_degree + 1) * factor + transient_degree + 1 + denominator_degree; }
  int system_index(int power, int band) const { return power * factor + band; }
  int transient_index(int power) const { return (system_degree + 1) * factor + power; }
  int denominator_index(int power) const {  // power >= 1
    return (system_degree + 1) * factor + transient_degree + power;
  }
  /// Power of r multiplying parameter i.
  int power_of(int i) const;
};

/// Parameters of one window. Coefficients multiply (r / basis_scale)^s.
struct ParameterVector {
  ParameterLayout layout;
  Eigen::VectorXcd values;
  double basis_scale = 1.0;

  /// Same model expressed in another basis scale.
  ParameterVector rescaled(double new_scale) const;
};

/// Slow bin range [first, last] used for center bin k (last may equal M).
struct BinRange {
  long long first = 0;
  long long last = 0;
};

BinRange band_window(std::size_t k, int half_width, std::size_t slow_points);

/// Data of one estimation window: offsets r, slow outputs Y(k+r) and the
/// lifted inputs U(k+r+fM) (row f).
struct LocalWindow {
  std::size_t center = 0;
  std::vector<int> offsets;
  Eigen::VectorXcd outputs;
  Eigen::MatrixXcd inputs;

  int length() const { return static_cast<int>(offsets.size()); }
};

LocalWindow make_window(const Spectrum& input, const Spectrum& output, std::size_t k,
                        const EstimatorConfig& cfg);

/// K_w (parameters x window) and Y_w for one window. Polynomial rows use the
/// basis (r / basis_scale)^s with basis_scale = max(half_width, 1).
struct Regressor {
  std::size_t center = 0;
  ParameterLayout layout;
  std::vector<int> offsets;
  double basis_scale = 1.0;
  Eigen::MatrixXcd k_w;
  Eigen::RowVectorXcd y_w;
};

/// Throws InvalidConfig on a window that is too small for the parameter count
/// or larger than the slow record.
Regressor build_regressor(const Spectrum& input, const Spectrum& output, std::size_t k,
                          const EstimatorConfig& cfg);

Regressor assemble_regressor(const LocalWindow& window, const ParameterLayout& layout,
                             double basis_scale);
Regressor assemble_weighted_regressor(const LocalWindow& window, const ParameterLayout& layout,
                                      double basis_scale, const Eigen::VectorXcd& weights);

struct WindowSolve {
  std::size_t center = 0;
  ParameterVector theta;
  Eigen::RowVectorXcd residual;
  int dof = 0;
  double rcond = 0.0;
  /// Diagonal of (K_w K_w^H)^-1 for the F system parameters.
  Eigen::VectorXd system_gain_diag;
  /// Same quantities with the equation error scaled by the fitted local
  /// denominator e(r): sum_r |e(r)|^2 (1 - P_rr) and, per band,
  /// sum_r |S_f(r)|^2 |e(r)|^2 with S_f = K_w^H (K_w K_w^H)^-1 1_f.
  /// They equal dof and system_gain_diag when the model has no denominator.
  double noise_scale = 0.0;
  Eigen::VectorXd system_gain_weighted;
};

/// Least-squares solution of Y_w = theta K_w through a pivoted QR of K_w^T.
/// Throws RankDeficient (naming the bin) when the reciprocal condition number
/// (1-norm, triangular factor) falls below `rcond_threshold`.
WindowSolve solve_window(const Regressor& reg, double rcond_threshold = 1e-12);

struct BandValues {
  std::vector<cdouble> g_hat;  // at fast bins k + fM
  cdouble transient;           // transient contribution at slow bin k
};

BandValues extract_frf(const ParameterVector& theta);

/// (1/q) ||residual||^2. Throws DegreesOfFreedom when q == 0.
double estimate_noise_variance(const Eigen::RowVectorXcd& residual, int dof);

/// F^2 [(K_w K_w^H)^-1]_{ff} C_v for each band f.
std::vector<double> estimate_frf_variance(const WindowSolve& solve, double noise_variance);

/// Denominator-aware noise variance ||residual||^2 / noise_scale.
double estimate_noise_variance(const WindowSolve& solve);
/// F^2 system_gain_weighted(f) C_v for each band f.
std::vector<double> estimate_frf_variance_weighted(const WindowSolve& solve, double noise_variance);

/// Rationally weighted model output at offset r (must be one of the window's
/// offsets). Throws LocalPole when the denominator vanishes.
cdouble eval_estimated_output(const ParameterVector& theta, const LocalWindow& window, int index);

/// Denominator 1 + sum e_s (r/scale)^s at each window offset.
Eigen::VectorXcd denominator_values(const ParameterVector& theta, const std::vector<int>& offsets);

struct ConfigViolation {
  std::string label;  // window-too-small | window-too-large | input-not-rough | ...
  std::string message;
};

/// All violated identifiability conditions. Empty when the configuration can
/// be used with this input.
std::vector<ConfigViolation> validate_config(const EstimatorConfig& cfg, std::size_t slow_points,
                                             const Spectrum* input = nullptr,
                                             double roughness_tol = 1e-12);

/// Everything one window contributes to an FrfEstimate.
struct BinEstimate {
  std::vector<cdouble> g_hat;      // F band values
  std::vector<double> variance;    // F band values
  cdouble transient{};
  double noise_variance = 0.0;
  BinStatus status = BinStatus::Ok;
  std::string message;
};

/// Closed-form estimate of one window, failures folded into the status.
BinEstimate estimate_bin(const Spectrum& input, const Spectrum& output, std::size_t k,
                         const EstimatorConfig& cfg);

/// Scatters per-slow-bin results onto the fast grid through k + fM.
FrfEstimate assemble_estimate(const std::vector<BinEstimate>& bins, const EstimatorConfig& cfg,
                              std::size_t fast_points, double fast_sampling_time, Method tag);

/// Throws InvalidInput/InvalidConfig when the spectra and config cannot be
/// combined (length mismatch, window conditions).
void check_sweep_inputs(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg);

/// Closed-form estimate for every slow bin. Per-bin failures are reported in
/// the status vectors; the sweep never aborts on a single bad window.
FrfEstimate identify_frf(const Spectrum& input, const Spectrum& output, const EstimatorConfig& cfg,
                         Method tag = Method::LRM, unsigned threads = 1);

/// Runs `fn(k)` for k in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace mrfrf
