// Reference implementations used only by the tests. They share no code with
// the library beyond the plain data types.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mrfrf/common.hpp"

namespace oracle {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

/// O(N^2) summation of x(n) exp(-2 pi j k n / N).
inline std::vector<cd> direct_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc{};
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = -2.0 * kPi * static_cast<double>((k * i) % n) / static_cast<double>(n);
      acc += x[i] * cd(std::cos(arg), std::sin(arg));
    }
    out[k] = acc;
  }
  return out;
}

/// First `count` impulse response samples of b(q^-1)/a(q^-1) by long division.
inline std::vector<double> impulse_by_division(const std::vector<double>& b, const std::vector<double>& a,
                                               std::size_t count) {
  std::vector<double> rem(count, 0.0);
  for (std::size_t i = 0; i < b.size() && i < count; ++i) rem[i] = b[i];
  std::vector<double> h(count, 0.0);
  for (std::size_t n = 0; n < count; ++n) {
    h[n] = rem[n] / a[0];
    for (std::size_t i = 0; i < a.size() && n + i < count; ++i) rem[n + i] -= h[n] * a[i];
  }
  return h;
}

inline std::vector<double> convolve_truncated(const std::vector<double>& h, const std::vector<double>& u) {
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t n = 0; n < u.size(); ++n)
    for (std::size_t i = 0; i <= n && i < h.size(); ++i) y[n] += h[i] * u[n - i];
  return y;
}

/// B(Omega)/A(Omega), Omega = exp(-j 2 pi k / N).
inline cd rational_at_bin(const std::vector<double>& b, const std::vector<double>& a, std::size_t k, std::size_t n) {
  const double w = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
  cd num{}, den{};
  for (std::size_t i = 0; i < b.size(); ++i) num += b[i] * std::polar(1.0, w * static_cast<double>(i));
  for (std::size_t i = 0; i < a.size(); ++i) den += a[i] * std::polar(1.0, w * static_cast<double>(i));
  return num / den;
}

inline cd wrap(const std::vector<cd>& x, long long k) {
  const auto n = static_cast<long long>(x.size());
  return x[static_cast<std::size_t>(((k % n) + n) % n)];
}

struct LocalFit {
  std::vector<cd> g;  // per band
  cd t;
  double noise_variance = 0.0;
  std::vector<double> variance;  // per band
};

/// Multiband local model over one window, written from the model equation:
/// Y(k+r) * (1 + sum e_s rho^s) = sum_f sum_s g_{s,f} rho^s U(k+r+fM) + sum_s t_s rho^s
/// with rho = r / max(nw, 1). Solved by a singular value decomposition.
/// Variance via the explicit inverse of K K^H.
inline LocalFit local_fit(const std::vector<cd>& u, const std::vector<cd>& y, std::size_t k, int nw, int factor,
                          int rg, int rt, int re) {
  const long long m = static_cast<long long>(y.size());
  long long lo = static_cast<long long>(k) - nw, hi = static_cast<long long>(k) + nw;
  if (static_cast<long long>(k) <= nw) {
    lo = 0;
    hi = 2 * nw;
  } else if (static_cast<long long>(k) > m - nw) {
    lo = m - 2 * nw;
    hi = m;
  }
  const int width = static_cast<int>(hi - lo + 1);
  const int params = (rg + 1) * factor + (rt + 1) + re;
  const double scale = std::max(nw, 1);
  Eigen::MatrixXcd a(width, params);
  Eigen::VectorXcd rhs(width);
  for (int i = 0; i < width; ++i) {
    const long long bin = lo + i;
    const double rho = static_cast<double>(bin - static_cast<long long>(k)) / scale;
    const cd yv = wrap(y, bin);
    int c = 0;
    for (int s = 0; s <= rg; ++s)
      for (int f = 0; f < factor; ++f) a(i, c++) = std::pow(rho, s) * wrap(u, bin + f * m);
    for (int s = 0; s <= rt; ++s) a(i, c++) = std::pow(rho, s);
    for (int s = 1; s <= re; ++s) a(i, c++) = -std::pow(rho, s) * yv;
    rhs(i) = yv;
  }
  const Eigen::VectorXcd theta = a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  const Eigen::VectorXcd res = rhs - a * theta;
  LocalFit out;
  for (int f = 0; f < factor; ++f) out.g.push_back(static_cast<double>(factor) * theta(f));
  out.t = theta((rg + 1) * factor);
  const int q = width - params;
  if (q > 0) {
    out.noise_variance = res.squaredNorm() / q;
    const Eigen::MatrixXcd inv = (a.adjoint() * a).inverse();
    for (int f = 0; f < factor; ++f)
      out.variance.push_back(static_cast<double>(factor * factor) * inv(f, f).real() * out.noise_variance);
  }
  return out;
}

inline double relative_error(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline std::vector<double> random_signal(std::size_t n, unsigned seed, double amplitude = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, amplitude);
  std::vector<double> x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

}  // namespace oracle
