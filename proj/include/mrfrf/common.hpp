#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrfrf {

using cdouble = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  RankDeficient,
  LocalPole,
  DegreesOfFreedom,
  PoleOnGrid,
  Overflow,
  Io,
  Ingestion,
  GridMismatch,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `bin()` is set when the failure is tied to one
/// frequency bin of a sweep.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> bin = std::nullopt)
      : std::runtime_error(what), code_(code), bin_(bin) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> bin() const noexcept { return bin_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> bin_;
};

enum class Rate { Fast, Slow };

struct TimeSignal {
  std::vector<double> samples;
  double sampling_time = 1.0;
  Rate rate = Rate::Fast;

  std::size_t size() const { return samples.size(); }
};

/// DFT coefficients X(k), k = 0..n_points-1, of a record sampled every
/// `sampling_time` seconds.
struct Spectrum {
  std::vector<cdouble> coefficients;
  double sampling_time = 1.0;

  std::size_t n_points() const { return coefficients.size(); }
  const cdouble& operator[](std::size_t k) const { return coefficients[k]; }
  cdouble& operator[](std::size_t k) { return coefficients[k]; }

  /// Periodic access, any integer bin.
  cdouble at_wrapped(long long k) const {
    const auto n = static_cast<long long>(coefficients.size());
    long long m = k % n;
    if (m < 0) m += n;
    return coefficients[static_cast<std::size_t>(m)];
  }

  double bin_frequency_hz(std::size_t k) const {
    return static_cast<double>(k) / (static_cast<double>(n_points()) * sampling_time);
  }
};

struct FrequencyGrid {
  std::vector<double> omega;  // rad/s
  std::vector<std::size_t> bins;
};

/// Estimation method tags, also used in file names and CLI lists.
enum class Method { LRM, LPM, SA, LRM_SK, LRM_SK_LM };

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& name);

enum class BinStatus { Ok, RankDeficient, LocalPole, NoDegreesOfFreedom, NoInputPower };

const char* to_string(BinStatus s);
std::optional<BinStatus> parse_bin_status(const std::string& name);

/// Non-parametric FRF estimate on a grid of `n_points` equidistant bins.
/// `fast_bins[i]` maps point i to its bin on the fast N-point grid.
/// Transient and noise variance live on the slow M-point grid.
struct FrfEstimate {
  Method method = Method::LRM;
  double sampling_time = 1.0;   // fast sampling time
  std::size_t n_points = 0;     // grid size of this estimate
  std::size_t fast_points = 0;  // N
  std::vector<std::size_t> fast_bins;
  std::vector<cdouble> g_hat;
  std::vector<double> variance;
  std::vector<BinStatus> status;

  std::vector<cdouble> transient;
  std::vector<double> noise_variance;
  std::vector<BinStatus> slow_status;

  double frequency_hz(std::size_t i) const {
    return static_cast<double>(fast_bins[i]) / (static_cast<double>(fast_points) * sampling_time);
  }
};

}  // namespace mrfrf
