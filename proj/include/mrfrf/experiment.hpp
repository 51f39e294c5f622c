#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrfrf/estimator.hpp"
#include "mrfrf/harness.hpp"
#include "mrfrf/lti.hpp"
#include "mrfrf/refine.hpp"

namespace mrfrf {

namespace fs = std::filesystem;

/// Either resonant modes or explicit b/a coefficients (inline or from a file).
struct PlantSpec {
  std::vector<ResonantMode> modes;
  double feedthrough = 0.0;
  std::optional<RationalSystem> system;

  RationalSystem build(double sampling_time) const;
};

struct ExperimentConfig {
  double fast_sampling_time = 0.0;
  int downsampling_factor = 1;
  std::size_t number_of_input_samples = 0;

  std::optional<PlantSpec> plant;

  double excitation_rms = 1.0;
  std::uint64_t excitation_seed = 0;
  std::optional<std::vector<std::size_t>> excited_bins;

  std::optional<double> noise_snr_db;
  std::optional<double> noise_variance;
  std::uint64_t noise_seed = 1;

  EstimatorConfig estimator;
  EstimatorConfig lpm;
  SaConfig sa;
  RefineConfig refine;
  std::vector<Method> methods{Method::LRM};

  // Empty entries default to <output_directory>/{u_h,y_l,true_frf}.csv.
  std::string input_file;
  std::string output_file;
  std::string true_frf_file;

  std::string output_directory = "out";
  unsigned threads = 1;

  std::size_t slow_points() const {
    return number_of_input_samples / static_cast<std::size_t>(downsampling_factor);
  }
  double slow_sampling_time() const { return fast_sampling_time * downsampling_factor; }

  /// --seed s: excitation seed s, noise seed s + 1.
  void apply_seed(std::uint64_t seed);

  /// Structural checks that need no data (positive times, N divisible by F,
  /// window conditions, refinement and SA settings). Throws InvalidConfig.
  void check() const;
};

/// JSON text. Unknown keys and wrong types are InvalidConfig errors naming
/// `origin`. Paths in the file are used as written.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const fs::path& path);

/// Estimator configuration used by a local method.
EstimatorConfig estimator_for(const ExperimentConfig& cfg, Method m);

struct SimulatedData {
  RationalSystem system;
  TimeSignal u_h;
  TimeSignal y_h;  // noiseless fast output
  TimeSignal y_l;  // noisy slow output
  Spectrum true_frf;
  double noise_variance = 0.0;
};

/// Deterministic in the seeds.
SimulatedData simulate_experiment(const ExperimentConfig& cfg);

struct ValidationReport {
  std::vector<ConfigViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Window conditions for every requested local method plus the roughness of
/// `input` (when given).
ValidationReport validate_experiment(const ExperimentConfig& cfg, const Spectrum* input);

struct RunSummary {
  std::vector<fs::path> files;
  std::vector<std::string> lines;  // human-readable report
};

/// Every run validates first and writes its files only after all results are
/// computed.
RunSummary run_simulate(const ExperimentConfig& cfg);
RunSummary run_identify(const ExperimentConfig& cfg);
RunSummary run_compare(const ExperimentConfig& cfg);
/// Throws InvalidConfig naming every violated condition.
RunSummary run_validate(const ExperimentConfig& cfg);

/// File-name stem of a method: lrm, lpm, sa, lrm_sk, lrm_sk_lm.
std::string method_slug(Method m);

/// Process exit code for an error: 2 config/validation, 3 numerical, 4 I/O.
int exit_code_for(ErrorCode code);

}  // namespace mrfrf
