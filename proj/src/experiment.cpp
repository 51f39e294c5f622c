#include "mrfrf/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mrfrf/io.hpp"
#include "mrfrf/signals.hpp"

namespace mrfrf {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& origin, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, origin + ": " + what);
}

/// Strict reader over one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& j, std::string path, std::string origin)
      : j_(j), path_(std::move(path)), origin_(std::move(origin)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const std::string& origin() const { return origin_; }

  template <class T>
  std::optional<T> get(const char* key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  template <class T>
  void read(const char* key, T& target) {
    if (auto v = get<T>(key)) target = *v;
  }

  Section child(const char* key) {
    used_.insert(key);
    return Section(j_.at(key), name(key), origin_);
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(it.key().c_str(), "unknown key");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    config_error(origin_, (key.empty() ? path_ : name(key)) + ": " + what);
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::string origin_;
  std::set<std::string> used_;
};

void read_estimator(Section s, EstimatorConfig& cfg) {
  s.read("window_size", cfg.half_width);
  s.read("system_numerator_degree", cfg.system_degree);
  s.read("transient_numerator_degree", cfg.transient_degree);
  s.read("denominator_degree", cfg.denominator_degree);
  s.read("rcond_threshold", cfg.rcond_threshold);
  s.finish();
}

PlantSpec read_plant(Section s) {
  PlantSpec p;
  const bool modes = s.has("modes");
  const bool coeffs = s.has("b") || s.has("a");
  const bool file = s.has("system_file");
  if (int(modes) + int(coeffs) + int(file) != 1) s.fail("", "give exactly one of modes, b/a or system_file");
  if (modes) {
    const json& list = s.raw("modes");
    if (!list.is_array() || list.empty()) s.fail("modes", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section m(list[i], "plant.modes[" + std::to_string(i) + "]", s.origin());
      ResonantMode mode;
      m.read("frequency_hz", mode.frequency_hz);
      m.read("damping", mode.damping);
      m.read("gain", mode.gain);
      m.finish();
      p.modes.push_back(mode);
    }
    s.read("feedthrough", p.feedthrough);
  } else if (coeffs) {
    RationalSystem sys;
    auto b = s.get<std::vector<double>>("b");
    auto a = s.get<std::vector<double>>("a");
    if (!b || !a) s.fail("", "both b and a are required");
    sys.b = *b;
    sys.a = *a;
    p.system = sys;
  } else {
    auto path = s.get<std::string>("system_file");
    p.system = io::read_system(*path).system;
  }
  s.finish();
  return p;
}

std::string join_labels(const std::vector<ConfigViolation>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x.label + ": " + x.message;
  return s;
}

bool is_local(Method m) { return m != Method::SA; }

fs::path data_path(const ExperimentConfig& cfg, const std::string& given, const char* fallback) {
  return given.empty() ? fs::path(cfg.output_directory) / fallback : fs::path(given);
}

struct MethodResult {
  Method method;
  FrfEstimate estimate;
  std::vector<CostTrace> traces;
  bool refined = false;
};

std::vector<io::ComparisonRow> comparison_rows(const ExperimentConfig& cfg, const Spectrum& truth,
                                               const std::vector<std::optional<FrfEstimate>>& estimates,
                                               std::vector<io::ComparisonRow>& ranking) {
  const std::size_t half = cfg.number_of_input_samples / 2;
  std::vector<io::ComparisonRow> rows;
  ranking.clear();
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const std::string name = to_string(cfg.methods[i]);
    if (!estimates[i]) {
      rows.push_back({name, half, 0.0, true});
      ranking.push_back({name, half, 0.0, true});
      continue;
    }
    const auto curve = cumulative_frf_error_curve(truth, *estimates[i], half);
    for (std::size_t n = 1; n <= half; ++n) rows.push_back({name, n, curve[n], false});
    ranking.push_back({name, half, curve[half], false});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.absent != b.absent) return b.absent;
    return !a.absent && a.value < b.value;
  });
  return rows;
}

std::string ranking_csv(const std::vector<io::ComparisonRow>& ranking) {
  std::string s = "rank,method,cumulative_error\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    s += std::to_string(i + 1) + "," + ranking[i].method + "," +
         (ranking[i].absent ? std::string("absent") : io::format_double(ranking[i].value)) + "\n";
  return s;
}

void report_ranking(const std::vector<io::ComparisonRow>& ranking, RunSummary& out) {
  for (std::size_t i = 0; i < ranking.size(); ++i)
    out.lines.push_back(std::to_string(i + 1) + ". " + ranking[i].method + "  " +
                        (ranking[i].absent ? std::string("absent") : io::format_double(ranking[i].value)));
}

struct PendingFile {
  fs::path path;
  std::string content;
};

void flush(const std::vector<PendingFile>& files, const std::string& dir, RunSummary& out) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  for (const auto& f : files) {
    io::write_text(f.path, f.content);
    out.files.push_back(f.path);
  }
}

}  // namespace

RationalSystem PlantSpec::build(double sampling_time) const {
  if (system) {
    system->validate();
    return *system;
  }
  return make_resonant_plant(modes, sampling_time, feedthrough);
}

void ExperimentConfig::apply_seed(std::uint64_t seed) {
  excitation_seed = seed;
  noise_seed = seed + 1;
}

void ExperimentConfig::check() const {
  if (!(fast_sampling_time > 0.0)) throw Error(ErrorCode::InvalidConfig, "fast_sampling_time must be positive");
  if (downsampling_factor < 1) throw Error(ErrorCode::InvalidConfig, "invalid-factor: downsampling_factor must be >= 1");
  if (number_of_input_samples == 0) throw Error(ErrorCode::InvalidConfig, "number_of_input_samples must be positive");
  if (number_of_input_samples % static_cast<std::size_t>(downsampling_factor) != 0)
    throw Error(ErrorCode::InvalidConfig, "number_of_input_samples " + std::to_string(number_of_input_samples) +
                                              " is not divisible by the downsampling factor " +
                                              std::to_string(downsampling_factor));
  if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "no methods requested");
  if (noise_snr_db && noise_variance) throw Error(ErrorCode::InvalidConfig, "noise: give snr_db or variance, not both");
  if (noise_variance && *noise_variance < 0.0) throw Error(ErrorCode::InvalidConfig, "noise variance must be >= 0");
  if (!(excitation_rms > 0.0)) throw Error(ErrorCode::InvalidConfig, "excitation rms must be positive");
  if (excited_bins)
    for (std::size_t b : *excited_bins)
      if (b == 0 || b > number_of_input_samples / 2)
        throw Error(ErrorCode::InvalidConfig, "excited bin " + std::to_string(b) + " outside 1..N/2");
  refine.validate();
  if (std::find(methods.begin(), methods.end(), Method::SA) != methods.end()) sa.validate(number_of_input_samples);
  const ValidationReport r = validate_experiment(*this, nullptr);
  if (!r.ok()) throw Error(ErrorCode::InvalidConfig, join_labels(r.violations));
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(origin, std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(j, "", origin);
  top.read("fast_sampling_time", cfg.fast_sampling_time);
  top.read("downsampling_factor", cfg.downsampling_factor);
  top.read("number_of_input_samples", cfg.number_of_input_samples);
  if (auto v = top.get<double>("slow_sampling_time"))
    if (std::abs(*v - cfg.slow_sampling_time()) > 1e-12 * std::max(1.0, *v))
      top.fail("slow_sampling_time", "inconsistent with fast_sampling_time * downsampling_factor");
  if (auto v = top.get<std::size_t>("number_of_output_samples"))
    if (cfg.downsampling_factor < 1 || *v * static_cast<std::size_t>(cfg.downsampling_factor) != cfg.number_of_input_samples)
      top.fail("number_of_output_samples", "inconsistent with number_of_input_samples / downsampling_factor");

  cfg.estimator.factor = cfg.downsampling_factor;
  cfg.lpm = EstimatorConfig{cfg.downsampling_factor, 0, 2, 2, 0};
  if (top.has("estimator")) read_estimator(top.child("estimator"), cfg.estimator);
  cfg.lpm.half_width = cfg.estimator.half_width;
  cfg.lpm.rcond_threshold = cfg.estimator.rcond_threshold;
  if (top.has("lpm")) read_estimator(top.child("lpm"), cfg.lpm);
  cfg.lpm.factor = cfg.downsampling_factor;
  cfg.estimator.factor = cfg.downsampling_factor;
  if (cfg.lpm.denominator_degree != 0) top.fail("lpm.denominator_degree", "LPM has no denominator");

  if (top.has("plant")) cfg.plant = read_plant(top.child("plant"));

  if (top.has("excitation")) {
    Section s = top.child("excitation");
    s.read("rms", cfg.excitation_rms);
    s.read("seed", cfg.excitation_seed);
    cfg.excited_bins = s.get<std::vector<std::size_t>>("excited_bins");
    s.finish();
  }
  if (top.has("noise")) {
    Section s = top.child("noise");
    cfg.noise_snr_db = s.get<double>("snr_db");
    cfg.noise_variance = s.get<double>("variance");
    s.read("seed", cfg.noise_seed);
    s.finish();
  }
  if (top.has("spectral_analysis")) {
    Section s = top.child("spectral_analysis");
    s.read("segment_length", cfg.sa.segment_length);
    s.read("overlap", cfg.sa.overlap);
    s.finish();
  }
  if (top.has("refine")) {
    Section s = top.child("refine");
    s.read("sk_iterations", cfg.refine.sk_max_iter);
    s.read("lm_iterations", cfg.refine.lm_max_iter);
    s.read("rel_tol", cfg.refine.rel_tol);
    s.read("lm_damping_init", cfg.refine.lm_damping_init);
    s.read("lm_damping_up", cfg.refine.lm_damping_up);
    s.read("lm_damping_down", cfg.refine.lm_damping_down);
    s.finish();
  }
  if (auto names = top.get<std::vector<std::string>>("methods")) {
    cfg.methods.clear();
    for (const auto& n : *names) {
      auto m = parse_method(n);
      if (!m) top.fail("methods", "unknown method '" + n + "'");
      if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) != cfg.methods.end())
        top.fail("methods", "duplicate method '" + n + "'");
      cfg.methods.push_back(*m);
    }
  }
  if (top.has("data")) {
    Section s = top.child("data");
    s.read("input", cfg.input_file);
    s.read("output", cfg.output_file);
    s.read("true_frf", cfg.true_frf_file);
    s.finish();
  }
  top.read("output_directory", cfg.output_directory);
  top.read("threads", cfg.threads);
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(io::read_text(path), path.string()); }

EstimatorConfig estimator_for(const ExperimentConfig& cfg, Method m) {
  return m == Method::LPM ? cfg.lpm : cfg.estimator;
}

SimulatedData simulate_experiment(const ExperimentConfig& cfg) {
  if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "simulate needs a plant section");
  const double t = cfg.fast_sampling_time;
  SimulatedData d;
  d.system = cfg.plant->build(t);
  MultisineSpec ms;
  ms.n_points = cfg.number_of_input_samples;
  ms.rms = cfg.excitation_rms;
  ms.seed = cfg.excitation_seed;
  ms.excited_bins = cfg.excited_bins ? *cfg.excited_bins : default_excited_bins(ms.n_points);
  d.u_h = generate_multisine(ms, t);
  d.y_h = simulate(d.system, d.u_h);
  const TimeSignal clean = downsample(d.y_h, cfg.downsampling_factor);
  if (cfg.noise_snr_db) d.noise_variance = noise_variance_for_snr(clean, *cfg.noise_snr_db);
  else if (cfg.noise_variance) d.noise_variance = *cfg.noise_variance;
  d.y_l = d.noise_variance > 0.0 ? add_noise(clean, {d.noise_variance, cfg.noise_seed, std::nullopt}) : clean;
  d.true_frf = freqresp(d.system, cfg.number_of_input_samples, t);
  return d;
}

ValidationReport validate_experiment(const ExperimentConfig& cfg, const Spectrum* input) {
  ValidationReport r;
  std::vector<EstimatorConfig> seen;
  for (Method m : cfg.methods) {
    if (!is_local(m)) continue;
    const EstimatorConfig e = estimator_for(cfg, m);
    const bool dup = std::any_of(seen.begin(), seen.end(), [&](const EstimatorConfig& s) {
      return s.half_width == e.half_width && s.system_degree == e.system_degree &&
             s.transient_degree == e.transient_degree && s.denominator_degree == e.denominator_degree;
    });
    if (dup) continue;
    seen.push_back(e);
    for (auto v : validate_config(e, cfg.slow_points(), input)) {
      v.message = std::string(to_string(m)) + ": " + v.message;
      // roughness depends only on the window, report it once
      const bool repeated = std::any_of(r.violations.begin(), r.violations.end(), [&](const ConfigViolation& x) {
        return x.label == "input-not-rough" && v.label == "input-not-rough";
      });
      if (!repeated) r.violations.push_back(v);
    }
  }
  return r;
}

RunSummary run_simulate(const ExperimentConfig& cfg) {
  cfg.check();
  const SimulatedData d = simulate_experiment(cfg);
  const ValidationReport r = validate_experiment(cfg, nullptr);
  if (!r.ok()) throw Error(ErrorCode::InvalidConfig, join_labels(r.violations));

  const fs::path dir = cfg.output_directory;
  RunSummary out;
  flush({{dir / "u_h.csv", io::time_signal_csv(d.u_h)},
         {dir / "y_h.csv", io::time_signal_csv(d.y_h)},
         {dir / "y_l.csv", io::time_signal_csv(d.y_l)},
         {dir / "true_frf.csv", io::spectrum_csv(d.true_frf)},
         {dir / "system.txt", io::system_text(d.system, cfg.fast_sampling_time)}},
        cfg.output_directory, out);
  out.lines.push_back("simulated " + std::to_string(d.u_h.size()) + " input and " + std::to_string(d.y_l.size()) +
                      " output samples, noise variance " + io::format_double(d.noise_variance));
  return out;
}

namespace {

struct LoadedData {
  TimeSignal u_h;
  TimeSignal y_l;
};

LoadedData load_data(const ExperimentConfig& cfg) {
  LoadedData d;
  const fs::path up = data_path(cfg, cfg.input_file, "u_h.csv");
  const fs::path yp = data_path(cfg, cfg.output_file, "y_l.csv");
  d.u_h = io::read_time_signal(up, cfg.fast_sampling_time, Rate::Fast);
  d.y_l = io::read_time_signal(yp, cfg.slow_sampling_time(), Rate::Slow);
  if (d.u_h.size() != cfg.number_of_input_samples)
    throw Error(ErrorCode::Ingestion, up.string() + ": " + std::to_string(d.u_h.size()) + " samples, config expects " +
                                          std::to_string(cfg.number_of_input_samples));
  if (d.y_l.size() != cfg.slow_points())
    throw Error(ErrorCode::Ingestion, yp.string() + ": " + std::to_string(d.y_l.size()) + " samples, config expects " +
                                          std::to_string(cfg.slow_points()));
  return d;
}

std::optional<Spectrum> load_truth(const ExperimentConfig& cfg, bool required) {
  const fs::path p = data_path(cfg, cfg.true_frf_file, "true_frf.csv");
  if (!required && !fs::exists(p)) return std::nullopt;
  Spectrum s = io::read_spectrum(p, cfg.fast_sampling_time);
  if (s.n_points() != cfg.number_of_input_samples)
    throw Error(ErrorCode::GridMismatch, p.string() + ": " + std::to_string(s.n_points()) +
                                             " bins, config expects " + std::to_string(cfg.number_of_input_samples));
  return s;
}

}  // namespace

RunSummary run_identify(const ExperimentConfig& cfg) {
  cfg.check();
  const LoadedData data = load_data(cfg);
  const Spectrum u = dft(data.u_h);
  const Spectrum y = dft(data.y_l);
  const ValidationReport r = validate_experiment(cfg, &u);
  if (!r.ok()) throw Error(ErrorCode::InvalidConfig, join_labels(r.violations));
  const std::optional<Spectrum> truth = load_truth(cfg, false);

  std::vector<MethodResult> results;
  for (Method m : cfg.methods) {
    MethodResult res{m, {}, {}, false};
    switch (m) {
      case Method::LRM:
      case Method::LPM:
        res.estimate = identify_frf(u, y, estimator_for(cfg, m), m, cfg.threads);
        break;
      case Method::SA:
        res.estimate = spectral_analysis(data.u_h, data.y_l, cfg.downsampling_factor, cfg.sa);
        break;
      case Method::LRM_SK:
      case Method::LRM_SK_LM: {
        RefinedSweep sweep =
            identify_frf_refined(u, y, cfg.estimator, cfg.refine, m == Method::LRM_SK_LM, cfg.threads);
        res.estimate = std::move(sweep.estimate);
        res.estimate.method = m;
        res.traces = std::move(sweep.traces);
        res.refined = true;
        break;
      }
    }
    results.push_back(std::move(res));
  }

  const fs::path dir = cfg.output_directory;
  std::vector<PendingFile> files;
  RunSummary out;
  for (const auto& res : results) {
    const std::string slug = method_slug(res.method);
    files.push_back({dir / ("frf_" + slug + ".csv"), io::frf_csv(res.estimate)});
    files.push_back({dir / ("std_" + slug + ".csv"), io::stddev_csv(res.estimate)});
    if (is_local(res.method))
      files.push_back({dir / ("transient_" + slug + ".csv"), io::transient_csv(res.estimate, cfg.downsampling_factor)});
    if (res.refined) {
      files.push_back({dir / ("traces_" + slug + ".csv"), io::traces_csv(res.traces)});
      files.push_back({dir / ("mean_costs_" + slug + ".csv"), io::mean_costs_csv(mean_cost_curve(res.traces))});
      const MeanCosts mc = mean_costs(res.traces);
      out.lines.push_back(std::string(to_string(res.method)) + ": mu_SK " + io::format_double(mc.mu_sk) + ", mu_OE " +
                          io::format_double(mc.mu_oe));
    }
    const auto failed = static_cast<std::size_t>(
        std::count_if(res.estimate.status.begin(), res.estimate.status.end(),
                      [](BinStatus s) { return s != BinStatus::Ok; }));
    out.lines.push_back(std::string(to_string(res.method)) + ": " + std::to_string(res.estimate.n_points) +
                        " bins, " + std::to_string(failed) + " flagged");
  }
  if (truth) {
    std::vector<std::optional<FrfEstimate>> estimates;
    for (const auto& res : results) estimates.emplace_back(res.estimate);
    std::vector<io::ComparisonRow> ranking;
    const auto rows = comparison_rows(cfg, *truth, estimates, ranking);
    files.push_back({dir / "comparison.csv", io::comparison_csv(rows)});
    files.push_back({dir / "ranking.csv", ranking_csv(ranking)});
    report_ranking(ranking, out);
  }
  flush(files, cfg.output_directory, out);
  return out;
}

RunSummary run_compare(const ExperimentConfig& cfg) {
  cfg.check();
  const Spectrum truth = *load_truth(cfg, true);
  const fs::path dir = cfg.output_directory;
  std::vector<std::optional<FrfEstimate>> estimates;
  RunSummary out;
  for (Method m : cfg.methods) {
    const fs::path p = dir / ("frf_" + method_slug(m) + ".csv");
    if (!fs::exists(p)) {
      estimates.emplace_back(std::nullopt);
      continue;
    }
    estimates.emplace_back(io::read_frf(p, m, cfg.number_of_input_samples, cfg.fast_sampling_time));
  }
  std::vector<io::ComparisonRow> ranking;
  const auto rows = comparison_rows(cfg, truth, estimates, ranking);
  report_ranking(ranking, out);
  flush({{dir / "comparison.csv", io::comparison_csv(rows)}, {dir / "ranking.csv", ranking_csv(ranking)}},
        cfg.output_directory, out);
  return out;
}

RunSummary run_validate(const ExperimentConfig& cfg) {
  cfg.check();
  std::optional<Spectrum> u;
  const fs::path up = data_path(cfg, cfg.input_file, "u_h.csv");
  if (!cfg.input_file.empty() || (!cfg.plant && fs::exists(up))) {
    u = dft(io::read_time_signal(up, cfg.fast_sampling_time, Rate::Fast));
    if (u->n_points() != cfg.number_of_input_samples)
      throw Error(ErrorCode::Ingestion, up.string() + ": " + std::to_string(u->n_points()) +
                                            " samples, config expects " + std::to_string(cfg.number_of_input_samples));
  } else if (cfg.plant) {
    u = dft(simulate_experiment(cfg).u_h);
  }
  const ValidationReport r = validate_experiment(cfg, u ? &*u : nullptr);
  if (!r.ok()) throw Error(ErrorCode::InvalidConfig, join_labels(r.violations));
  RunSummary out;
  for (Method m : cfg.methods)
    if (is_local(m)) {
      const EstimatorConfig e = estimator_for(cfg, m);
      out.lines.push_back(std::string(to_string(m)) + ": " + std::to_string(e.parameter_count()) + " parameters <= " +
                          std::to_string(e.window_length()) + " window points <= " +
                          std::to_string(cfg.slow_points()) + " slow bins");
    }
  out.lines.push_back(u ? "input spectrum is rough in every window" : "no input available, roughness not checked");
  return out;
}

std::string method_slug(Method m) {
  switch (m) {
    case Method::LRM: return "lrm";
    case Method::LPM: return "lpm";
    case Method::SA: return "sa";
    case Method::LRM_SK: return "lrm_sk";
    case Method::LRM_SK_LM: return "lrm_sk_lm";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidConfig:
    case ErrorCode::GridMismatch:
      return 2;
    case ErrorCode::Io:
    case ErrorCode::Ingestion:
      return 4;
    default:
      return 3;
  }
}

}  // namespace mrfrf
