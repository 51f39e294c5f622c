#include "mrfrf/mrfrf.h"

#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "mrfrf/experiment.hpp"
#include "mrfrf/harness.hpp"
#include "mrfrf/signals.hpp"

struct mrfrf_spectrum {
  mrfrf::Spectrum value;
};
struct mrfrf_system {
  mrfrf::RationalSystem value;
};
struct mrfrf_estimate {
  mrfrf::FrfEstimate value;
};
struct mrfrf_config {
  mrfrf::ExperimentConfig value;
};
struct mrfrf_report {
  std::vector<std::string> lines;
};

namespace {

thread_local std::string last_error;

mrfrf_status status_of(mrfrf::ErrorCode c) {
  using mrfrf::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidInput: return MRFRF_E_INVALID_ARGUMENT;
    case ErrorCode::InvalidConfig: return MRFRF_E_INVALID_CONFIG;
    case ErrorCode::RankDeficient: return MRFRF_E_RANK_DEFICIENT;
    case ErrorCode::LocalPole: return MRFRF_E_LOCAL_POLE;
    case ErrorCode::DegreesOfFreedom: return MRFRF_E_DEGREES_OF_FREEDOM;
    case ErrorCode::PoleOnGrid: return MRFRF_E_POLE_ON_GRID;
    case ErrorCode::Overflow: return MRFRF_E_OVERFLOW;
    case ErrorCode::Io: return MRFRF_E_IO;
    case ErrorCode::Ingestion: return MRFRF_E_INGESTION;
    case ErrorCode::GridMismatch: return MRFRF_E_GRID_MISMATCH;
  }
  return MRFRF_E_INTERNAL;
}

mrfrf_status fail(mrfrf_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
mrfrf_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return MRFRF_OK;
  } catch (const mrfrf::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MRFRF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MRFRF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(MRFRF_E_INTERNAL, "unknown error");
  }
}

#define REQUIRE(cond, what) \
  if (!(cond)) return fail(MRFRF_E_INVALID_ARGUMENT, what)

mrfrf_status run(const mrfrf_config* c, mrfrf_report** out,
                 mrfrf::RunSummary (*fn)(const mrfrf::ExperimentConfig&)) {
  REQUIRE(c && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto summary = fn(c->value);
    auto* r = new mrfrf_report;
    r->lines = std::move(summary.lines);
    for (const auto& f : summary.files) r->lines.push_back("wrote " + f.string());
    *out = r;
  });
}

}  // namespace

extern "C" {

const char* mrfrf_version(void) { return "0.1.0"; }

const char* mrfrf_last_error(void) { return last_error.c_str(); }

const char* mrfrf_status_name(mrfrf_status s) {
  switch (s) {
    case MRFRF_OK: return "ok";
    case MRFRF_E_INVALID_ARGUMENT: return "invalid argument";
    case MRFRF_E_INVALID_CONFIG: return "invalid configuration";
    case MRFRF_E_RANK_DEFICIENT: return "rank deficient";
    case MRFRF_E_LOCAL_POLE: return "local pole";
    case MRFRF_E_DEGREES_OF_FREEDOM: return "no degrees of freedom";
    case MRFRF_E_POLE_ON_GRID: return "pole on grid";
    case MRFRF_E_OVERFLOW: return "overflow";
    case MRFRF_E_IO: return "i/o error";
    case MRFRF_E_INGESTION: return "ingestion error";
    case MRFRF_E_GRID_MISMATCH: return "grid mismatch";
    case MRFRF_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

int mrfrf_exit_code(mrfrf_status s) {
  switch (s) {
    case MRFRF_OK: return 0;
    case MRFRF_E_INVALID_ARGUMENT: return mrfrf::exit_code_for(mrfrf::ErrorCode::InvalidInput);
    case MRFRF_E_INVALID_CONFIG: return mrfrf::exit_code_for(mrfrf::ErrorCode::InvalidConfig);
    case MRFRF_E_GRID_MISMATCH: return mrfrf::exit_code_for(mrfrf::ErrorCode::GridMismatch);
    case MRFRF_E_IO: return mrfrf::exit_code_for(mrfrf::ErrorCode::Io);
    case MRFRF_E_INGESTION: return mrfrf::exit_code_for(mrfrf::ErrorCode::Ingestion);
    default: return 3;
  }
}

mrfrf_status mrfrf_spectrum_from_samples(const double* samples, size_t n, double sampling_time, mrfrf_spectrum** out) {
  REQUIRE(samples && out && n > 0, "null argument or empty signal");
  REQUIRE(sampling_time > 0.0, "sampling time must be positive");
  *out = nullptr;
  return guarded([&] {
    mrfrf::TimeSignal x{std::vector<double>(samples, samples + n), sampling_time, mrfrf::Rate::Fast};
    *out = new mrfrf_spectrum{mrfrf::dft(x)};
  });
}

size_t mrfrf_spectrum_size(const mrfrf_spectrum* s) { return s ? s->value.n_points() : 0; }

mrfrf_status mrfrf_spectrum_get(const mrfrf_spectrum* s, size_t k, double* re, double* im) {
  REQUIRE(s && re && im, "null argument");
  REQUIRE(k < s->value.n_points(), "bin out of range");
  *re = s->value[k].real();
  *im = s->value[k].imag();
  return MRFRF_OK;
}

void mrfrf_spectrum_free(mrfrf_spectrum* s) { delete s; }

mrfrf_status mrfrf_multisine(size_t n, double rms, uint64_t seed, double* samples_out) {
  REQUIRE(samples_out && n > 0, "null argument or empty signal");
  return guarded([&] {
    const auto x = mrfrf::generate_multisine({n, rms, mrfrf::default_excited_bins(n), seed});
    std::copy(x.samples.begin(), x.samples.end(), samples_out);
  });
}

mrfrf_status mrfrf_downsample(const double* samples, size_t n, int factor, double* out) {
  REQUIRE(samples && out, "null argument");
  return guarded([&] {
    const auto y = mrfrf::downsample({std::vector<double>(samples, samples + n), 1.0, mrfrf::Rate::Fast}, factor);
    std::copy(y.samples.begin(), y.samples.end(), out);
  });
}

mrfrf_status mrfrf_system_create(const double* b, size_t nb, const double* a, size_t na, mrfrf_system** out) {
  REQUIRE(b && a && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    mrfrf::RationalSystem sys{std::vector<double>(b, b + nb), std::vector<double>(a, a + na)};
    sys.validate();
    *out = new mrfrf_system{sys};
  });
}

mrfrf_status mrfrf_system_resonant(const double* frequency_hz, const double* damping, const double* gain,
                                   size_t modes, double sampling_time, mrfrf_system** out) {
  REQUIRE(frequency_hz && damping && gain && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<mrfrf::ResonantMode> m;
    for (size_t i = 0; i < modes; ++i) m.push_back({frequency_hz[i], damping[i], gain[i]});
    *out = new mrfrf_system{mrfrf::make_resonant_plant(m, sampling_time)};
  });
}

mrfrf_status mrfrf_system_simulate(const mrfrf_system* sys, const double* input, size_t n, double* output) {
  REQUIRE(sys && input && output, "null argument");
  return guarded([&] {
    const auto y = mrfrf::simulate(sys->value, {std::vector<double>(input, input + n), 1.0, mrfrf::Rate::Fast});
    std::copy(y.samples.begin(), y.samples.end(), output);
  });
}

mrfrf_status mrfrf_system_freqresp(const mrfrf_system* sys, size_t n_points, double sampling_time,
                                   mrfrf_spectrum** out) {
  REQUIRE(sys && out && n_points > 0, "null argument or empty grid");
  *out = nullptr;
  return guarded([&] { *out = new mrfrf_spectrum{mrfrf::freqresp(sys->value, n_points, sampling_time)}; });
}

void mrfrf_system_free(mrfrf_system* sys) { delete sys; }

mrfrf_status mrfrf_identify(const mrfrf_spectrum* input, const mrfrf_spectrum* output,
                            const mrfrf_estimator_options* options, mrfrf_estimate** out) {
  REQUIRE(input && output && options && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    mrfrf::EstimatorConfig cfg{options->factor, options->window_size, options->system_degree,
                               options->transient_degree, options->denominator_degree};
    if (options->rcond_threshold > 0.0) cfg.rcond_threshold = options->rcond_threshold;
    const auto tag = cfg.denominator_degree == 0 ? mrfrf::Method::LPM : mrfrf::Method::LRM;
    *out = new mrfrf_estimate{mrfrf::identify_frf(input->value, output->value, cfg, tag, options->threads)};
  });
}

size_t mrfrf_estimate_size(const mrfrf_estimate* e) { return e ? e->value.g_hat.size() : 0; }

mrfrf_status mrfrf_estimate_get(const mrfrf_estimate* e, size_t i, size_t* fast_bin, double* re, double* im,
                                double* variance, int* status) {
  REQUIRE(e, "null argument");
  REQUIRE(i < e->value.g_hat.size(), "index out of range");
  if (fast_bin) *fast_bin = e->value.fast_bins[i];
  if (re) *re = e->value.g_hat[i].real();
  if (im) *im = e->value.g_hat[i].imag();
  if (variance) *variance = e->value.variance[i];
  if (status) *status = static_cast<int>(e->value.status[i]);
  return MRFRF_OK;
}

mrfrf_status mrfrf_cumulative_error(const mrfrf_spectrum* truth, const mrfrf_estimate* e, size_t n, double* value) {
  REQUIRE(truth && e && value, "null argument");
  return guarded([&] { *value = mrfrf::cumulative_frf_error(truth->value, e->value, n).value; });
}

void mrfrf_estimate_free(mrfrf_estimate* e) { delete e; }

mrfrf_status mrfrf_config_load(const char* path, mrfrf_config** out) {
  REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new mrfrf_config{mrfrf::load_config(path)}; });
}

mrfrf_status mrfrf_config_parse(const char* json_text, mrfrf_config** out) {
  REQUIRE(json_text && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new mrfrf_config{mrfrf::parse_config(json_text)}; });
}

mrfrf_status mrfrf_config_set_seed(mrfrf_config* c, uint64_t seed) {
  REQUIRE(c, "null argument");
  c->value.apply_seed(seed);
  return MRFRF_OK;
}

mrfrf_status mrfrf_config_set_threads(mrfrf_config* c, unsigned threads) {
  REQUIRE(c, "null argument");
  REQUIRE(threads >= 1, "threads must be >= 1");
  c->value.threads = threads;
  return MRFRF_OK;
}

mrfrf_status mrfrf_config_set_output_directory(mrfrf_config* c, const char* dir) {
  REQUIRE(c && dir && *dir, "null or empty directory");
  c->value.output_directory = dir;
  return MRFRF_OK;
}

mrfrf_status mrfrf_config_set_methods(mrfrf_config* c, const char* methods) {
  REQUIRE(c && methods, "null argument");
  std::vector<mrfrf::Method> list;
  std::istringstream is(methods);
  std::string name;
  while (std::getline(is, name, ',')) {
    const auto b = name.find_first_not_of(' ');
    const auto e = name.find_last_not_of(' ');
    name = b == std::string::npos ? std::string() : name.substr(b, e - b + 1);
    const auto m = mrfrf::parse_method(name);
    if (!m) return fail(MRFRF_E_INVALID_CONFIG, "unknown method '" + name + "'");
    if (std::find(list.begin(), list.end(), *m) != list.end())
      return fail(MRFRF_E_INVALID_CONFIG, "duplicate method '" + name + "'");
    list.push_back(*m);
  }
  if (list.empty()) return fail(MRFRF_E_INVALID_CONFIG, "no methods given");
  c->value.methods = std::move(list);
  return MRFRF_OK;
}

void mrfrf_config_free(mrfrf_config* c) { delete c; }

mrfrf_status mrfrf_run_simulate(const mrfrf_config* c, mrfrf_report** out) { return run(c, out, mrfrf::run_simulate); }
mrfrf_status mrfrf_run_identify(const mrfrf_config* c, mrfrf_report** out) { return run(c, out, mrfrf::run_identify); }
mrfrf_status mrfrf_run_compare(const mrfrf_config* c, mrfrf_report** out) { return run(c, out, mrfrf::run_compare); }
mrfrf_status mrfrf_run_validate(const mrfrf_config* c, mrfrf_report** out) { return run(c, out, mrfrf::run_validate); }

size_t mrfrf_report_line_count(const mrfrf_report* r) { return r ? r->lines.size() : 0; }

const char* mrfrf_report_line(const mrfrf_report* r, size_t i) {
  return r && i < r->lines.size() ? r->lines[i].c_str() : nullptr;
}

void mrfrf_report_free(mrfrf_report* r) { delete r; }

}  // extern "C"
