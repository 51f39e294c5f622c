#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "mrfrf/mrfrf.h"

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
  CHECK(std::strlen(mrfrf_version()) > 0);
  CHECK(std::string(mrfrf_status_name(MRFRF_E_RANK_DEFICIENT)) == "rank deficient");
  CHECK(mrfrf_exit_code(MRFRF_OK) == 0);
  CHECK(mrfrf_exit_code(MRFRF_E_INVALID_CONFIG) == 2);
  CHECK(mrfrf_exit_code(MRFRF_E_GRID_MISMATCH) == 2);
  CHECK(mrfrf_exit_code(MRFRF_E_LOCAL_POLE) == 3);
  CHECK(mrfrf_exit_code(MRFRF_E_INGESTION) == 4);
}

TEST_CASE("argument errors set the last error") {
  mrfrf_spectrum* s = nullptr;
  CHECK(mrfrf_spectrum_from_samples(nullptr, 4, 1.0, &s) == MRFRF_E_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(std::strlen(mrfrf_last_error()) > 0);
  const double x[2] = {1, 2};
  CHECK(mrfrf_spectrum_from_samples(x, 2, -1.0, &s) != MRFRF_OK);
  double out[1];
  CHECK(mrfrf_downsample(x, 2, 0, out) != MRFRF_OK);
  mrfrf_system* sys = nullptr;
  const double a0[1] = {0.0};
  CHECK(mrfrf_system_create(x, 2, a0, 1, &sys) != MRFRF_OK);
  mrfrf_spectrum_free(nullptr);
  mrfrf_system_free(nullptr);
  mrfrf_estimate_free(nullptr);
  mrfrf_config_free(nullptr);
  mrfrf_report_free(nullptr);
}

TEST_CASE("spectrum round trip through handles") {
  const double x[4] = {1, 0, -1, 0};
  mrfrf_spectrum* s = nullptr;
  REQUIRE(mrfrf_spectrum_from_samples(x, 4, 1.0, &s) == MRFRF_OK);
  CHECK(mrfrf_spectrum_size(s) == 4);
  double re = 0, im = 0;
  CHECK(mrfrf_spectrum_get(s, 1, &re, &im) == MRFRF_OK);
  CHECK(re == doctest::Approx(2.0));
  CHECK(std::abs(im) < 1e-12);
  CHECK(mrfrf_spectrum_get(s, 4, &re, &im) == MRFRF_E_INVALID_ARGUMENT);
  mrfrf_spectrum_free(s);
}

TEST_CASE("benchmark identification through the C interface") {
  const std::size_t n = 1200;
  const double t = 0.5e-3;
  const double freq[2] = {150.0, 500.0}, damp[2] = {0.02, 0.01}, gain[2] = {1.0, 0.3};
  mrfrf_system* sys = nullptr;
  REQUIRE(mrfrf_system_resonant(freq, damp, gain, 2, t, &sys) == MRFRF_OK);
  std::vector<double> u(n), y(n), yl(n / 3);
  REQUIRE(mrfrf_multisine(n, 1.44, 1, u.data()) == MRFRF_OK);
  REQUIRE(mrfrf_system_simulate(sys, u.data(), n, y.data()) == MRFRF_OK);
  REQUIRE(mrfrf_downsample(y.data(), n, 3, yl.data()) == MRFRF_OK);

  mrfrf_spectrum *us = nullptr, *ys = nullptr, *truth = nullptr;
  REQUIRE(mrfrf_spectrum_from_samples(u.data(), n, t, &us) == MRFRF_OK);
  REQUIRE(mrfrf_spectrum_from_samples(yl.data(), n / 3, 3 * t, &ys) == MRFRF_OK);
  REQUIRE(mrfrf_system_freqresp(sys, n, t, &truth) == MRFRF_OK);

  mrfrf_estimator_options opt{3, 18, 4, 4, 7, 0.0, 2};
  mrfrf_estimate* est = nullptr;
  REQUIRE(mrfrf_identify(us, ys, &opt, &est) == MRFRF_OK);
  CHECK(mrfrf_estimate_size(est) == n);
  std::size_t bin = 0;
  double re = 0, im = 0, var = 0, tre = 0, tim = 0;
  int status = -1;
  REQUIRE(mrfrf_estimate_get(est, 500, &bin, &re, &im, &var, &status) == MRFRF_OK);
  REQUIRE(mrfrf_spectrum_get(truth, 500, &tre, &tim) == MRFRF_OK);
  CHECK(bin == 500);
  CHECK(status == MRFRF_BIN_OK);
  CHECK(std::hypot(re - tre, im - tim) < 1e-2 * std::hypot(tre, tim));
  double err = -1;
  CHECK(mrfrf_cumulative_error(truth, est, 600, &err) == MRFRF_OK);
  CHECK(err >= 0.0);
  CHECK(err < 1e-2);

  opt.window_size = 5;
  mrfrf_estimate* bad = nullptr;
  CHECK(mrfrf_identify(us, ys, &opt, &bad) == MRFRF_E_INVALID_CONFIG);
  CHECK(bad == nullptr);

  mrfrf_estimate_free(est);
  mrfrf_spectrum_free(us);
  mrfrf_spectrum_free(ys);
  mrfrf_spectrum_free(truth);
  mrfrf_system_free(sys);
}

TEST_CASE("config and runs") {
  mrfrf_config* c = nullptr;
  CHECK(mrfrf_config_parse("{\"bogus\": 1}", &c) == MRFRF_E_INVALID_CONFIG);
  CHECK(std::string(mrfrf_last_error()).find("bogus") != std::string::npos);
  CHECK(mrfrf_config_load("/nonexistent/x.json", &c) == MRFRF_E_IO);

  REQUIRE(mrfrf_config_parse(R"({
    "fast_sampling_time": 0.001, "downsampling_factor": 2, "number_of_input_samples": 400,
    "plant": {"modes": [{"frequency_hz": 120, "damping": 0.05, "gain": 1}]},
    "estimator": {"window_size": 10, "system_numerator_degree": 2, "transient_numerator_degree": 2,
                  "denominator_degree": 2},
    "lpm": {"window_size": 10, "system_numerator_degree": 2, "transient_numerator_degree": 2},
    "noise": {"snr_db": 50, "seed": 3},
    "spectral_analysis": {"segment_length": 100, "overlap": 50}
  })",
                             &c) == MRFRF_OK);
  const fs::path dir = fs::temp_directory_path() / ("mrfrf_capi_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  CHECK(mrfrf_config_set_output_directory(c, dir.c_str()) == MRFRF_OK);
  CHECK(mrfrf_config_set_methods(c, "LRM,SA") == MRFRF_OK);
  CHECK(mrfrf_config_set_methods(c, "LRM,NOPE") == MRFRF_E_INVALID_CONFIG);
  CHECK(mrfrf_config_set_seed(c, 7) == MRFRF_OK);
  CHECK(mrfrf_config_set_threads(c, 2) == MRFRF_OK);

  mrfrf_report* r = nullptr;
  REQUIRE(mrfrf_run_validate(c, &r) == MRFRF_OK);
  CHECK(mrfrf_report_line_count(r) >= 1);
  mrfrf_report_free(r);
  REQUIRE(mrfrf_run_simulate(c, &r) == MRFRF_OK);
  mrfrf_report_free(r);
  REQUIRE(mrfrf_run_identify(c, &r) == MRFRF_OK);
  CHECK(mrfrf_report_line_count(r) >= 2);
  CHECK(mrfrf_report_line(r, 1000) == nullptr);
  mrfrf_report_free(r);
  CHECK(fs::exists(dir / "frf_lrm.csv"));
  CHECK(fs::exists(dir / "frf_sa.csv"));
  CHECK(fs::exists(dir / "ranking.csv"));
  mrfrf_config_free(c);
  fs::remove_all(dir);
}
