// mrfrf: simulate, identify, compare and validate multirate FRF experiments.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <thread>

#include "mrfrf/mrfrf.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string methods;
  long long seed = -1;
  std::string threads = "1";
};

int report_error(mrfrf_status s) {
  std::fprintf(stderr, "error: %s\n", *mrfrf_last_error() ? mrfrf_last_error() : mrfrf_status_name(s));
  return mrfrf_exit_code(s);
}

unsigned parse_threads(const std::string& text) {
  if (text == "auto") {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
  std::size_t used = 0;
  const unsigned long n = std::stoul(text, &used);
  if (used != text.size() || n == 0) throw CLI::ValidationError("--threads", "expected a positive integer or 'auto'");
  return static_cast<unsigned>(n);
}

using RunFn = mrfrf_status (*)(const mrfrf_config*, mrfrf_report**);

int execute(const Options& o, RunFn fn) {
  mrfrf_config* cfg = nullptr;
  mrfrf_status s = mrfrf_config_load(o.config.c_str(), &cfg);
  if (s != MRFRF_OK) return report_error(s);

  if (!o.out.empty()) s = mrfrf_config_set_output_directory(cfg, o.out.c_str());
  if (s == MRFRF_OK && !o.methods.empty()) s = mrfrf_config_set_methods(cfg, o.methods.c_str());
  if (s == MRFRF_OK && o.seed >= 0) s = mrfrf_config_set_seed(cfg, static_cast<uint64_t>(o.seed));
  if (s == MRFRF_OK) s = mrfrf_config_set_threads(cfg, parse_threads(o.threads));
  if (s != MRFRF_OK) {
    mrfrf_config_free(cfg);
    return report_error(s);
  }

  mrfrf_report* report = nullptr;
  s = fn(cfg, &report);
  mrfrf_config_free(cfg);
  if (s != MRFRF_OK) return report_error(s);
  for (std::size_t i = 0; i < mrfrf_report_line_count(report); ++i) std::printf("%s\n", mrfrf_report_line(report, i));
  mrfrf_report_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multirate FRF identification with local rational models"};
  app.set_version_flag("--version", std::string(mrfrf_version()));
  app.require_subcommand(1);

  Options opts;
  RunFn chosen = nullptr;
  const auto add = [&](const char* name, const char* help, RunFn fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory (overrides output_directory)");
    sub->add_option("--methods", opts.methods, "comma list of LRM,LPM,SA,LRM+SK,LRM+SK+LM");
    sub->add_option("--seed", opts.seed, "excitation seed s, noise seed s+1")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", opts.threads, "worker threads, n or auto");
    sub->callback([&chosen, fn] { chosen = fn; });
  };
  add("simulate", "synthesize u_h, y_h, y_l and the true FRF", mrfrf_run_simulate);
  add("identify", "estimate the FRF with every requested method", mrfrf_run_identify);
  add("compare", "rank FRF estimates by cumulative error", mrfrf_run_compare);
  add("validate", "check window conditions and input roughness", mrfrf_run_validate);

  try {
    app.parse(argc, argv);
    return execute(opts, chosen);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
