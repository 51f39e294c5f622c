#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrfrf/common.hpp"
#include "mrfrf/harness.hpp"
#include "mrfrf/lti.hpp"
#include "mrfrf/refine.hpp"

namespace mrfrf::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Rows of a CSV file with a fixed header. Ingestion errors name file and line.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  double number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;
  [[noreturn]] void fail(std::size_t row, const std::string& what) const;
};

/// Reads a CSV whose first line must contain exactly the expected columns.
CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expected_header);

/// Writes `content` through a temporary file and a rename.
void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

// index,value
std::string time_signal_csv(const TimeSignal& x);
TimeSignal read_time_signal(const fs::path& path, double sampling_time, Rate rate);

// bin,freq_hz,re,im
std::string spectrum_csv(const Spectrum& x);
/// `sampling_time` cannot be recovered reliably from a file with one row, so
/// it is passed in; a freq_hz column inconsistent with it is rejected.
Spectrum read_spectrum(const fs::path& path, double sampling_time);

// bin,freq_hz,g_re,g_im,variance,status
std::string frf_csv(const FrfEstimate& est);
FrfEstimate read_frf(const fs::path& path, Method method, std::size_t fast_points, double sampling_time);

// bin,freq_hz,std
std::string stddev_csv(const FrfEstimate& est);

// bin,freq_hz,t_re,t_im,noise_variance,status on the slow grid
std::string transient_csv(const FrfEstimate& est, int factor);

// bin,iteration,J_SK,J_LS
std::string traces_csv(std::span<const CostTrace> traces);

// iteration,mu_SK,mu_OE
std::string mean_costs_csv(const MeanCostCurve& curve);

struct ComparisonRow {
  std::string method;
  std::size_t n = 0;
  double value = 0.0;
  bool absent = false;
};

// method,n,cumulative_error
std::string comparison_csv(std::span<const ComparisonRow> rows);

/// b = [..]
/// a = [..]
/// sampling_time = ..
std::string system_text(const RationalSystem& sys, double sampling_time);

struct SystemFile {
  RationalSystem system;
  double sampling_time = 1.0;
};

SystemFile parse_system_text(const std::string& text, const std::string& origin = "<string>");
SystemFile read_system(const fs::path& path);

}  // namespace mrfrf::io
