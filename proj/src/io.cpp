#include "mrfrf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mrfrf::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc() && ptr == last) return true;
  // from_chars has no "nan"/"inf" spelling variants beyond its own; accept the common ones.
  if (s == "nan" || s == "NaN" || s == "-nan") {
    out = std::nan("");
    return true;
  }
  return false;
}

void check_frequency(const CsvTable& t, std::size_t row, std::size_t bin, double freq, double expected) {
  if (std::abs(freq - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
    t.fail(row, "freq_hz " + format_double(freq) + " does not match bin " + std::to_string(bin) + " (expected " +
                    format_double(expected) + ")");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void CsvTable::fail(std::size_t row, const std::string& what) const {
  throw Error(ErrorCode::Ingestion, path + ":" + std::to_string(lines.at(row)) + ": " + what);
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  double v = 0.0;
  if (!parse_double(rows[row][col], v)) fail(row, "column '" + header[col] + "': not a number: '" + rows[row][col] + "'");
  return v;
}

long long CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& s = rows[row][col];
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    fail(row, "column '" + header[col] + "': not an integer: '" + s + "'");
  return v;
}

CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable t;
  t.path = path.string();
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      if (cells != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw Error(ErrorCode::Ingestion,
                    t.path + ":" + std::to_string(lineno) + ": expected header '" + want + "', got '" + trim(line) + "'");
      }
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != expected_header.size())
      throw Error(ErrorCode::Ingestion, t.path + ":" + std::to_string(lineno) + ": expected " +
                                            std::to_string(expected_header.size()) + " columns, got " +
                                            std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw Error(ErrorCode::Ingestion, t.path + ": empty file, missing header");
  return t;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string time_signal_csv(const TimeSignal& x) {
  std::string s = "index,value\n";
  for (std::size_t i = 0; i < x.samples.size(); ++i) s += std::to_string(i) + "," + format_double(x.samples[i]) + "\n";
  return s;
}

TimeSignal read_time_signal(const fs::path& path, double sampling_time, Rate rate) {
  const CsvTable t = read_csv(path, {"index", "value"});
  TimeSignal x;
  x.sampling_time = sampling_time;
  x.rate = rate;
  x.samples.resize(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.integer(r, 0) != static_cast<long long>(r))
      t.fail(r, "index " + t.rows[r][0] + " out of sequence, expected " + std::to_string(r));
    x.samples[r] = t.number(r, 1);
  }
  if (x.samples.empty()) throw Error(ErrorCode::Ingestion, t.path + ": no samples");
  return x;
}

std::string spectrum_csv(const Spectrum& x) {
  std::string s = "bin,freq_hz,re,im\n";
  for (std::size_t k = 0; k < x.n_points(); ++k)
    s += std::to_string(k) + "," + format_double(x.bin_frequency_hz(k)) + "," + format_double(x[k].real()) + "," +
         format_double(x[k].imag()) + "\n";
  return s;
}

Spectrum read_spectrum(const fs::path& path, double sampling_time) {
  const CsvTable t = read_csv(path, {"bin", "freq_hz", "re", "im"});
  Spectrum x;
  x.sampling_time = sampling_time;
  x.coefficients.resize(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.integer(r, 0) != static_cast<long long>(r))
      t.fail(r, "bin " + t.rows[r][0] + " out of sequence, expected " + std::to_string(r));
    x.coefficients[r] = {t.number(r, 2), t.number(r, 3)};
  }
  if (x.coefficients.empty()) throw Error(ErrorCode::Ingestion, t.path + ": no bins");
  for (std::size_t r = 0; r < t.rows.size(); ++r) check_frequency(t, r, r, t.number(r, 1), x.bin_frequency_hz(r));
  return x;
}

std::string frf_csv(const FrfEstimate& est) {
  std::string s = "bin,freq_hz,g_re,g_im,variance,status\n";
  for (std::size_t i = 0; i < est.g_hat.size(); ++i)
    s += std::to_string(est.fast_bins[i]) + "," + format_double(est.frequency_hz(i)) + "," +
         format_double(est.g_hat[i].real()) + "," + format_double(est.g_hat[i].imag()) + "," +
         format_double(est.variance[i]) + "," + to_string(est.status[i]) + "\n";
  return s;
}

FrfEstimate read_frf(const fs::path& path, Method method, std::size_t fast_points, double sampling_time) {
  const CsvTable t = read_csv(path, {"bin", "freq_hz", "g_re", "g_im", "variance", "status"});
  FrfEstimate est;
  est.method = method;
  est.sampling_time = sampling_time;
  est.fast_points = fast_points;
  est.n_points = t.rows.size();
  if (t.rows.empty()) throw Error(ErrorCode::Ingestion, t.path + ": no bins");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long bin = t.integer(r, 0);
    if (bin < 0 || static_cast<std::size_t>(bin) >= fast_points)
      t.fail(r, "bin " + std::to_string(bin) + " outside the " + std::to_string(fast_points) + "-point grid");
    if (r > 0 && static_cast<std::size_t>(bin) <= est.fast_bins.back()) t.fail(r, "bins must be increasing");
    est.fast_bins.push_back(static_cast<std::size_t>(bin));
    est.g_hat.emplace_back(t.number(r, 2), t.number(r, 3));
    est.variance.push_back(t.number(r, 4));
    const auto status = parse_bin_status(t.rows[r][5]);
    if (!status) t.fail(r, "unknown status '" + t.rows[r][5] + "'");
    est.status.push_back(*status);
    check_frequency(t, r, est.fast_bins.back(), t.number(r, 1), est.frequency_hz(r));
  }
  return est;
}

std::string stddev_csv(const FrfEstimate& est) {
  std::string s = "bin,freq_hz,std\n";
  for (std::size_t i = 0; i < est.g_hat.size(); ++i)
    s += std::to_string(est.fast_bins[i]) + "," + format_double(est.frequency_hz(i)) + "," +
         format_double(std::sqrt(est.variance[i])) + "\n";
  return s;
}

std::string transient_csv(const FrfEstimate& est, int factor) {
  std::string s = "bin,freq_hz,t_re,t_im,noise_variance,status\n";
  const std::size_t m = est.transient.size();
  const double slow_t = est.sampling_time * factor;
  for (std::size_t k = 0; k < m; ++k)
    s += std::to_string(k) + "," + format_double(static_cast<double>(k) / (static_cast<double>(m) * slow_t)) + "," +
         format_double(est.transient[k].real()) + "," + format_double(est.transient[k].imag()) + "," +
         format_double(est.noise_variance[k]) + "," + to_string(est.slow_status[k]) + "\n";
  return s;
}

std::string traces_csv(std::span<const CostTrace> traces) {
  std::string s = "bin,iteration,J_SK,J_LS\n";
  for (std::size_t k = 0; k < traces.size(); ++k)
    for (std::size_t i = 0; i < traces[k].size(); ++i)
      s += std::to_string(k) + "," + std::to_string(i) + "," + format_double(traces[k].j_sk[i]) + "," +
           format_double(traces[k].j_ls[i]) + "\n";
  return s;
}

std::string mean_costs_csv(const MeanCostCurve& curve) {
  std::string s = "iteration,mu_SK,mu_OE\n";
  for (std::size_t i = 0; i < curve.mu_oe.size(); ++i)
    s += std::to_string(i) + "," + format_double(curve.mu_sk[i]) + "," + format_double(curve.mu_oe[i]) + "\n";
  return s;
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::string s = "method,n,cumulative_error\n";
  for (const auto& r : rows)
    s += r.method + "," + std::to_string(r.n) + "," + (r.absent ? std::string("absent") : format_double(r.value)) + "\n";
  return s;
}

std::string system_text(const RationalSystem& sys, double sampling_time) {
  const auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + "]";
  };
  return "b = " + list(sys.b) + "\na = " + list(sys.a) + "\nsampling_time = " + format_double(sampling_time) + "\n";
}

SystemFile parse_system_text(const std::string& text, const std::string& origin) {
  SystemFile out;
  bool have_b = false, have_a = false, have_t = false;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::Ingestion, origin + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "b" || key == "a") {
      if (value.size() < 2 || value.front() != '[' || value.back() != ']') fail("expected a bracketed list for " + key);
      std::vector<double> coeffs;
      const std::string inner = value.substr(1, value.size() - 2);
      if (!trim(inner).empty())
        for (const auto& cell : split(inner, ',')) {
          double v = 0.0;
          if (!parse_double(cell, v)) fail("not a number: '" + cell + "'");
          coeffs.push_back(v);
        }
      (key == "b" ? out.system.b : out.system.a) = coeffs;
      (key == "b" ? have_b : have_a) = true;
    } else if (key == "sampling_time") {
      if (!parse_double(value, out.sampling_time) || !(out.sampling_time > 0.0))
        fail("sampling_time must be a positive number");
      have_t = true;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_b || !have_a || !have_t) throw Error(ErrorCode::Ingestion, origin + ": need b, a and sampling_time");
  try {
    out.system.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Ingestion, origin + ": " + e.what());
  }
  return out;
}

SystemFile read_system(const fs::path& path) { return parse_system_text(read_text(path), path.string()); }

}  // namespace mrfrf::io
