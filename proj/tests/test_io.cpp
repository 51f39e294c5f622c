#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unistd.h>

#include "mrfrf/io.hpp"
#include "mrfrf/signals.hpp"

using namespace mrfrf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mrfrf_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, -1e-300, 1.0 / 3.0, 12345.678901234567, 0.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("time signal csv round trip") {
  TempDir d;
  const TimeSignal x{{0.25, -1.0 / 3.0, 7.0}, 0.5, Rate::Fast};
  io::write_text(d.path / "x.csv", io::time_signal_csv(x));
  CHECK(io::read_text(d.path / "x.csv").rfind("index,value\n", 0) == 0);
  const TimeSignal y = io::read_time_signal(d.path / "x.csv", 0.5, Rate::Fast);
  CHECK(y.samples == x.samples);
}

TEST_CASE("ingestion errors carry file and line") {
  TempDir d;
  const auto bad_value = d.write("a.csv", "index,value\n0,1.0\n1,abc\n");
  const std::string m1 = message_of([&] { (void)io::read_time_signal(bad_value, 1.0, Rate::Fast); });
  CHECK(m1.find("a.csv:3") != std::string::npos);

  const auto bad_header = d.write("b.csv", "idx,value\n0,1\n");
  CHECK(message_of([&] { (void)io::read_time_signal(bad_header, 1.0, Rate::Fast); }).find("b.csv:1") !=
        std::string::npos);

  const auto missing_col = d.write("c.csv", "index,value\n0,1\n1\n");
  CHECK(message_of([&] { (void)io::read_time_signal(missing_col, 1.0, Rate::Fast); }).find("c.csv:3") !=
        std::string::npos);

  const auto gap = d.write("e.csv", "index,value\n0,1\n2,1\n");
  CHECK(message_of([&] { (void)io::read_time_signal(gap, 1.0, Rate::Fast); }).find("out of sequence") !=
        std::string::npos);

  try {
    (void)io::read_time_signal(d.path / "none.csv", 1.0, Rate::Fast);
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("spectrum csv round trip and frequency check") {
  TempDir d;
  const Spectrum s = dft({{1, 2, 3, 4, 5, 6}, 0.25, Rate::Fast});
  io::write_text(d.path / "s.csv", io::spectrum_csv(s));
  const Spectrum back = io::read_spectrum(d.path / "s.csv", 0.25);
  CHECK(back.coefficients == s.coefficients);
  CHECK_THROWS_AS(io::read_spectrum(d.path / "s.csv", 0.5), Error);
}

TEST_CASE("frf csv round trip") {
  TempDir d;
  FrfEstimate e;
  e.method = Method::SA;
  e.sampling_time = 0.5e-3;
  e.fast_points = 12;
  e.n_points = 2;
  e.fast_bins = {0, 6};
  e.g_hat = {{1, 2}, {std::nan(""), std::nan("")}};
  e.variance = {0.5, std::nan("")};
  e.status = {BinStatus::Ok, BinStatus::NoInputPower};
  io::write_text(d.path / "f.csv", io::frf_csv(e));
  const std::string text = io::read_text(d.path / "f.csv");
  CHECK(text.rfind("bin,freq_hz,g_re,g_im,variance,status\n", 0) == 0);
  CHECK(text.find("no_input_power") != std::string::npos);
  const FrfEstimate back = io::read_frf(d.path / "f.csv", Method::SA, 12, 0.5e-3);
  CHECK(back.fast_bins == e.fast_bins);
  CHECK(back.g_hat[0] == e.g_hat[0]);
  CHECK(std::isnan(back.g_hat[1].real()));
  CHECK(back.status == e.status);
  CHECK_THROWS_AS(io::read_frf(d.path / "f.csv", Method::SA, 4, 0.5e-3), Error);
}

TEST_CASE("aggregate csv layouts") {
  CostTrace t;
  t.j_sk = {2, 1};
  t.j_ls = {3, 2};
  const std::vector<CostTrace> traces{t};
  CHECK(io::traces_csv(traces) == "bin,iteration,J_SK,J_LS\n0,0,2,3\n0,1,1,2\n");
  CHECK(io::mean_costs_csv(mean_cost_curve(traces)) == "iteration,mu_SK,mu_OE\n0,2,3\n1,1,2\n");
  const std::vector<io::ComparisonRow> rows{{"LRM", 600, 0.5, false}, {"SA", 600, 0.0, true}};
  CHECK(io::comparison_csv(rows) == "method,n,cumulative_error\nLRM,600,0.5\nSA,600,absent\n");
}

TEST_CASE("system text") {
  const RationalSystem sys{{0.0, 0.25}, {1.0, -0.5, 0.125}};
  const std::string text = io::system_text(sys, 0.5e-3);
  CHECK(text == "b = [0, 0.25]\na = [1, -0.5, 0.125]\nsampling_time = 5e-04\n");
  const io::SystemFile back = io::parse_system_text(text);
  CHECK(back.system.b == sys.b);
  CHECK(back.system.a == sys.a);
  CHECK(back.sampling_time == 0.5e-3);

  CHECK(message_of([] { (void)io::parse_system_text("b = [1]\na = [0, 1]\nsampling_time = 1\n", "p.txt"); })
            .find("p.txt") != std::string::npos);
  CHECK(message_of([] { (void)io::parse_system_text("b = [1]\nc = 2\n", "q.txt"); }).find("q.txt:2") !=
        std::string::npos);
  CHECK_THROWS_AS(io::parse_system_text("b = [1]\na = [1]\n"), Error);
  CHECK_THROWS_AS(io::parse_system_text("b = [1, x]\na = [1]\nsampling_time = 1\n"), Error);
}
