#include "mrfrf/common.hpp"

#include <array>
#include <utility>

namespace mrfrf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::RankDeficient: return "rank-deficient";
    case ErrorCode::LocalPole: return "local-pole";
    case ErrorCode::DegreesOfFreedom: return "degrees-of-freedom";
    case ErrorCode::PoleOnGrid: return "pole-on-grid";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::Io: return "io";
    case ErrorCode::Ingestion: return "ingestion";
    case ErrorCode::GridMismatch: return "grid-mismatch";
  }
  return "unknown";
}

namespace {
constexpr std::array<std::pair<Method, const char*>, 5> kMethodNames{{
    {Method::LRM, "LRM"},
    {Method::LPM, "LPM"},
    {Method::SA, "SA"},
    {Method::LRM_SK, "LRM+SK"},
    {Method::LRM_SK_LM, "LRM+SK+LM"},
}};

constexpr std::array<std::pair<BinStatus, const char*>, 5> kStatusNames{{
    {BinStatus::Ok, "ok"},
    {BinStatus::RankDeficient, "rank_deficient"},
    {BinStatus::LocalPole, "local_pole"},
    {BinStatus::NoDegreesOfFreedom, "no_dof"},
    {BinStatus::NoInputPower, "no_input_power"},
}};
}  // namespace

const char* to_string(Method m) {
  for (const auto& [method, name] : kMethodNames)
    if (method == m) return name;
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (const auto& [method, n] : kMethodNames)
    if (name == n) return method;
  return std::nullopt;
}

const char* to_string(BinStatus s) {
  for (const auto& [status, name] : kStatusNames)
    if (status == s) return name;
  return "unknown";
}

std::optional<BinStatus> parse_bin_status(const std::string& name) {
  for (const auto& [status, n] : kStatusNames)
    if (name == n) return status;
  return std::nullopt;
}

}  // namespace mrfrf
