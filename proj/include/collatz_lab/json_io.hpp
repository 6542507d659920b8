#pragma once

#include "collatz_lab/nat.hpp"
#include "collatz_lab/report.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace collatz_lab {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/// Nat values travel as JSON numbers when they fit in 64 bits and as
/// decimal strings otherwise.
inline ordered_json nat_to_json(const Nat& v) {
  if (fits_u64(v)) return v.convert_to<std::uint64_t>();
  return v.str();
}

inline Nat nat_from_json(const ordered_json& j) {
  if (j.is_number_unsigned()) return Nat(j.get<std::uint64_t>());
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Nat(j.get<std::int64_t>());
  if (j.is_string()) return parse_nat(j.get<std::string>());
  throw std::invalid_argument("collatz_lab: expected a non-negative integer in JSON");
}

inline ordered_json findings_to_json(const std::vector<Finding>& findings) {
  ordered_json out = ordered_json::array();
  for (const auto& f : findings) out.push_back({{"x", f.x}, {"detail", f.detail}});
  return out;
}

inline std::vector<Finding> findings_from_json(const ordered_json& j) {
  std::vector<Finding> out;
  for (const auto& f : j) out.push_back({f.at("x").get<std::uint64_t>(), f.at("detail").get<std::string>()});
  return out;
}

/// Timing is left out unless asked for, so that reports of the same range
/// compare byte-for-byte across runs and worker counts.
inline ordered_json to_json(const RangeReport& r, bool include_timing = false) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["fact_id"] = r.fact_id;
  j["range"] = {r.lo, r.hi};
  j["checked"] = r.checked;
  j["complete"] = r.complete();
  j["holds"] = r.holds();
  j["violations"] = findings_to_json(r.violations);
  j["inconclusive"] = findings_to_json(r.inconclusive);
  if (include_timing) j["elapsed_seconds"] = r.elapsed.count();
  return j;
}

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Writes to a sibling temporary file and renames it over `path`, so
/// readers see either the old or the new contents.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("collatz_lab: cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("collatz_lab: write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("collatz_lab: cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace collatz_lab
