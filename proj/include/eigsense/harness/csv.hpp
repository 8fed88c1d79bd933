#pragma once

// Result tables. Columns never change order:
//
//   scenario,detector,snr_db,ns,threshold,rate,ci_low,ci_high,trials,seed
//
// snr_db is "H0" for noise-only rows. Numbers use the shortest
// round-tripping decimal form, so identical results give identical bytes.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "eigsense/errors.hpp"
#include "eigsense/harness/monte_carlo.hpp"

namespace eigsense::harness {

inline constexpr const char* kCsvHeader = "scenario,detector,snr_db,ns,threshold,rate,ci_low,ci_high,trials,seed";

namespace detail {

inline void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace detail

inline void write_csv(const RunResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const Cell& c : result.cells) {
    out << result.scenario << ',' << c.detector << ',';
    if (c.snr_db) detail::put(out, *c.snr_db);
    else out << "H0";
    out << ',' << c.samples << ',';
    detail::put(out, c.threshold);
    out << ',';
    detail::put(out, c.rate);
    out << ',';
    detail::put(out, c.ci_low);
    out << ',';
    detail::put(out, c.ci_high);
    out << ',' << c.trials << ',' << result.seed << '\n';
  }
}

inline std::string to_csv(const RunResult& result) {
  std::ostringstream out;
  write_csv(result, out);
  return out.str();
}

inline std::string meta_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

/// Writes the table and a <path>.meta.json with the seed and config hash.
inline void emit_csv(const RunResult& result, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    write_csv(result, out);
    if (!out) throw IoError("failed writing " + path);
  }
  std::ofstream meta(meta_path(path));
  if (!meta) throw IoError("cannot create " + meta_path(path));
  const nlohmann::json j{{"scenario", result.scenario}, {"seed", result.seed}, {"config_hash", result.config_hash},
                         {"columns", kCsvHeader}};
  meta << j.dump(2) << '\n';
  if (!meta) throw IoError("failed writing " + meta_path(path));
}

}  // namespace eigsense::harness
