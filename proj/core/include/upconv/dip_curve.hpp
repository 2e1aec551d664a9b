#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace upconv {

struct DipPoint {
  double delay_ps = 0.0;
  std::uint64_t coincidences = 0;
  std::uint64_t starts = 0;
};

struct CsvError : std::runtime_error {
  explicit CsvError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg), line_number(line) {}
  std::size_t line_number;
};

/// Raw coincidence counts versus relative delay, with the start totals that
/// normalize them and a digest of the configuration that produced them.
struct DipCurve {
  std::vector<DipPoint> points;
  std::string config_digest;

  void validate() const;  // delays strictly increasing, starts > 0

  /// CSV with header `delay_ps,coincidences,starts`.
  std::string to_csv() const;
  static DipCurve from_csv(std::istream& in);
  static DipCurve from_csv_file(const std::string& path);

  std::vector<double> delays() const;
  std::vector<double> counts() const;  // coincidences as doubles, for fitting
};

}  // namespace upconv
