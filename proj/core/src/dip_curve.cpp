#include "upconv/dip_curve.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace upconv {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void DipCurve::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].starts == 0)
      throw std::invalid_argument("DipCurve: starts must be > 0 at every point");
    if (i > 0 && !(points[i].delay_ps > points[i - 1].delay_ps))
      throw std::invalid_argument("DipCurve: delays must be strictly increasing");
  }
}

std::string DipCurve::to_csv() const {
  std::string out = "delay_ps,coincidences,starts\n";
  char buf[96];
  for (const auto& p : points) {
    out += format_double(p.delay_ps);
    std::snprintf(buf, sizeof buf, ",%" PRIu64 ",%" PRIu64 "\n",
                  static_cast<std::uint64_t>(p.coincidences),
                  static_cast<std::uint64_t>(p.starts));
    out += buf;
  }
  return out;
}

DipCurve DipCurve::from_csv(std::istream& in) {
  DipCurve curve;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "delay_ps,coincidences,starts")
        throw CsvError("expected header 'delay_ps,coincidences,starts', got '" + line +
                           "' (line " + std::to_string(line_no) + ")",
                       line_no);
      header_seen = true;
      continue;
    }
    DipPoint p;
    long long coincidences = 0, starts = 0;
    char extra;
    if (std::sscanf(line.c_str(), "%lf,%lld,%lld %c", &p.delay_ps, &coincidences,
                    &starts, &extra) != 3 ||
        coincidences < 0 || starts < 0)
      throw CsvError("malformed row '" + line + "' (line " + std::to_string(line_no) + ")",
                     line_no);
    p.coincidences = static_cast<std::uint64_t>(coincidences);
    p.starts = static_cast<std::uint64_t>(starts);
    curve.points.push_back(p);
  }
  if (!header_seen) throw CsvError("empty CSV: missing header", 0);
  curve.validate();
  return curve;
}

DipCurve DipCurve::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'", 0);
  return from_csv(in);
}

std::vector<double> DipCurve::delays() const {
  std::vector<double> d;
  d.reserve(points.size());
  for (const auto& p : points) d.push_back(p.delay_ps);
  return d;
}

std::vector<double> DipCurve::counts() const {
  std::vector<double> c;
  c.reserve(points.size());
  for (const auto& p : points) c.push_back(static_cast<double>(p.coincidences));
  return c;
}

}  // namespace upconv
