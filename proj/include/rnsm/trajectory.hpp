#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnsm {

inline std::string format_order(double s) {
  std::ostringstream os;
  os << std::setprecision(6) << s;
  return os.str();
}

// Column holding ||u||_s^2 of the velocity block.
inline std::string norm_column(double s) { return "norm_sq[s=" + format_order(s) + "]"; }

// Uniformly sampled named scalars of one run.
struct TrajectoryRecord {
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  double dt = 0;
  int steps_per_sample = 1;
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  double cfl_dt = std::numeric_limits<double>::infinity();
  std::vector<std::string> header_notes;

  bool has(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }
  std::size_t column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("trajectory has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
  std::vector<double> series(const std::string& name) const {
    const auto c = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  std::size_t size() const { return times.size(); }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (const auto& n : header_notes) os << "# " << n << '\n';
    os << "# dt=" << std::setprecision(17) << dt << " steps_per_sample=" << steps_per_sample
       << " blew_up=" << (blew_up ? 1 : 0) << '\n';
    os << "t";
    for (const auto& c : columns) os << ',' << c;
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < times.size(); ++i) {
      os << times[i];
      for (double v : rows[i]) os << ',' << v;
      os << '\n';
    }
  }
};

}  // namespace rnsm
