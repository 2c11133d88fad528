#pragma once

#include <cstddef>
#include <vector>

#include "percept/common.hpp"
#include "percept/date.hpp"

namespace percept {

// Contiguous daily series; index i holds the value for start + i.
// Gaps are explicit kMissing entries, never dropped rows.
struct DailySeries {
  Date start{};
  std::vector<double> values;

  size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  Date date_at(size_t i) const { return start + static_cast<int32_t>(i); }
  Date end_date() const { return start + static_cast<int32_t>(values.size()) - 1; }

  bool covers(Date d) const {
    return !values.empty() && d >= start && d <= end_date();
  }
  double at_date(Date d) const { return covers(d) ? values[static_cast<size_t>(d - start)] : kMissing; }
  double& operator[](size_t i) { return values[i]; }
  double operator[](size_t i) const { return values[i]; }

  size_t count_present() const {
    size_t n = 0;
    for (double v : values) {
      if (!is_missing(v)) ++n;
    }
    return n;
  }
};

inline DailySeries make_series(Date start, std::vector<double> values) {
  return DailySeries{start, std::move(values)};
}

// Pairs of same-date values with both sides present.
inline std::vector<std::pair<double, double>> aligned_pairs(const DailySeries& x,
                                                            const DailySeries& y) {
  std::vector<std::pair<double, double>> out;
  if (x.empty() || y.empty()) return out;
  Date lo = std::max(x.start, y.start);
  Date hi = std::min(x.end_date(), y.end_date());
  for (Date d = lo; d <= hi; ++d) {
    double a = x.at_date(d);
    double b = y.at_date(d);
    if (!is_missing(a) && !is_missing(b)) out.emplace_back(a, b);
  }
  return out;
}

}  // namespace percept
