// Small statistics helpers for aggregating success rates across groups.
#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "pudsim/errors.hpp"

namespace pudsim {

struct Summary {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Median of sorted[lo, hi] (inclusive bounds).
inline double median_of_range(const std::vector<double>& sorted, std::size_t lo,
                              std::size_t hi) {
  const std::size_t n = hi - lo + 1;
  const std::size_t mid = lo + n / 2;
  if (n % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

// Five-number summary plus mean.  Quartiles use the median-inclusive rule:
// each half contains the overall median element when the count is odd, so
// {1,2,3,4,5} -> q1=2, median=3, q3=4 and {1,2,3,4} -> 1.5, 2.5, 3.5.
inline Summary summarize(std::vector<double> values) {
  if (values.empty()) throw Error("summarize: empty sample");
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  const std::size_t n = values.size();
  s.median = median_of_range(values, 0, n - 1);
  if (n == 1) {
    s.q1 = s.q3 = values[0];
  } else {
    const std::size_t half = n / 2;
    // Lower half: [0, ...], upper half: [..., n-1]; both include the middle
    // element when n is odd.
    const std::size_t lower_hi = (n % 2 == 1) ? half : half - 1;
    const std::size_t upper_lo = (n % 2 == 1) ? half : half;
    s.q1 = median_of_range(values, 0, lower_hi);
    s.q3 = median_of_range(values, upper_lo, n - 1);
  }
  return s;
}

}  // namespace pudsim
