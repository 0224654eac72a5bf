#pragma once

#include <span>

namespace wifico {

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, t-distribution with n - 2 df
};

// Undefined correlation (a constant input) is reported as r = 0, p = 1.
// Throws Error on size mismatch or n < 3.
Correlation pearson_r(std::span<const double> x, std::span<const double> y);

struct ZouInterval {
  double difference = 0.0;  // r_jk - r_jh
  double lower = 0.0;
  double upper = 0.0;
  double p = 1.0;  // smallest 1 - confidence whose interval excludes 0
  bool significant = false;
};

// Interval for the difference of two dependent correlations sharing
// variable j. Throws Error when any |r| >= 1, n <= 3, confidence is outside
// (0, 1), or the three correlations are not a valid correlation matrix.
ZouInterval zou_compare(double r_jk, double r_jh, double r_kh, std::size_t n,
                        double confidence = 0.90);

// "**" p < 0.01, "*" p < 0.05, "." p < 0.1, "-" otherwise.
const char* significance_marker(double p);

}  // namespace wifico
