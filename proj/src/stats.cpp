#include "wifico/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>

#include "wifico/error.hpp"

namespace wifico {

Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson_r: size mismatch");
  const auto n = x.size();
  if (n < 3) throw Error("pearson_r needs at least 3 samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {};
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  double df = static_cast<double>(n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  boost::math::students_t dist(df);
  c.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

namespace {

struct Limits {
  double lower, upper;
};

Limits fisher_limits(double r, std::size_t n, double z_crit) {
  double z = std::atanh(r);
  double half = z_crit / std::sqrt(static_cast<double>(n) - 3.0);
  return {std::tanh(z - half), std::tanh(z + half)};
}

void zou_bounds(double r1, double r2, double c, std::size_t n, double confidence, double& lo,
                double& hi) {
  boost::math::normal normal;
  double z_crit = boost::math::quantile(normal, 1.0 - (1.0 - confidence) / 2.0);
  auto [l1, u1] = fisher_limits(r1, n, z_crit);
  auto [l2, u2] = fisher_limits(r2, n, z_crit);
  double d = r1 - r2;
  lo = d - std::sqrt(std::max(0.0, (r1 - l1) * (r1 - l1) + (u2 - r2) * (u2 - r2) -
                                       2.0 * c * (r1 - l1) * (u2 - r2)));
  hi = d + std::sqrt(std::max(0.0, (u1 - r1) * (u1 - r1) + (r2 - l2) * (r2 - l2) -
                                       2.0 * c * (u1 - r1) * (r2 - l2)));
}

}  // namespace

ZouInterval zou_compare(double r_jk, double r_jh, double r_kh, std::size_t n, double confidence) {
  for (double r : {r_jk, r_jh, r_kh}) {
    if (!(std::abs(r) < 1.0)) throw Error("zou_compare: correlations must satisfy |r| < 1");
  }
  if (n <= 3) throw Error("zou_compare needs n > 3");
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("zou_compare: confidence must be in (0, 1)");
  double det = 1.0 - r_jk * r_jk - r_jh * r_jh - r_kh * r_kh + 2.0 * r_jk * r_jh * r_kh;
  if (det < 0.0) throw Error("zou_compare: correlations do not form a positive semidefinite matrix");

  double c = ((r_kh - 0.5 * r_jk * r_jh) * (1.0 - r_jk * r_jk - r_jh * r_jh - r_kh * r_kh) +
              r_kh * r_kh * r_kh) /
             ((1.0 - r_jk * r_jk) * (1.0 - r_jh * r_jh));
  ZouInterval out;
  out.difference = r_jk - r_jh;
  zou_bounds(r_jk, r_jh, c, n, confidence, out.lower, out.upper);
  out.significant = out.lower > 0.0 || out.upper < 0.0;

  if (out.difference == 0.0) {
    out.p = 1.0;
    return out;
  }
  // Interval width grows with confidence; bisect for the level touching 0.
  double lo_alpha = 1e-12, hi_alpha = 1.0 - 1e-12;
  auto excludes = [&](double alpha) {
    double l, h;
    zou_bounds(r_jk, r_jh, c, n, 1.0 - alpha, l, h);
    return l > 0.0 || h < 0.0;
  };
  if (excludes(lo_alpha)) {
    out.p = lo_alpha;
    return out;
  }
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo_alpha + hi_alpha);
    if (excludes(mid)) hi_alpha = mid;
    else lo_alpha = mid;
  }
  out.p = hi_alpha;
  return out;
}

const char* significance_marker(double p) {
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "-";
}

}  // namespace wifico
