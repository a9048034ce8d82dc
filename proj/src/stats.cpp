#include <kinprim/stats.hpp>

#include <kinprim/error.hpp>

#include <cmath>
#include <limits>
#include <numeric>

namespace kinprim {

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

namespace {

double sum_sq_dev(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s;
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 1000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  return h;
}

}  // namespace

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(sum_sq_dev(x, mean(x)) / static_cast<double>(x.size() - 1));
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta: a and b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("student t: df must be > 0");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_tailed_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

TTestResult independent_ttest(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw ParameterError("t-test: each sample needs at least 2 values");
  TTestResult r;
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  r.mean_x = mean(x);
  r.mean_y = mean(y);
  const double ssx = sum_sq_dev(x, r.mean_x), ssy = sum_sq_dev(y, r.mean_y);
  r.sd_x = std::sqrt(ssx / (nx - 1.0));
  r.sd_y = std::sqrt(ssy / (ny - 1.0));
  r.df = static_cast<int>(x.size() + y.size() - 2);
  const double pooled = (ssx + ssy) / r.df;
  const double se = std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
  const double diff = r.mean_x - r.mean_y;
  if (se == 0.0) {
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / se;
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

}  // namespace kinprim
