#pragma once

#include <cstddef>
#include <span>

namespace kinprim {

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);

// I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
// P(|T| >= |t|) for T ~ Student-t(df).
double student_t_two_tailed_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;  // two-tailed
  double mean_x = 0.0, mean_y = 0.0;
  double sd_x = 0.0, sd_y = 0.0;
};

// Pooled-variance (Student) two-sample t-test, df = n_x + n_y - 2.
// Zero pooled variance: equal means give t = 0, p = 1; unequal means give a
// signed infinite t and p = 0.
TTestResult independent_ttest(std::span<const double> x, std::span<const double> y);

}  // namespace kinprim
