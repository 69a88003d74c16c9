#pragma once

#include <cstddef>
#include <vector>

namespace mipred::eval {

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction;
// absolute error well under 1e-10 for the t-test's parameter range.
double incomplete_beta(double a, double b, double x);

// Student-t CDF via I_x(df/2, 1/2) with x = df/(df + t^2).
double t_cdf(double t, std::size_t df);

struct TTestResult {
    double t_statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;  // two-sided
    double mean_difference = 0.0;
    bool zero_variance = false;
};

// Two-sided paired t-test on per-pair differences a_i - b_i, sample standard
// deviation (n-1). Zero-variance differences short-circuit: p = 1 when the
// mean difference is 0, else p = 0.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mipred::eval
