#include "mipred/stats.hpp"

#include <cmath>
#include <limits>

#include "mipred/error.hpp"

namespace mipred::eval {

namespace {

// Continued-fraction kernel for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw ParamError("incomplete_beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
        b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, std::size_t df) {
    if (df < 1) throw ParamError("t_cdf requires df >= 1");
    const double v = static_cast<double>(df);
    const double x = v / (v + t * t);
    const double tail = incomplete_beta(v / 2.0, 0.5, x);  // = 2 P(T >= |t|)
    return t >= 0.0 ? 1.0 - 0.5 * tail : 0.5 * tail;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("paired t-test requires equally long vectors");
    if (a.size() < 2) throw DataError("paired t-test requires at least two pairs");
    const std::size_t n = a.size();

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult result;
    result.degrees_of_freedom = n - 1;
    result.mean_difference = mean;
    if (sd == 0.0) {
        result.zero_variance = true;
        result.t_statistic = mean == 0.0 ? 0.0
                                         : std::copysign(
                                               std::numeric_limits<double>::infinity(), mean);
        result.p_value = mean == 0.0 ? 1.0 : 0.0;
        return result;
    }
    result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    const double t = result.t_statistic;
    const double v = static_cast<double>(result.degrees_of_freedom);
    // Two-sided p directly from the tail mass of the beta form.
    result.p_value = incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
    return result;
}

}  // namespace mipred::eval
