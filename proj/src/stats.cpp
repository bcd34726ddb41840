#include "persuasion/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "persuasion/rng.hpp"

namespace persuasion {

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    const auto n = values.size();
    if (n < 2) throw std::invalid_argument("sample_sd: need at least two values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
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
        const double m2 = 2.0 * m;
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
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cont_frac(a, b, x) / a;
    }
    return 1.0 - std::exp(ln_front) * beta_cont_frac(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double nu) {
    if (nu <= 0.0) throw std::invalid_argument("student_t_cdf: nu must be positive");
    if (t == 0.0) return 0.5;
    const double x = nu / (nu + t * t);
    const double p = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
    return t > 0.0 ? 1.0 - p : p;
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation, then one Halley refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / M_SQRT2) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double student_t_quantile(double p, double nu) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p outside (0,1)");
    if (nu <= 0.0) throw std::invalid_argument("student_t_quantile: nu must be positive");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, nu);

    // Bracket above the normal quantile, then bisect plus Newton on the CDF.
    double lo = normal_quantile(p);
    if (!(lo > 0.0)) lo = 0.0;
    double hi = std::max(2.0 * lo, 2.0);
    while (student_t_cdf(hi, nu) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    double x = 0.5 * (lo + hi);
    const double ln_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                           0.5 * std::log(nu * M_PI);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = student_t_cdf(x, nu) - p;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double pdf = std::exp(ln_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
        double next = x - f / pdf;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-14 * std::max(1.0, std::fabs(x))) return next;
        x = next;
    }
    return x;
}

Interval bayesian_mean_ci(std::span<const double> values, double level) {
    const auto n = values.size();
    if (n < 2) throw std::invalid_argument("bayesian_mean_ci: need at least two values");
    if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("bayesian_mean_ci: bad level");
    const double m = mean(values);
    const double sd = sample_sd(values);
    if (sd == 0.0) return {m, m, m};
    const double scale = sd / std::sqrt(static_cast<double>(n));
    const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(n - 1));
    return {m, m - t * scale, m + t * scale};
}

Interval bootstrap_mean_ci(std::span<const double> values, double level,
                           int resamples, std::uint64_t seed) {
    const auto n = values.size();
    if (n < 2) throw std::invalid_argument("bootstrap_mean_ci: need at least two values");
    if (resamples < 2) throw std::invalid_argument("bootstrap_mean_ci: need at least two resamples");
    Rng rng(seed);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (auto& bm : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += values[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n)))];
        }
        bm = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double alpha = 0.5 * (1.0 - level);
    auto quantile_at = [&](double q) {
        // nearest-rank on the sorted resample means
        const auto idx = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(resamples) - 1.0,
                             std::floor(q * static_cast<double>(resamples))));
        return means[idx];
    };
    return {mean(values), quantile_at(alpha), quantile_at(1.0 - alpha)};
}

}  // namespace persuasion
