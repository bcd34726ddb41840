#pragma once

#include <cstdint>
#include <span>

namespace persuasion {

/// Equal-tailed interval around a mean estimate.
struct Interval {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

double mean(std::span<const double> values);

/// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> values);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with nu degrees of freedom.
double student_t_cdf(double t, double nu);

/// Inverse CDF of Student's t; p in (0, 1), nu >= 1.
double student_t_quantile(double p, double nu);

/// Inverse CDF of the standard normal; p in (0, 1).
double normal_quantile(double p);

/// Posterior credible interval for the mean under a noninformative prior:
/// Student-t with n-1 degrees of freedom located at the sample mean with
/// scale s/sqrt(n). Constant samples give a width-zero interval at the mean.
/// Throws std::invalid_argument for fewer than two values.
Interval bayesian_mean_ci(std::span<const double> values, double level = 0.95);

/// Percentile bootstrap interval for the mean; deterministic per seed.
Interval bootstrap_mean_ci(std::span<const double> values, double level,
                           int resamples, std::uint64_t seed);

}  // namespace persuasion
