#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gbnns::stats {

double mean(std::span<const double> values);
double median(std::vector<double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
/// Least squares on (ln x, ln y); all values must be positive.
LinearFit fit_log_log(std::span<const double> x, std::span<const double> y);

struct Interval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the mean of `values`.
Interval bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed, double level = 0.95);

/// Paired bootstrap for mean(a - b) over matched observations.
Interval bootstrap_mean_difference(std::span<const double> a, std::span<const double> b, int resamples,
                                   std::uint64_t seed, double level = 0.95);

struct GoodnessOfFit {
  double statistic = 0.0;  // Pearson chi-square
  int dof = 0;
  /// Wilson-Hilferty normal score of the statistic; <= 3 is within 3 sigma.
  double z = 0.0;
  /// Largest |observed - expected| / sqrt(N p (1 - p)) over categories.
  double max_cell_sigma = 0.0;
};

/// Categories with zero probability must have zero counts (else z = +inf).
GoodnessOfFit chi_square(std::span<const std::int64_t> counts, std::span<const double> probabilities);

}  // namespace gbnns::stats
