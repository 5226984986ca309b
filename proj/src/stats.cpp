#include "gbnns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gbnns/common.hpp"

namespace gbnns::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "fit needs >= 2 paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) f.slope_stderr = std::sqrt(sse / static_cast<double>(x.size() - 2) / sxx);
  return f;
}

LinearFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "log-log fit needs positive x");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "log-log fit needs positive y");
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

namespace {

Interval percentile_interval(std::vector<double>& boot, double estimate, double level) {
  std::sort(boot.begin(), boot.end());
  const double tail = (1.0 - level) / 2.0;
  const auto at = [&](double q) {
    const auto i = static_cast<std::size_t>(std::clamp(q * static_cast<double>(boot.size() - 1), 0.0,
                                                       static_cast<double>(boot.size() - 1)));
    return boot[i];
  };
  return {estimate, at(tail), at(1.0 - tail)};
}

}  // namespace

Interval bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed, double level) {
  if (values.empty() || resamples < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs data and resamples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> boot(static_cast<std::size_t>(resamples));
  for (double& b : boot) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[pick(rng)];
    b = sum / static_cast<double>(values.size());
  }
  return percentile_interval(boot, mean(values), level);
}

Interval bootstrap_mean_difference(std::span<const double> a, std::span<const double> b, int resamples,
                                   std::uint64_t seed, double level) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "paired bootstrap needs equal lengths");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return bootstrap_mean(diff, resamples, seed, level);
}

GoodnessOfFit chi_square(std::span<const std::int64_t> counts, std::span<const double> probabilities) {
  if (counts.size() != probabilities.size() || counts.empty())
    throw Error(ErrorCode::InvalidArgument, "counts and probabilities must align");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  GoodnessOfFit g;
  int categories = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = probabilities[i];
    const double obs = static_cast<double>(counts[i]);
    if (p <= 0.0) {
      if (counts[i] != 0) {
        g.statistic = g.z = g.max_cell_sigma = std::numeric_limits<double>::infinity();
        return g;
      }
      continue;
    }
    ++categories;
    const double expected = total * p;
    g.statistic += (obs - expected) * (obs - expected) / expected;
    const double sigma = std::sqrt(total * p * (1.0 - p));
    if (sigma > 0.0) g.max_cell_sigma = std::max(g.max_cell_sigma, std::abs(obs - expected) / sigma);
  }
  g.dof = std::max(1, categories - 1);
  const double k = g.dof;
  const double c = 2.0 / (9.0 * k);
  g.z = (std::cbrt(g.statistic / k) - (1.0 - c)) / std::sqrt(c);
  return g;
}

}  // namespace gbnns::stats
