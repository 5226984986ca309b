#include "gbnns/data.hpp"

#include <limits>
#include <numbers>
#include <random>

#include "kernels.hpp"

namespace gbnns {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Spherical: return "spherical";
    case Metric::Euclidean: return "euclidean";
    case Metric::Angular: return "angular";
  }
  return "spherical";
}

Metric parse_metric(std::string_view name) {
  if (name == "spherical") return Metric::Spherical;
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "angular") return Metric::Angular;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Dense: return "dense";
    case Regime::Moderate: return "moderate";
    case Regime::Sparse: return "sparse";
  }
  return "dense";
}

Dataset::Dataset(Eigen::MatrixXd points, Metric metric, std::string id)
    : points_(std::move(points)), metric_(metric), id_(std::move(id)) {
  if (points_.cols() < 2) throw Error(ErrorCode::InvalidArgument, "a dataset needs at least 2 points");
  if (points_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "vectors need at least 2 components");
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    if (std::abs(points_.col(i).norm() - 1.0) > 1e-6)
      throw Error(ErrorCode::NotUnitNorm, "point " + std::to_string(i) + " is not unit norm");
  }
}

void normalize_columns(Eigen::MatrixXd& points) {
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const double norm = points.col(i).norm();
    if (norm == 0.0 || !std::isfinite(norm))
      throw Error(ErrorCode::DegenerateDistance, "cannot normalise vector " + std::to_string(i));
    points.col(i) /= norm;
  }
}

double RegimeParams::delta() const {
  if (regime == Regime::Dense) return std::exp2(-omega);
  return 2.0 * std::numbers::ln2 / omega;
}

RegimeParams regime_params(std::int64_t n, int d) {
  if (n < 2 || d < 1) throw Error(ErrorCode::InvalidArgument, "regime needs n >= 2 and d >= 1");
  const double log_n = std::log2(static_cast<double>(n));
  RegimeParams p{n, d, 0.0, Regime::Moderate};
  if (d < log_n) {
    p.regime = Regime::Dense;
  } else if (d > 2.0 * log_n) {
    p.regime = Regime::Sparse;
  }
  p.omega = p.regime == Regime::Dense ? log_n / d : d / log_n;
  return p;
}

namespace {

Eigen::MatrixXd gaussian_columns(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Inverse CDF of the polar angle of a uniform point in a cap of geodesic
// radius R on S^d: density proportional to sin^(d-1)(psi) on [0, R].
class CapAngleSampler {
 public:
  CapAngleSampler(double radius, int d) : radius_(radius), cdf_(kGrid + 1, 0.0) {
    const double top = std::sin(radius);
    auto density = [&](double psi) { return std::pow(std::sin(psi) / top, d - 1); };
    double prev = density(0.0);
    for (int i = 1; i <= kGrid; ++i) {
      const double cur = density(radius * i / kGrid);
      cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur);
      prev = cur;
    }
    for (double& c : cdf_) c /= cdf_.back();
  }

  double operator()(double u) const {
    const auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), u);
    const auto i = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), kGrid));
    const double lo = cdf_[i - 1];
    const double hi = cdf_[i];
    const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.0;
    return std::min(radius_, radius_ * (i - 1 + frac) / kGrid);
  }

 private:
  static constexpr int kGrid = 4096;
  double radius_;
  std::vector<double> cdf_;
};

}  // namespace

Dataset generate_uniform(std::int64_t n, int d, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "d must be >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd points = gaussian_columns(d + 1, n, rng);
  normalize_columns(points);
  return Dataset(std::move(points), Metric::Spherical,
                 "uniform-n" + std::to_string(n) + "-d" + std::to_string(d) + "-s" + std::to_string(seed));
}

std::vector<NodeId> exhaustive_nearest(const Dataset& ds, const Eigen::MatrixXd& queries) {
  if (queries.rows() != ds.dim())
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from dataset dimension");
  std::vector<NodeId> best(static_cast<std::size_t>(queries.cols()));
  const Eigen::Index n = ds.size();
  detail::for_each_source(ds.points(), queries, [&](Eigen::Index q, const double* dots) {
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < n; ++j)
      if (detail::closer(dots[j], j, dots[arg], arg)) arg = j;
    best[static_cast<std::size_t>(q)] = static_cast<NodeId>(arg);
  });
  return best;
}

QuerySet make_query_set(const Dataset& ds, Eigen::MatrixXd queries) {
  normalize_columns(queries);
  QuerySet qs;
  qs.ground_truth = exhaustive_nearest(ds, queries);
  qs.queries = std::move(queries);
  return qs;
}

QuerySet plant_queries(const Dataset& ds, std::int64_t m, double radius, std::uint64_t seed) {
  if (!(radius > 0.0 && radius < std::numbers::pi / 2))
    throw Error(ErrorCode::InvalidArgument, "planting radius must lie in (0, pi/2)");
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one query");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, ds.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const CapAngleSampler angle(radius, ds.sphere_dim());

  QuerySet qs;
  qs.queries.resize(ds.dim(), m);
  qs.planted.resize(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    const Eigen::Index centre = pick(rng);
    const double psi = angle(unit(rng));
    const auto x = ds.point(centre);
    Eigen::VectorXd dir(ds.dim());
    double norm = 0.0;
    while (norm < 1e-12) {  // resample the (measure-zero) parallel case
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = normal(rng);
      dir -= dir.dot(x) * x;
      norm = dir.norm();
    }
    qs.queries.col(k) = (std::cos(psi) * x + std::sin(psi) * (dir / norm)).normalized();
    qs.planted[static_cast<std::size_t>(k)] = static_cast<NodeId>(centre);
  }
  qs.ground_truth = exhaustive_nearest(ds, qs.queries);
  qs.planted_radius = radius;
  return qs;
}

QuerySet sample_queries_uniform(const Dataset& ds, std::int64_t m, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "need at least one query");
  std::mt19937_64 rng(seed);
  return make_query_set(ds, gaussian_columns(ds.dim(), m, rng));
}

Histogram nn_distance_histogram(const Dataset& ds, int bins, std::optional<double> upper) {
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
  const Eigen::Index n = ds.size();
  Histogram h;
  h.nn_distances.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> nearest(static_cast<std::size_t>(n));
  detail::for_each_source(ds.points(), ds.points(), [&](Eigen::Index s, const double* dots) {
    Eigen::Index arg = s == 0 ? 1 : 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != s && detail::closer(dots[j], j, dots[arg], arg)) arg = j;
    nearest[static_cast<std::size_t>(s)] = arg;
  });
  for (Eigen::Index s = 0; s < n; ++s)
    h.nn_distances[static_cast<std::size_t>(s)] = ds.distance(s, nearest[static_cast<std::size_t>(s)]);

  h.lower = 0.0;
  h.upper = upper.value_or(*std::max_element(h.nn_distances.begin(), h.nn_distances.end()));
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = h.upper > h.lower ? h.bin_width() : 0.0;
  for (double v : h.nn_distances) {
    if (v > h.upper) continue;
    auto bin = width > 0.0 ? static_cast<std::size_t>((v - h.lower) / width) : 0;
    bin = std::min(bin, h.counts.size() - 1);
    ++h.counts[bin];
  }
  return h;
}

}  // namespace gbnns
