#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gbnns/common.hpp"

namespace gbnns {

enum class Metric { Spherical, Euclidean, Angular };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

/// Distance between two vectors. Spherical and Angular take the arc length
/// arccos(<a, b>) of unit vectors; Euclidean is the l2 norm of the difference.
/// Accumulates in double whatever the operands' scalar type.
template <typename DerivedA, typename DerivedB>
double distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                Metric metric) {
  if (metric == Metric::Euclidean) {
    return (a.template cast<double>() - b.template cast<double>()).norm();
  }
  const double dot = a.template cast<double>().dot(b.template cast<double>());
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

/// Points on the unit sphere S^d, stored one per column (d + 1 rows).
/// Immutable once built.
class Dataset {
 public:
  /// Validates n >= 2 and unit norm of every column (within 1e-6).
  Dataset(Eigen::MatrixXd points, Metric metric, std::string id);

  Eigen::Index size() const noexcept { return points_.cols(); }
  /// Ambient dimension d + 1.
  Eigen::Index dim() const noexcept { return points_.rows(); }
  /// Sphere dimension d.
  int sphere_dim() const noexcept { return static_cast<int>(points_.rows()) - 1; }

  const Eigen::MatrixXd& points() const noexcept { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }
  Metric metric() const noexcept { return metric_; }
  const std::string& id() const noexcept { return id_; }

  double distance(Eigen::Index i, Eigen::Index j) const {
    return gbnns::distance(points_.col(i), points_.col(j), metric_);
  }

 private:
  Eigen::MatrixXd points_;
  Metric metric_;
  std::string id_;
};

/// Scales every column to unit norm. Throws DegenerateDistance on a zero column.
void normalize_columns(Eigen::MatrixXd& points);

struct QuerySet {
  Eigen::MatrixXd queries;  // one unit query per column
  std::vector<NodeId> ground_truth;
  std::optional<double> planted_radius;
  std::vector<NodeId> planted;  // empty unless planted

  Eigen::Index size() const noexcept { return queries.cols(); }
};

enum class Regime { Dense, Moderate, Sparse };

std::string_view to_string(Regime regime);

/// Regime tag for (n, d). Dense iff d < log2 n; Sparse iff d > 2 log2 n.
/// omega is log2(n) / d for dense data and d / log2(n) otherwise.
struct RegimeParams {
  std::int64_t n = 0;
  int d = 0;
  double omega = 0.0;
  Regime regime = Regime::Dense;

  /// Characteristic scale: 2^-omega (dense) or 2 ln 2 / omega (sparse).
  double delta() const;
};

RegimeParams regime_params(std::int64_t n, int d);

/// n points uniform on S^d (normalised Gaussians in R^(d+1)).
Dataset generate_uniform(std::int64_t n, int d, std::uint64_t seed);

/// Queries planted uniformly within geodesic radius R of a uniformly chosen
/// dataset element. Ground truth is recomputed exhaustively.
QuerySet plant_queries(const Dataset& ds, std::int64_t m, double radius, std::uint64_t seed);

/// Queries uniform on S^d with exhaustive ground truth.
QuerySet sample_queries_uniform(const Dataset& ds, std::int64_t m, std::uint64_t seed);

/// Wraps externally supplied queries (e.g. read from disk) and computes their
/// ground truth. Columns are normalised.
QuerySet make_query_set(const Dataset& ds, Eigen::MatrixXd queries);

/// Exact nearest neighbour of each query column: maximum inner product,
/// ties broken by the lowest index.
std::vector<NodeId> exhaustive_nearest(const Dataset& ds, const Eigen::MatrixXd& queries);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::int64_t> counts;
  std::vector<double> nn_distances;  // per point, in dataset order

  double bin_width() const { return (upper - lower) / static_cast<double>(counts.size()); }
  double bin_center(std::size_t i) const { return lower + (static_cast<double>(i) + 0.5) * bin_width(); }
};

/// Exhaustive distance from every point to its nearest other point, binned
/// over [0, max]. A degenerate range (all distances equal) puts everything in
/// the bin holding that value.
Histogram nn_distance_histogram(const Dataset& ds, int bins, std::optional<double> upper = std::nullopt);

}  // namespace gbnns
