#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>

#include "gbnns/data.hpp"
#include "gbnns/search.hpp"

namespace gbnns {

enum class TransformKind : std::uint8_t { Identity = 0, RandomProjection = 1, PcaProjection = 2 };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

struct TransformSpec {
  TransformKind kind = TransformKind::Identity;
  /// Output ambient dimension; ignored by Identity.
  int target_dim = 0;
  std::uint64_t seed = 0;
};

/// Linear map to a lower-dimensional sphere: x -> normalize(P (x - mean)).
/// RandomProjection: P has orthonormal rows (QR of a seeded Gaussian matrix),
/// mean = 0. PcaProjection: P holds the leading principal axes of the fitted
/// data, mean its centroid. Identity passes vectors through untouched.
class Transform {
 public:
  Transform() = default;
  Transform(TransformKind kind, Eigen::MatrixXd projection, Eigen::VectorXd mean, std::string tag);

  TransformKind kind() const noexcept { return kind_; }
  Eigen::Index input_dim() const noexcept { return kind_ == TransformKind::Identity ? mean_.size() : projection_.cols(); }
  Eigen::Index output_dim() const noexcept { return kind_ == TransformKind::Identity ? mean_.size() : projection_.rows(); }
  const Eigen::MatrixXd& projection() const noexcept { return projection_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const std::string& tag() const noexcept { return tag_; }

  /// Maps every column; throws DimensionMismatch or DegenerateDistance (a
  /// vector projecting to zero).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& vectors) const;
  Dataset apply(const Dataset& ds) const;

  bool operator==(const Transform&) const = default;

 private:
  TransformKind kind_ = TransformKind::Identity;
  Eigen::MatrixXd projection_;
  Eigen::VectorXd mean_;  // Identity: zero vector carrying the dimension
  std::string tag_;
};

struct FittedTransform {
  Dataset transformed;
  Transform transform;
};

/// Throws InvalidArgument if target_dim exceeds the dataset dimension or is < 2.
FittedTransform fit_transform(const Dataset& ds, const TransformSpec& spec);

void save_transform(const std::filesystem::path& path, const Transform& t);
Transform load_transform(const std::filesystem::path& path);

struct RerankResult {
  NodeId answer = 0;      // best pool member in the original space
  NodeId low_answer = 0;  // plain low-space answer
  SearchResult low;       // low-space beam search
  std::int64_t low_distance_computations = 0;
  std::int64_t original_distance_computations = 0;
};

/// Beam search in the transformed space, then re-rank the final pool by
/// original-space distance to q_orig. Ties by lower index.
RerankResult search_and_rerank(const SearchGraph& g_low, const Dataset& ds_low, const Dataset& ds_orig,
                               const Eigen::Ref<const Eigen::VectorXd>& q_orig, const Transform& transform,
                               const SearchConfig& cfg);

struct RerankEvaluation {
  std::int64_t queries = 0;
  double recall_rerank = 0.0;
  double recall_low_only = 0.0;
  double mean_low_distance_computations = 0.0;
  double mean_original_distance_computations = 0.0;
  double wall_seconds = 0.0;
  std::vector<RerankResult> per_query;
};

/// Ground truth is the original-space nearest neighbour in `qs`.
RerankEvaluation evaluate_rerank(const SearchGraph& g_low, const Dataset& ds_low, const Dataset& ds_orig,
                                 const QuerySet& qs, const Transform& transform, const SearchConfig& cfg,
                                 bool keep_per_query = false);

}  // namespace gbnns
