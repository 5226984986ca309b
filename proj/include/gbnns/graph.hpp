#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbnns/common.hpp"
#include "gbnns/data.hpp"

namespace gbnns {

enum class GraphKind : std::uint8_t { ThresholdDense = 0, ThresholdSparse = 1, Knn = 2 };

std::string_view to_string(GraphKind kind);

struct GraphConfig {
  GraphKind kind = GraphKind::Knn;
  double M = 0.0;  // threshold kinds
  int k = 0;       // Knn
  /// Dense only: clamp an out-of-range threshold to pi/2 instead of throwing.
  bool cap_at_half_pi = false;
  /// Knn only: add reverse edges so every list is symmetric. Off by default.
  bool symmetrize = false;

  static GraphConfig dense(double M, bool cap = false) { return {GraphKind::ThresholdDense, M, 0, cap, false}; }
  static GraphConfig sparse(double M) { return {GraphKind::ThresholdSparse, M, 0, false, false}; }
  static GraphConfig knn(int k, bool symmetrize = false) { return {GraphKind::Knn, 0.0, k, false, symmetrize}; }

  /// Throws InvalidArgument unless the kind's parameter is in range for n points.
  void validate(std::int64_t n) const;
  /// Canonical text form, e.g. "dense:M=1.5"; hashed into graph files.
  std::string describe() const;
};

/// Connection radius of a threshold graph: arcsin(M n^(-1/d)) for dense
/// graphs, arccos(sqrt(2 M ln n / d)) for sparse ones. Throws AngleOutOfRange
/// (dense, uncapped) or RegimeMismatch (sparse) when the argument exceeds 1.
double threshold_angle(const GraphConfig& config, std::int64_t n, int d);

enum class LongEdgeScheme : std::uint8_t {
  KleinbergDistance = 0,
  KleinbergRank = 1,
  UniformRandom = 2,
  RankPresampled = 3,
};

std::string_view to_string(LongEdgeScheme scheme);
LongEdgeScheme parse_long_edge_scheme(std::string_view name);

using AdjacencyLists = std::vector<std::vector<NodeId>>;

struct LongEdges {
  LongEdgeScheme scheme = LongEdgeScheme::KleinbergRank;
  AdjacencyLists targets;
};

/// Local adjacency plus separately tagged long-range edges.
///
/// Threshold graphs keep each list sorted by index and are symmetric. Knn
/// graphs store directed out-lists in rank order (nearest first), so a prefix
/// of length k' is the k'-NN list.
class SearchGraph {
 public:
  SearchGraph(AdjacencyLists local, GraphConfig config, std::string dataset_id);

  std::size_t size() const noexcept { return local_.size(); }
  std::span<const NodeId> local(NodeId v) const { return local_[v]; }
  std::span<const NodeId> long_edges(NodeId v) const {
    return long_ ? std::span<const NodeId>(long_->targets[v]) : std::span<const NodeId>();
  }
  bool has_long_edges() const noexcept { return long_.has_value(); }
  std::optional<LongEdgeScheme> long_edge_scheme() const {
    return long_ ? std::optional(long_->scheme) : std::nullopt;
  }

  const AdjacencyLists& local_lists() const noexcept { return local_; }
  const LongEdges* long_edge_set() const noexcept { return long_ ? &*long_ : nullptr; }
  const GraphConfig& config() const noexcept { return config_; }
  const std::string& dataset_id() const noexcept { return dataset_id_; }

  /// Replaces (never appends to) the long-range edges.
  void set_long_edges(std::optional<LongEdges> edges);

  bool operator==(const SearchGraph&) const = default;

 private:
  AdjacencyLists local_;
  std::optional<LongEdges> long_;
  GraphConfig config_;
  std::string dataset_id_;
};

inline bool operator==(const GraphConfig& a, const GraphConfig& b) {
  return a.kind == b.kind && a.M == b.M && a.k == b.k && a.cap_at_half_pi == b.cap_at_half_pi &&
         a.symmetrize == b.symmetrize;
}
inline bool operator==(const LongEdges& a, const LongEdges& b) {
  return a.scheme == b.scheme && a.targets == b.targets;
}

/// All pairs with spherical distance <= threshold; exhaustive.
SearchGraph build_threshold(const Dataset& ds, double angle, GraphConfig config);
SearchGraph build_threshold_dense(const Dataset& ds, double M, bool cap_at_half_pi = false);
SearchGraph build_threshold_sparse(const Dataset& ds, double M);
/// Exact k-NN out-lists (ties by index), exhaustive.
SearchGraph build_knn(const Dataset& ds, int k, bool symmetrize = false);
SearchGraph build_graph(const Dataset& ds, const GraphConfig& config);

/// Copy of a (non-symmetrised) Knn graph keeping the first k entries per list.
SearchGraph truncate_knn(const SearchGraph& g, int k);

struct GraphStats {
  double mean_degree = 0.0;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  /// Undirected edges for symmetric graphs, directed arcs otherwise.
  std::size_t edge_count = 0;
  /// Expected local degree: (n - 1) C(alpha_M) for threshold graphs, k for Knn.
  double expected_f = 0.0;
};

std::vector<std::size_t> local_degrees(const SearchGraph& g);
GraphStats graph_stats(const SearchGraph& g, const Dataset& ds);

/// Throws DatasetMismatch unless the graph was built over `ds`.
void check_graph_matches(const SearchGraph& g, const Dataset& ds);

// Binary graph file: header (magic, version, n, kind, params, dataset id hash,
// config hash, dataset id), LEB128-varint neighbour lists per node, then an
// optional long-edge section tagged with its scheme.
void save_graph(const std::filesystem::path& path, const SearchGraph& g);
SearchGraph load_graph(const std::filesystem::path& path);
SearchGraph load_graph(const std::filesystem::path& path, const Dataset& expected);

}  // namespace gbnns
