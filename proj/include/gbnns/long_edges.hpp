#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gbnns/data.hpp"
#include "gbnns/graph.hpp"

namespace gbnns {

/// Long-range edge sampling. Every scheme draws `edges_per_node` targets per
/// source independently (with replacement) and keeps the distinct ones, so a
/// node ends up with at most that many long edges. Node v draws from its own
/// stream derive_seed(seed, v); results do not depend on the thread count.
struct LongEdgeConfig {
  LongEdgeScheme scheme = LongEdgeScheme::KleinbergRank;
  /// Draws per node; 0 selects ceil(log2 n).
  int edges_per_node = 0;
  /// Pre-sample size is ceil(n^phi), clamped to n - 1 (RankPresampled only).
  double phi = 0.5;
  std::uint64_t seed = 0;
  /// KleinbergDistance only: never link to nodes within n^(-1/d).
  bool exclude_near = false;
  /// KleinbergDistance only: draw through an alias table instead of a binary
  /// search over the cumulative weights. Same distribution, different stream.
  bool use_alias = false;

  int resolved_edges(std::int64_t n) const;
  std::int64_t presample_size(std::int64_t n) const;
  void validate(std::int64_t n) const;
};

/// Exact target distribution for one source: entry j is P(draw = j), zero at
/// the source itself. Defined for KleinbergDistance (rho^-d weights),
/// KleinbergRank ((1/k) / H_(n-1) by rank) and UniformRandom; RankPresampled
/// has no closed form and throws InvalidArgument.
std::vector<double> target_distribution(const Dataset& ds, NodeId source, const LongEdgeConfig& cfg);

/// Raw (not deduplicated) draws for one source from `rng`.
std::vector<NodeId> draw_long_targets(const Dataset& ds, NodeId source, const LongEdgeConfig& cfg,
                                      std::size_t draws, std::mt19937_64& rng);

LongEdges sample_distance_based(const Dataset& ds, const LongEdgeConfig& cfg);
LongEdges sample_rank_based(const Dataset& ds, const LongEdgeConfig& cfg);
LongEdges sample_rank_presampled(const Dataset& ds, const LongEdgeConfig& cfg);
LongEdges sample_uniform_random(const Dataset& ds, const LongEdgeConfig& cfg);
/// Dispatches on cfg.scheme.
LongEdges sample_long_edges(const Dataset& ds, const LongEdgeConfig& cfg);

/// Returns `g` with its long edges replaced by `edges`. Local adjacency is
/// untouched. Throws IndexMismatch if the lists do not fit the graph.
SearchGraph attach(SearchGraph g, LongEdges edges);

/// Drops exact duplicate points (keeps the first copy). Distance-based
/// sampling rejects datasets that still contain duplicates.
Dataset deduplicate(const Dataset& ds);

}  // namespace gbnns
