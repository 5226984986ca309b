#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "gbnns/data.hpp"
#include "gbnns/graph.hpp"

namespace gbnns {

enum class SearchAlgorithm { Greedy, Beam };

std::string_view to_string(SearchAlgorithm algorithm);
SearchAlgorithm parse_search_algorithm(std::string_view name);

struct StartPolicy {
  enum class Kind { RandomHemisphere, FixedIndex };
  Kind kind = Kind::RandomHemisphere;
  NodeId index = 0;

  static StartPolicy random_hemisphere() { return {}; }
  static StartPolicy fixed(NodeId i) { return {Kind::FixedIndex, i}; }
};

inline constexpr int kStartDraws = 64;

struct SearchConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::Greedy;
  int beam_width = 1;
  bool llf = false;
  StartPolicy start;
  /// Bound on node expansions; 0 selects the default (see resolved_max_steps).
  std::int64_t max_steps = 0;
  std::uint64_t seed = 0;

  void validate() const;
  /// max_steps if set, else ceil(16 n^(1/d) log2 n), times beam_width for beam search.
  std::int64_t resolved_max_steps(std::int64_t n, int d) const;
};

struct SearchResult {
  NodeId answer = 0;
  /// Node-to-node moves. For beam search: expansions after the first, plus
  /// one when the expansion budget ran out with a candidate still pending.
  std::int64_t steps = 0;
  std::int64_t distance_computations = 0;
  std::int64_t visited = 0;
  bool success_exact = false;
  bool hit_max_steps = false;
};

/// Per-thread scratch for one query at a time: distance cache and counters.
/// Every node's distance to the query is computed at most once per query.
class SearchContext {
 public:
  explicit SearchContext(const Dataset& ds);

  void begin(const Eigen::Ref<const Eigen::VectorXd>& query);

  /// Inner product with the query; evaluated (and counted) on first use.
  double dot(NodeId v);
  bool evaluated(NodeId v) const { return evaluated_[v] == epoch_; }

  /// A node is "considered" once it has competed as a move target or pool
  /// entry. Nodes seen only as rejected start draws are not yet considered.
  bool considered(NodeId v) const { return considered_[v] == epoch_; }
  void mark_considered(NodeId v) { considered_[v] = epoch_; }

  std::int64_t distance_computations() const noexcept { return computations_; }
  const Dataset& dataset() const noexcept { return *ds_; }

 private:
  const Dataset* ds_;
  const double* query_ = nullptr;
  std::vector<std::uint32_t> evaluated_;
  std::vector<std::uint32_t> considered_;
  std::vector<double> dots_;
  std::uint32_t epoch_ = 0;
  std::int64_t computations_ = 0;
};

/// Bounded beam ordered by distance ascending (inner product descending),
/// ties by lower index. Once full, a candidate enters only if strictly closer
/// than the current worst member, which it then evicts.
class CandidatePool {
 public:
  struct Entry {
    double dot;
    NodeId node;
    bool expanded;
  };

  explicit CandidatePool(std::size_t capacity) : capacity_(capacity) { entries_.reserve(capacity + 1); }

  bool insert(double dot, NodeId node);
  /// Position of the closest unexpanded member, or size() if none.
  std::size_t next_unexpanded() const;
  void mark_expanded(std::size_t pos) { entries_[pos].expanded = true; }

  const Entry& best() const { return entries_.front(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;
};

/// Evaluates the start node (RandomHemisphere: up to kStartDraws seeded draws,
/// the first with rho < pi/2 wins, else the closest draw). Draws are charged.
NodeId pick_start(SearchContext& ctx, const SearchConfig& cfg);

SearchResult greedy_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg);
SearchResult beam_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg,
                         std::vector<CandidatePool::Entry>* final_pool = nullptr);
/// Dispatches on cfg.algorithm.
SearchResult run_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg);

/// One-shot conveniences that allocate a context.
SearchResult greedy_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                           const SearchConfig& cfg);
SearchResult beam_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                         const SearchConfig& cfg);
SearchResult run_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                        const SearchConfig& cfg);

/// Seed for query i of a query set: per-query streams keep results
/// independent of the thread count.
inline std::uint64_t query_seed(std::uint64_t seed, std::int64_t i) {
  return derive_seed(seed, static_cast<std::uint64_t>(i));
}

struct QueryEvaluation {
  std::int64_t queries = 0;
  double recall_at_1 = 0.0;
  double mean_steps = 0.0;
  double mean_distance_computations = 0.0;
  std::int64_t total_steps = 0;
  std::int64_t total_distance_computations = 0;
  std::int64_t max_steps_hits = 0;
  /// Fraction of answers within `success_radius` of their query (if requested).
  std::optional<double> radius_success;
  double wall_seconds = 0.0;
  std::vector<SearchResult> per_query;  // filled when requested
};

struct EvaluationOptions {
  bool keep_per_query = false;
  std::optional<double> success_radius;
};

QueryEvaluation evaluate_query_set(const SearchGraph& g, const Dataset& ds, const QuerySet& qs,
                                   const SearchConfig& cfg, const EvaluationOptions& options = {});

}  // namespace gbnns
