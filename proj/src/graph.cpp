#include "gbnns/graph.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "gbnns/geometry.hpp"
#include "kernels.hpp"

namespace gbnns {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::ThresholdDense: return "dense";
    case GraphKind::ThresholdSparse: return "sparse";
    case GraphKind::Knn: return "knn";
  }
  return "knn";
}

std::string_view to_string(LongEdgeScheme scheme) {
  switch (scheme) {
    case LongEdgeScheme::KleinbergDistance: return "kl-dist";
    case LongEdgeScheme::KleinbergRank: return "kl-rank";
    case LongEdgeScheme::UniformRandom: return "uniform";
    case LongEdgeScheme::RankPresampled: return "kl-rank-presampled";
  }
  return "kl-rank";
}

LongEdgeScheme parse_long_edge_scheme(std::string_view name) {
  if (name == "kl-dist") return LongEdgeScheme::KleinbergDistance;
  if (name == "kl-rank") return LongEdgeScheme::KleinbergRank;
  if (name == "uniform") return LongEdgeScheme::UniformRandom;
  if (name == "kl-rank-presampled") return LongEdgeScheme::RankPresampled;
  throw Error(ErrorCode::InvalidArgument, "unknown long-edge scheme '" + std::string(name) + "'");
}

void GraphConfig::validate(std::int64_t n) const {
  switch (kind) {
    case GraphKind::ThresholdDense:
      if (!(M > 1.0)) throw Error(ErrorCode::InvalidArgument, "dense threshold graphs need M > 1");
      break;
    case GraphKind::ThresholdSparse:
      if (!(M > 0.0 && M < 1.0)) throw Error(ErrorCode::InvalidArgument, "sparse threshold graphs need 0 < M < 1");
      break;
    case GraphKind::Knn:
      if (k < 1 || k >= n) throw Error(ErrorCode::InvalidArgument, "knn graphs need 1 <= k < n");
      break;
  }
}

std::string GraphConfig::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << to_string(kind) << ':';
  if (kind == GraphKind::Knn) {
    out << "k=" << k << (symmetrize ? ",sym" : "");
  } else {
    out << "M=" << M << (cap_at_half_pi ? ",cap" : "");
  }
  return out.str();
}

double threshold_angle(const GraphConfig& config, std::int64_t n, int d) {
  const auto nd = static_cast<double>(n);
  switch (config.kind) {
    case GraphKind::ThresholdDense: {
      const double arg = config.M * std::pow(nd, -1.0 / d);
      if (arg <= 1.0) return std::asin(arg);
      if (!config.cap_at_half_pi)
        throw Error(ErrorCode::AngleOutOfRange, "M n^(-1/d) = " + std::to_string(arg) + " exceeds 1");
      spdlog::warn("threshold argument {:.4f} exceeds 1; capping the radius at pi/2", arg);
      return std::numbers::pi / 2;
    }
    case GraphKind::ThresholdSparse: {
      const double arg = 2.0 * config.M * std::log(nd) / d;
      if (arg > 1.0)
        throw Error(ErrorCode::RegimeMismatch, "2 M ln(n) / d = " + std::to_string(arg) + " exceeds 1");
      return std::acos(std::sqrt(arg));
    }
    case GraphKind::Knn: break;
  }
  throw Error(ErrorCode::InvalidArgument, "knn graphs have no threshold angle");
}

SearchGraph::SearchGraph(AdjacencyLists local, GraphConfig config, std::string dataset_id)
    : local_(std::move(local)), config_(config), dataset_id_(std::move(dataset_id)) {
  const auto n = local_.size();
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : local_[v]) {
      if (u >= n) throw Error(ErrorCode::IndexMismatch, "neighbour index out of range");
      if (u == v) throw Error(ErrorCode::IndexMismatch, "self-loop at node " + std::to_string(v));
    }
  }
}

void SearchGraph::set_long_edges(std::optional<LongEdges> edges) {
  if (edges) {
    const auto n = local_.size();
    if (edges->targets.size() != n)
      throw Error(ErrorCode::IndexMismatch, "long-edge lists cover " + std::to_string(edges->targets.size()) +
                                                " nodes, graph has " + std::to_string(n));
    for (std::size_t v = 0; v < n; ++v) {
      for (NodeId u : edges->targets[v]) {
        if (u >= n || u == v) throw Error(ErrorCode::IndexMismatch, "bad long edge at node " + std::to_string(v));
      }
    }
  }
  long_ = std::move(edges);
}

namespace {

constexpr double kDotBand = 1e-9;

void check_size(const Dataset& ds) {
  if (ds.size() > static_cast<Eigen::Index>(std::numeric_limits<NodeId>::max()))
    throw Error(ErrorCode::InvalidArgument, "dataset too large for 32-bit node ids");
}

}  // namespace

SearchGraph build_threshold(const Dataset& ds, double angle, GraphConfig config) {
  check_size(ds);
  const Eigen::Index n = ds.size();
  const double cos_thr = std::cos(angle);
  // Each row keeps only j > s; the transpose fills the other half, so the
  // result is symmetric whatever rounding the two GEMM entries see.
  AdjacencyLists upper(static_cast<std::size_t>(n));
  detail::for_each_source(ds.points(), ds.points(), [&](Eigen::Index s, const double* dots) {
    auto& row = upper[static_cast<std::size_t>(s)];
    for (Eigen::Index j = s + 1; j < n; ++j) {
      const double dot = dots[j];
      if (dot < cos_thr - kDotBand) continue;
      if (dot <= cos_thr + kDotBand && ds.distance(s, j) > angle) continue;
      row.push_back(static_cast<NodeId>(j));
    }
  });
  AdjacencyLists adj(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < upper.size(); ++s)
    for (NodeId j : upper[s]) adj[j].push_back(static_cast<NodeId>(s));
  for (std::size_t s = 0; s < upper.size(); ++s)
    adj[s].insert(adj[s].end(), upper[s].begin(), upper[s].end());
  return SearchGraph(std::move(adj), config, ds.id());
}

SearchGraph build_threshold_dense(const Dataset& ds, double M, bool cap_at_half_pi) {
  const auto config = GraphConfig::dense(M, cap_at_half_pi);
  config.validate(ds.size());
  return build_threshold(ds, threshold_angle(config, ds.size(), ds.sphere_dim()), config);
}

SearchGraph build_threshold_sparse(const Dataset& ds, double M) {
  const auto config = GraphConfig::sparse(M);
  config.validate(ds.size());
  return build_threshold(ds, threshold_angle(config, ds.size(), ds.sphere_dim()), config);
}

SearchGraph build_knn(const Dataset& ds, int k, bool symmetrize) {
  check_size(ds);
  const auto config = GraphConfig::knn(k, symmetrize);
  config.validate(ds.size());
  const Eigen::Index n = ds.size();
  AdjacencyLists adj(static_cast<std::size_t>(n));
  detail::for_each_source(ds.points(), ds.points(), [&](Eigen::Index s, const double* dots) {
    // Max-heap on "worse" keeps the k best seen; worst sits on top.
    auto worse = [&](Eigen::Index a, Eigen::Index b) { return detail::closer(dots[a], a, dots[b], b); };
    std::priority_queue<Eigen::Index, std::vector<Eigen::Index>, decltype(worse)> heap(worse);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == s) continue;
      if (static_cast<int>(heap.size()) < k) {
        heap.push(j);
      } else if (detail::closer(dots[j], j, dots[heap.top()], heap.top())) {
        heap.pop();
        heap.push(j);
      }
    }
    auto& row = adj[static_cast<std::size_t>(s)];
    row.resize(heap.size());
    for (auto i = row.size(); i-- > 0; heap.pop()) row[i] = static_cast<NodeId>(heap.top());
  });
  if (symmetrize) {
    AdjacencyLists reverse(adj.size());
    for (std::size_t s = 0; s < adj.size(); ++s)
      for (NodeId t : adj[s]) reverse[t].push_back(static_cast<NodeId>(s));
    for (std::size_t s = 0; s < adj.size(); ++s) {
      std::vector<NodeId> own = adj[s];
      std::sort(own.begin(), own.end());
      for (NodeId r : reverse[s])
        if (!std::binary_search(own.begin(), own.end(), r)) adj[s].push_back(r);
    }
  }
  return SearchGraph(std::move(adj), config, ds.id());
}

SearchGraph build_graph(const Dataset& ds, const GraphConfig& config) {
  switch (config.kind) {
    case GraphKind::ThresholdDense: return build_threshold_dense(ds, config.M, config.cap_at_half_pi);
    case GraphKind::ThresholdSparse: return build_threshold_sparse(ds, config.M);
    case GraphKind::Knn: return build_knn(ds, config.k, config.symmetrize);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown graph kind");
}

SearchGraph truncate_knn(const SearchGraph& g, int k) {
  const auto& config = g.config();
  if (config.kind != GraphKind::Knn || config.symmetrize)
    throw Error(ErrorCode::InvalidArgument, "only directed knn graphs can be truncated");
  if (k < 1 || k > config.k) throw Error(ErrorCode::InvalidArgument, "truncation needs 1 <= k <= built k");
  AdjacencyLists adj(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto& row = g.local_lists()[v];
    adj[v].assign(row.begin(), row.begin() + k);
  }
  return SearchGraph(std::move(adj), GraphConfig::knn(k), g.dataset_id());
}

std::vector<std::size_t> local_degrees(const SearchGraph& g) {
  std::vector<std::size_t> deg(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) deg[v] = g.local_lists()[v].size();
  return deg;
}

void check_graph_matches(const SearchGraph& g, const Dataset& ds) {
  if (static_cast<Eigen::Index>(g.size()) != ds.size() || g.dataset_id() != ds.id())
    throw Error(ErrorCode::DatasetMismatch,
                "graph built over '" + g.dataset_id() + "' (n=" + std::to_string(g.size()) +
                    "), dataset is '" + ds.id() + "' (n=" + std::to_string(ds.size()) + ")");
}

GraphStats graph_stats(const SearchGraph& g, const Dataset& ds) {
  check_graph_matches(g, ds);
  GraphStats st;
  const auto deg = local_degrees(g);
  std::size_t total = 0;
  st.min_degree = deg.empty() ? 0 : deg.front();
  for (std::size_t v : deg) {
    total += v;
    st.min_degree = std::min(st.min_degree, v);
    st.max_degree = std::max(st.max_degree, v);
  }
  st.mean_degree = deg.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(deg.size());
  const auto& config = g.config();
  const bool symmetric = config.kind != GraphKind::Knn || config.symmetrize;
  st.edge_count = symmetric ? total / 2 : total;
  if (config.kind == GraphKind::Knn) {
    st.expected_f = config.k;
  } else {
    const double angle = threshold_angle(config, ds.size(), ds.sphere_dim());
    const double height = std::max(0.0, std::cos(angle));
    st.expected_f = static_cast<double>(ds.size() - 1) * cap_volume(CapSpec(height, ds.sphere_dim())).value;
  }
  return st;
}

}  // namespace gbnns
