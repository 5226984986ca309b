#pragma once

// Naive scalar reference searches used as oracles. They share no code with
// the library search beyond the graph and dataset containers.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gbnns/search.hpp"

namespace gbnns::reference {

struct Outcome {
  NodeId answer = 0;
  std::int64_t steps = 0;
  std::int64_t distance_computations = 0;
};

class Evaluator {
 public:
  Evaluator(const Dataset& ds, const Eigen::VectorXd& q) : ds_(ds), q_(q) {}

  double dot(NodeId v) {
    auto it = cache_.find(v);
    if (it != cache_.end()) return it->second;
    return cache_[v] = q_.dot(ds_.point(v));
  }
  std::int64_t count() const { return static_cast<std::int64_t>(cache_.size()); }

 private:
  const Dataset& ds_;
  const Eigen::VectorXd& q_;
  std::map<NodeId, double> cache_;
};

inline bool better(double da, NodeId a, double db, NodeId b) { return da > db || (da == db && a < b); }

inline NodeId start_node(Evaluator& ev, std::int64_t n, const SearchConfig& cfg) {
  if (cfg.start.kind == StartPolicy::Kind::FixedIndex) {
    ev.dot(cfg.start.index);
    return cfg.start.index;
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<NodeId> draws;
  for (int i = 0; i < kStartDraws; ++i) {
    const auto v = static_cast<NodeId>(pick(rng));
    draws.push_back(v);
    if (ev.dot(v) > 0.0) return v;
  }
  NodeId best = draws[0];
  for (NodeId v : draws)
    if (better(ev.dot(v), v, ev.dot(best), best)) best = v;
  return best;
}

// Neighbours of v not yet seen, in evaluation order, honouring llf.
inline std::vector<NodeId> fresh_neighbours(const SearchGraph& g, Evaluator& ev, std::set<NodeId>& seen, NodeId v,
                                            double dot, bool llf) {
  std::vector<NodeId> out;
  auto take = [&](std::span<const NodeId> list) {
    for (NodeId u : list)
      if (seen.insert(u).second) out.push_back(u);
  };
  if (llf) {
    take(g.long_edges(v));
    for (NodeId u : out)
      if (ev.dot(u) > dot) return out;
    take(g.local(v));
  } else {
    take(g.local(v));
    take(g.long_edges(v));
  }
  for (NodeId u : out) ev.dot(u);
  return out;
}

inline Outcome greedy(const SearchGraph& g, const Dataset& ds, const Eigen::VectorXd& q, const SearchConfig& cfg) {
  Evaluator ev(ds, q);
  std::set<NodeId> seen;
  const std::int64_t limit = cfg.resolved_max_steps(ds.size(), ds.sphere_dim());
  NodeId cur = start_node(ev, ds.size(), cfg);
  seen.insert(cur);
  Outcome out;
  for (std::int64_t expansions = 0; expansions < limit; ++expansions) {
    const double cur_dot = ev.dot(cur);
    NodeId next = cur;
    for (NodeId u : fresh_neighbours(g, ev, seen, cur, cur_dot, cfg.llf))
      if (ev.dot(u) > cur_dot && (next == cur || better(ev.dot(u), u, ev.dot(next), next))) next = u;
    if (next == cur) break;
    cur = next;
    ++out.steps;
  }
  out.answer = cur;
  out.distance_computations = ev.count();
  return out;
}

inline Outcome beam(const SearchGraph& g, const Dataset& ds, const Eigen::VectorXd& q, const SearchConfig& cfg) {
  Evaluator ev(ds, q);
  std::set<NodeId> seen, expanded;
  const std::int64_t limit = cfg.resolved_max_steps(ds.size(), ds.sphere_dim());
  const auto width = static_cast<std::size_t>(cfg.beam_width);
  const NodeId start = start_node(ev, ds.size(), cfg);
  seen.insert(start);
  std::vector<NodeId> pool{start};
  auto order = [&](NodeId a, NodeId b) { return better(ev.dot(a), a, ev.dot(b), b); };
  std::int64_t expansions = 0;
  bool capped = false;
  for (;;) {
    auto it = std::find_if(pool.begin(), pool.end(), [&](NodeId v) { return !expanded.count(v); });
    if (it == pool.end()) break;
    if (expansions == limit) {
      capped = true;
      break;
    }
    ++expansions;
    const NodeId v = *it;
    expanded.insert(v);
    auto batch = fresh_neighbours(g, ev, seen, v, ev.dot(v), cfg.llf);
    std::sort(batch.begin(), batch.end(), order);
    for (NodeId u : batch) {
      if (pool.size() >= width && !(ev.dot(u) > ev.dot(pool.back()))) continue;
      pool.push_back(u);
      std::sort(pool.begin(), pool.end(), order);
      if (pool.size() > width) pool.pop_back();
    }
  }
  Outcome out;
  out.answer = pool.front();
  out.steps = expansions - 1 + (capped ? 1 : 0);
  out.distance_computations = ev.count();
  return out;
}

}  // namespace gbnns::reference
