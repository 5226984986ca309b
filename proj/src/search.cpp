#include "gbnns/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "kernels.hpp"

namespace gbnns {

std::string_view to_string(SearchAlgorithm algorithm) {
  return algorithm == SearchAlgorithm::Beam ? "beam" : "greedy";
}

SearchAlgorithm parse_search_algorithm(std::string_view name) {
  if (name == "greedy") return SearchAlgorithm::Greedy;
  if (name == "beam") return SearchAlgorithm::Beam;
  throw Error(ErrorCode::InvalidArgument, "unknown search algorithm '" + std::string(name) + "'");
}

void SearchConfig::validate() const {
  if (beam_width < 1) throw Error(ErrorCode::InvalidArgument, "beam_width must be >= 1");
  if (max_steps < 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
}

std::int64_t SearchConfig::resolved_max_steps(std::int64_t n, int d) const {
  if (max_steps > 0) return max_steps;
  const double nd = static_cast<double>(n);
  const auto base = static_cast<std::int64_t>(std::ceil(16.0 * std::pow(nd, 1.0 / d) * std::log2(nd)));
  const std::int64_t width = algorithm == SearchAlgorithm::Beam ? beam_width : 1;
  return std::max<std::int64_t>(1, base) * width;
}

SearchContext::SearchContext(const Dataset& ds)
    : ds_(&ds),
      evaluated_(static_cast<std::size_t>(ds.size()), 0),
      considered_(static_cast<std::size_t>(ds.size()), 0),
      dots_(static_cast<std::size_t>(ds.size()), 0.0) {}

void SearchContext::begin(const Eigen::Ref<const Eigen::VectorXd>& query) {
  if (query.size() != ds_->dim())
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from dataset dimension");
  query_ = query.data();
  computations_ = 0;
  if (++epoch_ == 0) {
    std::fill(evaluated_.begin(), evaluated_.end(), 0);
    std::fill(considered_.begin(), considered_.end(), 0);
    epoch_ = 1;
  }
}

double SearchContext::dot(NodeId v) {
  if (evaluated_[v] == epoch_) return dots_[v];
  evaluated_[v] = epoch_;
  ++computations_;
  const Eigen::Map<const Eigen::VectorXd> q(query_, ds_->dim());
  return dots_[v] = q.dot(ds_->point(v));
}

namespace {

bool entry_before(double dot_a, NodeId a, double dot_b, NodeId b) {
  return detail::closer(dot_a, a, dot_b, b);
}

}  // namespace

bool CandidatePool::insert(double dot, NodeId node) {
  if (entries_.size() >= capacity_ && !(dot > entries_.back().dot)) return false;
  const auto at = std::upper_bound(entries_.begin(), entries_.end(), Entry{dot, node, false},
                                   [](const Entry& a, const Entry& b) { return entry_before(a.dot, a.node, b.dot, b.node); });
  entries_.insert(at, Entry{dot, node, false});
  if (entries_.size() > capacity_) entries_.pop_back();
  return true;
}

std::size_t CandidatePool::next_unexpanded() const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!entries_[i].expanded) return i;
  return entries_.size();
}

NodeId pick_start(SearchContext& ctx, const SearchConfig& cfg) {
  const auto n = ctx.dataset().size();
  if (cfg.start.kind == StartPolicy::Kind::FixedIndex) {
    if (static_cast<Eigen::Index>(cfg.start.index) >= n)
      throw Error(ErrorCode::IndexMismatch, "start index out of range");
    ctx.dot(cfg.start.index);
    return cfg.start.index;
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  NodeId best = 0;
  double best_dot = -2.0;
  for (int i = 0; i < kStartDraws; ++i) {
    const auto v = static_cast<NodeId>(pick(rng));
    const double d = ctx.dot(v);
    if (d > 0.0) return v;
    if (entry_before(d, v, best_dot, best)) best = v, best_dot = d;
  }
  return best;
}

namespace {

struct Candidate {
  double dot;
  NodeId node;
};

// Unconsidered neighbours of one list, evaluated and marked.
void gather(SearchContext& ctx, std::span<const NodeId> nbrs, std::vector<Candidate>& out) {
  for (NodeId u : nbrs) {
    if (ctx.considered(u)) continue;
    ctx.mark_considered(u);
    out.push_back({ctx.dot(u), u});
  }
}

bool any_improves(const std::vector<Candidate>& batch, double dot) {
  return std::any_of(batch.begin(), batch.end(), [&](const Candidate& c) { return c.dot > dot; });
}

// Neighbours of v in evaluation order. With llf, local neighbours are only
// gathered when no long edge is strictly closer than `dot`.
void expand(const SearchGraph& g, SearchContext& ctx, NodeId v, double dot, bool llf, std::vector<Candidate>& batch) {
  batch.clear();
  if (llf) {
    gather(ctx, g.long_edges(v), batch);
    if (any_improves(batch, dot)) return;
    gather(ctx, g.local(v), batch);
  } else {
    gather(ctx, g.local(v), batch);
    gather(ctx, g.long_edges(v), batch);
  }
}

void finish(SearchResult& r, const SearchContext& ctx) {
  r.distance_computations = ctx.distance_computations();
  r.visited = ctx.distance_computations();
}

}  // namespace

SearchResult greedy_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg) {
  cfg.validate();
  const auto& ds = ctx.dataset();
  const std::int64_t max_steps = cfg.resolved_max_steps(ds.size(), ds.sphere_dim());
  SearchResult r;
  NodeId cur = pick_start(ctx, cfg);
  ctx.mark_considered(cur);
  double cur_dot = ctx.dot(cur);
  std::vector<Candidate> batch;
  for (std::int64_t expansions = 0;; ++expansions) {
    if (expansions == max_steps) {
      r.hit_max_steps = true;
      break;
    }
    expand(g, ctx, cur, cur_dot, cfg.llf, batch);
    const Candidate* best = nullptr;
    for (const auto& c : batch)
      if (c.dot > cur_dot && (!best || entry_before(c.dot, c.node, best->dot, best->node))) best = &c;
    if (!best) break;
    cur = best->node;
    cur_dot = best->dot;
    ++r.steps;
  }
  r.answer = cur;
  finish(r, ctx);
  return r;
}

SearchResult beam_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg,
                         std::vector<CandidatePool::Entry>* final_pool) {
  cfg.validate();
  const auto& ds = ctx.dataset();
  const std::int64_t max_steps = cfg.resolved_max_steps(ds.size(), ds.sphere_dim());
  SearchResult r;
  CandidatePool pool(static_cast<std::size_t>(cfg.beam_width));
  const NodeId start = pick_start(ctx, cfg);
  ctx.mark_considered(start);
  pool.insert(ctx.dot(start), start);
  std::vector<Candidate> batch;
  std::int64_t expansions = 0;
  for (;;) {
    const std::size_t pos = pool.next_unexpanded();
    if (pos == pool.size()) break;
    if (expansions == max_steps) {
      r.hit_max_steps = true;
      break;
    }
    ++expansions;
    pool.mark_expanded(pos);
    const auto [dot, node, expanded] = pool.entries()[pos];
    expand(g, ctx, node, dot, cfg.llf, batch);
    std::sort(batch.begin(), batch.end(),
              [](const Candidate& a, const Candidate& b) { return entry_before(a.dot, a.node, b.dot, b.node); });
    for (const auto& c : batch) pool.insert(c.dot, c.node);
  }
  r.steps = expansions - 1 + (r.hit_max_steps ? 1 : 0);
  r.answer = pool.best().node;
  finish(r, ctx);
  if (final_pool) *final_pool = pool.entries();
  return r;
}

SearchResult run_search(const SearchGraph& g, SearchContext& ctx, const SearchConfig& cfg) {
  return cfg.algorithm == SearchAlgorithm::Beam ? beam_search(g, ctx, cfg) : greedy_search(g, ctx, cfg);
}

SearchResult greedy_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                           const SearchConfig& cfg) {
  check_graph_matches(g, ds);
  SearchContext ctx(ds);
  ctx.begin(q);
  return greedy_search(g, ctx, cfg);
}

SearchResult beam_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                         const SearchConfig& cfg) {
  check_graph_matches(g, ds);
  SearchContext ctx(ds);
  ctx.begin(q);
  return beam_search(g, ctx, cfg);
}

SearchResult run_search(const SearchGraph& g, const Dataset& ds, const Eigen::Ref<const Eigen::VectorXd>& q,
                        const SearchConfig& cfg) {
  check_graph_matches(g, ds);
  SearchContext ctx(ds);
  ctx.begin(q);
  return run_search(g, ctx, cfg);
}

QueryEvaluation evaluate_query_set(const SearchGraph& g, const Dataset& ds, const QuerySet& qs,
                                   const SearchConfig& cfg, const EvaluationOptions& options) {
  check_graph_matches(g, ds);
  cfg.validate();
  if (qs.queries.rows() != ds.dim())
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from dataset dimension");
  if (static_cast<Eigen::Index>(qs.ground_truth.size()) != qs.size())
    throw Error(ErrorCode::IndexMismatch, "ground truth does not cover every query");
  if (cfg.start.kind == StartPolicy::Kind::FixedIndex && static_cast<Eigen::Index>(cfg.start.index) >= ds.size())
    throw Error(ErrorCode::IndexMismatch, "start index out of range");

  const std::int64_t m = qs.size();
  std::vector<SearchResult> results(static_cast<std::size_t>(m));
  std::vector<char> within(static_cast<std::size_t>(m), 0);
  const auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel
  {
    SearchContext ctx(ds);
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      ctx.begin(qs.queries.col(i));
      SearchConfig cfg_i = cfg;
      cfg_i.seed = query_seed(cfg.seed, i);
      SearchResult r = run_search(g, ctx, cfg_i);
      r.success_exact = r.answer == qs.ground_truth[idx];
      if (options.success_radius)
        within[idx] = distance(qs.queries.col(i), ds.point(r.answer), ds.metric()) <= *options.success_radius;
      results[idx] = r;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();

  QueryEvaluation ev;
  ev.queries = m;
  std::int64_t hits = 0, inside = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    hits += results[i].success_exact;
    ev.total_steps += results[i].steps;
    ev.total_distance_computations += results[i].distance_computations;
    ev.max_steps_hits += results[i].hit_max_steps;
    inside += within[i];
  }
  const auto md = static_cast<double>(m);
  ev.recall_at_1 = static_cast<double>(hits) / md;
  ev.mean_steps = static_cast<double>(ev.total_steps) / md;
  ev.mean_distance_computations = static_cast<double>(ev.total_distance_computations) / md;
  if (options.success_radius) ev.radius_success = static_cast<double>(inside) / md;
  ev.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (options.keep_per_query) ev.per_query = std::move(results);
  return ev;
}

}  // namespace gbnns
