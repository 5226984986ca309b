#include "gbnns/long_edges.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "gbnns/sampling.hpp"
#include "kernels.hpp"

namespace gbnns {

int LongEdgeConfig::resolved_edges(std::int64_t n) const {
  if (edges_per_node > 0) return edges_per_node;
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
}

std::int64_t LongEdgeConfig::presample_size(std::int64_t n) const {
  const auto m = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), phi)));
  return std::clamp<std::int64_t>(m, 1, n - 1);
}

void LongEdgeConfig::validate(std::int64_t n) const {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "long edges need n >= 2");
  if (edges_per_node < 0) throw Error(ErrorCode::InvalidArgument, "edges_per_node must be >= 1");
  if (resolved_edges(n) >= n) throw Error(ErrorCode::InvalidArgument, "edges_per_node must be < n");
  if (scheme == LongEdgeScheme::RankPresampled && !(phi >= 0.0 && phi <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "phi must lie in [0, 1]");
}

namespace {

Eigen::VectorXd source_dots(const Dataset& ds, NodeId source) {
  return ds.points().transpose() * ds.point(source);
}

// Arc length from the source with a chord fallback where the inner product
// rounds to 1 for distinct points.
double arc(const Dataset& ds, NodeId source, Eigen::Index j, double dot) {
  const double rho = std::acos(std::clamp(dot, -1.0, 1.0));
  if (rho > 0.0) return rho;
  if ((ds.point(j).array() == ds.point(source).array()).all())
    throw Error(ErrorCode::DegenerateDistance,
                "points " + std::to_string(source) + " and " + std::to_string(j) + " coincide");
  return 2.0 * std::asin(std::min(1.0, 0.5 * (ds.point(j) - ds.point(source)).norm()));
}

// rho^-d weights, scaled by the nearest candidate to stay finite.
std::vector<double> distance_weights(const Dataset& ds, NodeId source, const Eigen::VectorXd& dots,
                                     const LongEdgeConfig& cfg) {
  const Eigen::Index n = ds.size();
  const int d = ds.sphere_dim();
  const double near = cfg.exclude_near ? std::pow(static_cast<double>(n), -1.0 / d) : 0.0;
  std::vector<double> log_rho(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  double min_log = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == source) continue;
    const double rho = arc(ds, source, j, dots[j]);
    if (cfg.exclude_near && rho <= near) continue;
    log_rho[static_cast<std::size_t>(j)] = std::log(rho);
    min_log = std::min(min_log, log_rho[static_cast<std::size_t>(j)]);
  }
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  if (!std::isfinite(min_log)) return w;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (std::isfinite(log_rho[j])) w[j] = std::exp(-d * (log_rho[j] - min_log));
  return w;
}

struct Nearer {
  const Eigen::VectorXd* dots;
  bool operator()(NodeId a, NodeId b) const { return detail::closer((*dots)[a], a, (*dots)[b], b); }
};

// Nodes other than the source holding each requested rank (1-based, sorted,
// unique). Multi-selection: one nth_element per requested rank on shrinking
// ranges instead of a full sort.
std::vector<NodeId> nodes_at_ranks(const Eigen::VectorXd& dots, NodeId source, std::span<const std::int64_t> ranks) {
  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(dots.size()) - 1);
  for (Eigen::Index j = 0; j < dots.size(); ++j)
    if (j != source) order.push_back(static_cast<NodeId>(j));
  const Nearer cmp{&dots};
  auto select = [&](auto&& self, std::size_t lo, std::size_t hi, std::span<const std::int64_t> want) -> void {
    if (want.empty()) return;
    const std::size_t mid = want.size() / 2;
    const auto pos = static_cast<std::size_t>(want[mid] - 1);
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(hi), cmp);
    self(self, lo, pos, want.first(mid));
    self(self, pos + 1, hi, want.subspan(mid + 1));
  };
  select(select, 0, order.size(), ranks);
  std::vector<NodeId> out(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) out[i] = order[static_cast<std::size_t>(ranks[i] - 1)];
  return out;
}

std::vector<double> harmonic_weights(std::int64_t count) {
  std::vector<double> w(static_cast<std::size_t>(count));
  for (std::int64_t k = 1; k <= count; ++k) w[static_cast<std::size_t>(k - 1)] = 1.0 / static_cast<double>(k);
  return w;
}

NodeId uniform_other(std::int64_t n, NodeId source, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> pick(0, n - 2);
  const auto j = pick(rng);
  return static_cast<NodeId>(j >= source ? j + 1 : j);
}

// Tables shared by every source of one sampling run.
struct Tables {
  std::optional<InverseCdf> harmonic;  // ranks 1..n-1 or 1..m
  std::int64_t presample = 0;

  Tables(std::int64_t n, const LongEdgeConfig& cfg) {
    if (cfg.scheme == LongEdgeScheme::KleinbergRank) harmonic.emplace(harmonic_weights(n - 1));
    if (cfg.scheme == LongEdgeScheme::RankPresampled) {
      presample = cfg.presample_size(n);
      harmonic.emplace(harmonic_weights(presample));
    }
  }
};

std::vector<NodeId> draw_impl(const Dataset& ds, NodeId source, const LongEdgeConfig& cfg, const Tables& tables,
                              std::size_t draws, std::mt19937_64& rng) {
  const std::int64_t n = ds.size();
  std::vector<NodeId> out;
  out.reserve(draws);
  switch (cfg.scheme) {
    case LongEdgeScheme::UniformRandom:
      for (std::size_t i = 0; i < draws; ++i) out.push_back(uniform_other(n, source, rng));
      break;

    case LongEdgeScheme::KleinbergDistance: {
      const auto weights = distance_weights(ds, source, source_dots(ds, source), cfg);
      if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) break;
      if (cfg.use_alias) {
        const AliasTable table(weights);
        for (std::size_t i = 0; i < draws; ++i) out.push_back(static_cast<NodeId>(table(rng)));
      } else {
        const InverseCdf table(weights);
        for (std::size_t i = 0; i < draws; ++i) out.push_back(static_cast<NodeId>(table(rng)));
      }
      break;
    }

    case LongEdgeScheme::KleinbergRank: {
      std::vector<std::int64_t> ranks(draws);
      for (auto& r : ranks) r = static_cast<std::int64_t>((*tables.harmonic)(rng)) + 1;
      std::vector<std::int64_t> wanted = ranks;
      std::sort(wanted.begin(), wanted.end());
      wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
      const auto nodes = nodes_at_ranks(source_dots(ds, source), source, wanted);
      for (auto r : ranks) {
        const auto at = std::lower_bound(wanted.begin(), wanted.end(), r) - wanted.begin();
        out.push_back(nodes[static_cast<std::size_t>(at)]);
      }
      break;
    }

    case LongEdgeScheme::RankPresampled: {
      const std::int64_t m = tables.presample;
      std::vector<NodeId> cand;
      std::unordered_set<std::int64_t> chosen;
      Eigen::VectorXd dots(n);
      for (std::size_t i = 0; i < draws; ++i) {
        // Floyd's algorithm: m distinct values from 0..n-2, then skip the source.
        chosen.clear();
        cand.clear();
        for (std::int64_t j = n - 1 - m; j < n - 1; ++j) {
          std::uniform_int_distribution<std::int64_t> pick(0, j);
          const auto t = pick(rng);
          const auto v = chosen.insert(t).second ? t : (chosen.insert(j), j);
          cand.push_back(static_cast<NodeId>(v >= source ? v + 1 : v));
        }
        for (NodeId c : cand) dots[c] = ds.point(c).dot(ds.point(source));
        std::sort(cand.begin(), cand.end(), Nearer{&dots});
        out.push_back(cand[(*tables.harmonic)(rng)]);
      }
      break;
    }
  }
  return out;
}

bool has_duplicates(const Dataset& ds) {
  const auto& p = ds.points();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      if (p(r, a) != p(r, b)) return p(r, a) < p(r, b);
    return a < b;
  };
  std::sort(idx.begin(), idx.end(), less);
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (p.col(idx[i]) == p.col(idx[i - 1])) return true;
  return false;
}

LongEdges sample_scheme(const Dataset& ds, LongEdgeConfig cfg, LongEdgeScheme scheme) {
  cfg.scheme = scheme;
  const std::int64_t n = ds.size();
  cfg.validate(n);
  if (scheme == LongEdgeScheme::KleinbergDistance && has_duplicates(ds))
    throw Error(ErrorCode::DegenerateDistance, "dataset contains duplicate points; deduplicate first");
  const Tables tables(n, cfg);
  const auto draws = static_cast<std::size_t>(cfg.resolved_edges(n));
  LongEdges edges{scheme, AdjacencyLists(static_cast<std::size_t>(n))};
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t v = 0; v < n; ++v) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(v)));
    auto targets = draw_impl(ds, static_cast<NodeId>(v), cfg, tables, draws, rng);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    edges.targets[static_cast<std::size_t>(v)] = std::move(targets);
  }
  return edges;
}

void check_source(const Dataset& ds, NodeId source) {
  if (static_cast<Eigen::Index>(source) >= ds.size())
    throw Error(ErrorCode::IndexMismatch, "source index out of range");
}

}  // namespace

std::vector<double> target_distribution(const Dataset& ds, NodeId source, const LongEdgeConfig& cfg) {
  check_source(ds, source);
  const std::int64_t n = ds.size();
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  switch (cfg.scheme) {
    case LongEdgeScheme::UniformRandom:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n - 1));
      break;
    case LongEdgeScheme::KleinbergDistance: {
      p = distance_weights(ds, source, source_dots(ds, source), cfg);
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      if (total > 0.0)
        for (double& x : p) x /= total;
      break;
    }
    case LongEdgeScheme::KleinbergRank: {
      const Eigen::VectorXd dots = source_dots(ds, source);
      std::vector<NodeId> order;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != source) order.push_back(static_cast<NodeId>(j));
      std::sort(order.begin(), order.end(), Nearer{&dots});
      double h = 0.0;
      for (std::int64_t k = n - 1; k >= 1; --k) h += 1.0 / static_cast<double>(k);
      for (std::size_t k = 0; k < order.size(); ++k) p[order[k]] = 1.0 / (static_cast<double>(k + 1) * h);
      break;
    }
    case LongEdgeScheme::RankPresampled:
      throw Error(ErrorCode::InvalidArgument, "the pre-sampled scheme has no closed-form distribution");
  }
  p[source] = 0.0;
  return p;
}

std::vector<NodeId> draw_long_targets(const Dataset& ds, NodeId source, const LongEdgeConfig& cfg,
                                      std::size_t draws, std::mt19937_64& rng) {
  check_source(ds, source);
  cfg.validate(ds.size());
  return draw_impl(ds, source, cfg, Tables(ds.size(), cfg), draws, rng);
}

LongEdges sample_distance_based(const Dataset& ds, const LongEdgeConfig& cfg) {
  return sample_scheme(ds, cfg, LongEdgeScheme::KleinbergDistance);
}

LongEdges sample_rank_based(const Dataset& ds, const LongEdgeConfig& cfg) {
  return sample_scheme(ds, cfg, LongEdgeScheme::KleinbergRank);
}

LongEdges sample_rank_presampled(const Dataset& ds, const LongEdgeConfig& cfg) {
  return sample_scheme(ds, cfg, LongEdgeScheme::RankPresampled);
}

LongEdges sample_uniform_random(const Dataset& ds, const LongEdgeConfig& cfg) {
  return sample_scheme(ds, cfg, LongEdgeScheme::UniformRandom);
}

LongEdges sample_long_edges(const Dataset& ds, const LongEdgeConfig& cfg) {
  return sample_scheme(ds, cfg, cfg.scheme);
}

SearchGraph attach(SearchGraph g, LongEdges edges) {
  g.set_long_edges(std::move(edges));
  return g;
}

Dataset deduplicate(const Dataset& ds) {
  const auto& p = ds.points();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      if (p(r, a) != p(r, b)) return p(r, a) < p(r, b);
    return a < b;
  });
  std::vector<bool> keep(idx.size(), true);
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (p.col(idx[i]) == p.col(idx[i - 1])) keep[static_cast<std::size_t>(idx[i])] = false;
  std::vector<Eigen::Index> kept;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) kept.push_back(static_cast<Eigen::Index>(i));
  if (kept.size() == idx.size()) return ds;
  Eigen::MatrixXd out(p.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = p.col(kept[i]);
  return Dataset(std::move(out), ds.metric(), ds.id() + "-dedup");
}

}  // namespace gbnns
