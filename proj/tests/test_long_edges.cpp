#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gbnns/long_edges.hpp"
#include "gbnns/stats.hpp"

using namespace gbnns;

namespace {

LongEdgeConfig config(LongEdgeScheme scheme, double phi = 0.5) {
  LongEdgeConfig cfg;
  cfg.scheme = scheme;
  cfg.phi = phi;
  cfg.seed = 11;
  return cfg;
}

std::vector<std::int64_t> histogram(const std::vector<NodeId>& draws, std::size_t n) {
  std::vector<std::int64_t> counts(n, 0);
  for (NodeId v : draws) ++counts[v];
  return counts;
}

// Chi-square z of 1e5 draws from `source` against `expected`.
stats::GoodnessOfFit fit(const Dataset& ds, const LongEdgeConfig& cfg, const std::vector<double>& expected,
                         NodeId source = 0) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 1000));
  const auto draws = draw_long_targets(ds, source, cfg, 100000, rng);
  const auto counts = histogram(draws, static_cast<std::size_t>(ds.size()));
  return stats::chi_square(counts, expected);
}

}  // namespace

TEST(TargetDistribution, DistanceSymmetricPair) {
  Eigen::MatrixXd p(2, 3);
  p << 1, std::cos(0.5), std::cos(-0.5), 0, std::sin(0.5), std::sin(-0.5);
  const auto prob = target_distribution(Dataset(p, Metric::Spherical, "tri"), 0, config(LongEdgeScheme::KleinbergDistance));
  EXPECT_EQ(prob[0], 0.0);
  EXPECT_NEAR(prob[1], 0.5, 1e-12);
  EXPECT_NEAR(prob[2], 0.5, 1e-12);
}

TEST(TargetDistribution, DistanceInverseSquareOnTwoSphere) {
  Eigen::MatrixXd p(3, 3);
  p.col(0) = Eigen::Vector3d(1, 0, 0);
  p.col(1) = Eigen::Vector3d(std::cos(0.1), std::sin(0.1), 0);
  p.col(2) = Eigen::Vector3d(std::cos(0.2), 0, std::sin(0.2));
  const auto prob = target_distribution(Dataset(p, Metric::Spherical, "s2"), 0, config(LongEdgeScheme::KleinbergDistance));
  EXPECT_NEAR(prob[1], 0.8, 1e-9);
  EXPECT_NEAR(prob[2], 0.2, 1e-9);
}

TEST(TargetDistribution, RankHarmonic) {
  Eigen::MatrixXd p(2, 4);
  for (int i = 0; i < 4; ++i) p.col(i) = Eigen::Vector2d(std::cos(0.3 * i), std::sin(0.3 * i));
  const auto prob = target_distribution(Dataset(p, Metric::Spherical, "arc"), 0, config(LongEdgeScheme::KleinbergRank));
  EXPECT_NEAR(prob[1], 6.0 / 11.0, 1e-12);
  EXPECT_NEAR(prob[2], 3.0 / 11.0, 1e-12);
  EXPECT_NEAR(prob[3], 2.0 / 11.0, 1e-12);
}

TEST(TargetDistribution, RankOneMostProbable) {
  const auto ds = generate_uniform(200, 3, 2);
  const auto prob = target_distribution(ds, 7, config(LongEdgeScheme::KleinbergRank));
  const auto top = std::max_element(prob.begin(), prob.end()) - prob.begin();
  Eigen::Index nearest = -1;
  double best = -2.0;
  for (Eigen::Index j = 0; j < ds.size(); ++j)
    if (j != 7 && ds.point(7).dot(ds.point(j)) > best) best = ds.point(7).dot(ds.point(j)), nearest = j;
  EXPECT_EQ(top, nearest);
}

TEST(Samplers, DistanceFrequenciesMatch) {
  const auto ds = generate_uniform(100, 2, 21);
  for (bool alias : {false, true}) {
    auto cfg = config(LongEdgeScheme::KleinbergDistance);
    cfg.use_alias = alias;
    const auto g = fit(ds, cfg, target_distribution(ds, 0, cfg));
    EXPECT_LE(g.z, 3.0) << "alias=" << alias << " max cell sigma " << g.max_cell_sigma;
  }
}

TEST(Samplers, RankFrequenciesMatch) {
  const auto ds = generate_uniform(100, 4, 22);
  const auto cfg = config(LongEdgeScheme::KleinbergRank);
  const auto g = fit(ds, cfg, target_distribution(ds, 3, cfg), 3);
  EXPECT_LE(g.z, 3.0) << g.max_cell_sigma;
}

TEST(Samplers, UniformFrequenciesMatch) {
  const auto ds = generate_uniform(100, 2, 23);
  const auto cfg = config(LongEdgeScheme::UniformRandom);
  EXPECT_LE(fit(ds, cfg, target_distribution(ds, 0, cfg)).z, 3.0);
}

TEST(Samplers, PresampledFullSampleIsRankBased) {
  const auto ds = generate_uniform(100, 2, 24);
  const auto cfg = config(LongEdgeScheme::RankPresampled, 1.0);
  EXPECT_EQ(cfg.presample_size(100), 99);
  EXPECT_LE(fit(ds, cfg, target_distribution(ds, 0, config(LongEdgeScheme::KleinbergRank))).z, 3.0);
}

TEST(Samplers, PresampledSingleCandidateIsUniform) {
  const auto ds = generate_uniform(100, 2, 25);
  const auto cfg = config(LongEdgeScheme::RankPresampled, 0.0);
  EXPECT_EQ(cfg.presample_size(100), 1);
  EXPECT_LE(fit(ds, cfg, target_distribution(ds, 0, config(LongEdgeScheme::UniformRandom))).z, 3.0);
}

TEST(Samplers, DistanceRejectsDuplicates) {
  Eigen::MatrixXd p(2, 3);
  p << 1, 1, 0, 0, 0, 1;
  const Dataset ds(p, Metric::Spherical, "dup");
  try {
    sample_distance_based(ds, config(LongEdgeScheme::KleinbergDistance));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDistance);
  }
  const auto clean = deduplicate(ds);
  EXPECT_EQ(clean.size(), 2);
  auto cfg = config(LongEdgeScheme::KleinbergDistance);
  cfg.edges_per_node = 1;
  EXPECT_NO_THROW(sample_distance_based(clean, cfg));
}

TEST(SampleLongEdges, UniformSelfExclusionOnPair) {
  Eigen::MatrixXd p(2, 2);
  p << 1, 0, 0, 1;
  const Dataset ds(p, Metric::Spherical, "pair");
  const auto e = sample_uniform_random(ds, config(LongEdgeScheme::UniformRandom));
  EXPECT_EQ(e.targets[0], std::vector<NodeId>{1});
  EXPECT_EQ(e.targets[1], std::vector<NodeId>{0});
}

TEST(SampleLongEdges, ListsSortedDistinctAndDeterministic) {
  const auto ds = generate_uniform(2000, 2, 4);
  for (auto scheme : {LongEdgeScheme::KleinbergDistance, LongEdgeScheme::KleinbergRank, LongEdgeScheme::UniformRandom,
                      LongEdgeScheme::RankPresampled}) {
    const auto cfg = config(scheme);
    const auto a = sample_long_edges(ds, cfg);
    EXPECT_EQ(a.scheme, scheme);
    EXPECT_EQ(a, sample_long_edges(ds, cfg));
    for (std::size_t v = 0; v < a.targets.size(); ++v) {
      const auto& t = a.targets[v];
      EXPECT_LE(t.size(), static_cast<std::size_t>(cfg.resolved_edges(2000)));
      EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
      EXPECT_EQ(std::adjacent_find(t.begin(), t.end()), t.end());
      EXPECT_EQ(std::find(t.begin(), t.end(), static_cast<NodeId>(v)), t.end());
    }
  }
}

TEST(SampleLongEdges, ExcludeNearSkipsClosePoints) {
  const auto ds = generate_uniform(3000, 2, 6);
  auto cfg = config(LongEdgeScheme::KleinbergDistance);
  cfg.exclude_near = true;
  const double radius = std::pow(3000.0, -0.5);
  const auto e = sample_long_edges(ds, cfg);
  for (std::size_t v = 0; v < e.targets.size(); ++v)
    for (NodeId u : e.targets[v]) EXPECT_GT(ds.distance(static_cast<Eigen::Index>(v), u), radius);
}

TEST(LongEdgeConfig, Validation) {
  auto cfg = config(LongEdgeScheme::RankPresampled, 1.5);
  EXPECT_THROW(cfg.validate(100), Error);
  cfg.phi = 0.5;
  cfg.edges_per_node = 100;
  EXPECT_THROW(cfg.validate(100), Error);
  cfg.edges_per_node = 0;
  EXPECT_EQ(cfg.resolved_edges(1000), 10);
}

TEST(Attach, ReplacesAndEmptyIsIdentity) {
  const auto ds = generate_uniform(100, 2, 1);
  const auto g = build_knn(ds, 4);
  const LongEdges empty{LongEdgeScheme::UniformRandom, AdjacencyLists(100)};
  const auto a = attach(g, empty);
  EXPECT_EQ(a.local_lists(), g.local_lists());
  for (std::size_t v = 0; v < a.size(); ++v) EXPECT_TRUE(a.long_edges(static_cast<NodeId>(v)).empty());
  const auto first = sample_long_edges(ds, config(LongEdgeScheme::UniformRandom));
  const auto second = sample_long_edges(ds, config(LongEdgeScheme::KleinbergRank));
  const auto twice = attach(attach(g, first), second);
  EXPECT_EQ(*twice.long_edge_set(), second);
  EXPECT_THROW(attach(g, LongEdges{LongEdgeScheme::UniformRandom, AdjacencyLists(5)}), Error);
}
