#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gbnns/geometry.hpp"
#include "gbnns/graph.hpp"
#include "gbnns/long_edges.hpp"

using namespace gbnns;

namespace {

Dataset circle_points(std::initializer_list<double> angles, const std::string& id = "circle") {
  Eigen::MatrixXd p(2, static_cast<Eigen::Index>(angles.size()));
  Eigen::Index i = 0;
  for (double a : angles) p.col(i++) = Eigen::Vector2d(std::cos(a), std::sin(a));
  return Dataset(p, Metric::Spherical, id);
}

// Brute-force kNN: sort every other node by (distance, index).
AdjacencyLists naive_knn(const Dataset& ds, int k) {
  AdjacencyLists out(static_cast<std::size_t>(ds.size()));
  for (Eigen::Index s = 0; s < ds.size(); ++s) {
    std::vector<std::pair<double, NodeId>> all;
    for (Eigen::Index j = 0; j < ds.size(); ++j)
      if (j != s) all.push_back({-ds.point(s).dot(ds.point(j)), static_cast<NodeId>(j)});
    std::sort(all.begin(), all.end());
    for (int r = 0; r < k; ++r) out[static_cast<std::size_t>(s)].push_back(all[static_cast<std::size_t>(r)].second);
  }
  return out;
}

}  // namespace

TEST(ThresholdAngle, SparseSubstitution) {
  const double a = threshold_angle(GraphConfig::sparse(0.2), 10000, 128);
  EXPECT_NEAR(a, std::acos(std::sqrt(2.0 * 0.2 * std::log(1e4) / 128.0)), 1e-12);
}

TEST(ThresholdAngle, DenseSubstitution) {
  EXPECT_NEAR(threshold_angle(GraphConfig::dense(1.5), 10000, 4), std::asin(1.5 * std::pow(1e4, -0.25)), 1e-12);
}

TEST(GraphConfig, Validation) {
  EXPECT_THROW(GraphConfig::dense(0.5).validate(100), Error);
  EXPECT_THROW(GraphConfig::sparse(1.5).validate(100), Error);
  EXPECT_THROW(GraphConfig::knn(100).validate(100), Error);
  EXPECT_NO_THROW(GraphConfig::knn(99).validate(100));
}

TEST(BuildThreshold, FarApartPointsStayDisconnected) {
  const auto ds = circle_points({0.0, 1.0, 2.0, 3.0});
  const auto g = build_threshold(ds, 0.5, GraphConfig::dense(2.0));
  for (std::size_t v = 0; v < g.size(); ++v) EXPECT_TRUE(g.local(static_cast<NodeId>(v)).empty());
}

TEST(BuildThreshold, CoincidentPointsConnect) {
  const auto ds = circle_points({0.0, 0.0, 2.0});
  const auto g = build_threshold(ds, 0.1, GraphConfig::dense(2.0));
  ASSERT_EQ(g.local(0).size(), 1u);
  EXPECT_EQ(g.local(0)[0], 1u);
  EXPECT_EQ(g.local(1)[0], 0u);
}

TEST(BuildThreshold, BoundaryPairIsIncluded) {
  const auto ds = circle_points({0.0, 0.5, 1.2});
  const auto g = build_threshold(ds, ds.distance(0, 1), GraphConfig::dense(2.0));
  EXPECT_EQ(g.local(0).size(), 1u);
}

TEST(BuildThreshold, SymmetricSortedAndMatchesNaive) {
  const auto ds = generate_uniform(1500, 3, 4);
  const double angle = 0.2;
  const auto g = build_threshold(ds, angle, GraphConfig::dense(2.0));
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::vector<NodeId> expect;
    for (Eigen::Index j = 0; j < ds.size(); ++j)
      if (j != static_cast<Eigen::Index>(v) && ds.distance(static_cast<Eigen::Index>(v), j) <= angle)
        expect.push_back(static_cast<NodeId>(j));
    const auto got = g.local(static_cast<NodeId>(v));
    EXPECT_EQ(std::vector<NodeId>(got.begin(), got.end()), expect);
  }
}

TEST(BuildThresholdDense, MeanDegreeNearExpected) {
  const auto ds = generate_uniform(10000, 4, 1);
  const auto g = build_threshold_dense(ds, 1.5);
  const auto st = graph_stats(g, ds);
  const double angle = std::asin(1.5 * std::pow(1e4, -0.25));
  const double f = 9999.0 * cap_volume(CapSpec(std::cos(angle), 4)).value;
  EXPECT_NEAR(st.expected_f, f, 1e-9 * f);
  EXPECT_NEAR(st.mean_degree, f, 0.15 * f);
}

TEST(BuildThresholdDense, OutOfRangeAngle) {
  const auto ds = generate_uniform(100, 2, 1);
  EXPECT_THROW(build_threshold_dense(ds, 50.0), Error);
  const auto capped = build_threshold_dense(ds, 50.0, true);
  EXPECT_TRUE(capped.config().cap_at_half_pi);
  for (std::size_t v = 0; v < capped.size(); ++v)
    for (NodeId u : capped.local(static_cast<NodeId>(v)))
      EXPECT_LE(ds.distance(static_cast<Eigen::Index>(v), u), std::numbers::pi / 2 + 1e-12);
}

TEST(BuildThresholdSparse, OrthogonalPairNotConnected) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3);
  const Dataset ds(p, Metric::Spherical, "axes");
  const auto g = build_threshold(ds, threshold_angle(GraphConfig::sparse(0.5), 3, 2), GraphConfig::sparse(0.5));
  EXPECT_TRUE(g.local(0).empty());
}

TEST(BuildThresholdSparse, MeanDegreeNearExpected) {
  const auto ds = generate_uniform(10000, 64, 2);
  const auto g = build_threshold_sparse(ds, 0.2);
  const auto st = graph_stats(g, ds);
  EXPECT_NEAR(st.mean_degree, st.expected_f, 0.25 * st.expected_f);
}

TEST(BuildKnn, CollinearK1) {
  const auto ds = circle_points({0.0, 0.3, 1.0});
  const auto g = build_knn(ds, 1);
  EXPECT_EQ(g.local(0)[0], 1u);
  EXPECT_EQ(g.local(1)[0], 0u);
  EXPECT_EQ(g.local(2)[0], 1u);
}

TEST(BuildKnn, CompleteWhenKIsNMinusOne) {
  const auto ds = generate_uniform(30, 2, 3);
  const auto g = build_knn(ds, 29);
  for (std::size_t v = 0; v < g.size(); ++v) EXPECT_EQ(g.local(static_cast<NodeId>(v)).size(), 29u);
  EXPECT_EQ(graph_stats(g, ds).edge_count, 30u * 29u);
}

TEST(BuildKnn, MatchesBruteForce) {
  const auto ds = generate_uniform(1000, 8, 5);
  const auto g = build_knn(ds, 10);
  EXPECT_EQ(g.local_lists(), naive_knn(ds, 10));
}

TEST(BuildKnn, SymmetrizeAddsReverseEdges) {
  const auto ds = generate_uniform(500, 3, 5);
  const auto g = build_knn(ds, 5, true);
  for (std::size_t v = 0; v < g.size(); ++v)
    for (NodeId u : g.local(static_cast<NodeId>(v))) {
      const auto back = g.local(u);
      EXPECT_NE(std::find(back.begin(), back.end(), static_cast<NodeId>(v)), back.end());
    }
}

TEST(TruncateKnn, PrefixEqualsSmallerBuild) {
  const auto ds = generate_uniform(800, 4, 8);
  EXPECT_EQ(truncate_knn(build_knn(ds, 20), 7).local_lists(), build_knn(ds, 7).local_lists());
}

TEST(GraphStats, EmptyAndComplete) {
  const auto ds = generate_uniform(5, 2, 1);
  const SearchGraph empty(AdjacencyLists(5), GraphConfig::dense(2.0), ds.id());
  const auto st = graph_stats(empty, ds);
  EXPECT_EQ(st.max_degree, 0u);
  EXPECT_EQ(st.edge_count, 0u);
  const auto full = build_threshold(ds, std::numbers::pi, GraphConfig::dense(2.0, true));
  EXPECT_EQ(graph_stats(full, ds).edge_count, 10u);
}

TEST(CheckGraphMatches, RejectsOtherDataset) {
  const auto a = generate_uniform(100, 2, 1);
  const auto b = generate_uniform(100, 2, 2);
  const auto g = build_knn(a, 3);
  EXPECT_NO_THROW(check_graph_matches(g, a));
  try {
    check_graph_matches(g, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DatasetMismatch);
  }
}

TEST(GraphIo, RoundTripWithLongEdges) {
  const auto ds = generate_uniform(400, 3, 9);
  LongEdgeConfig cfg;
  cfg.seed = 4;
  const auto g = attach(build_threshold_dense(ds, 2.0), sample_long_edges(ds, cfg));
  const auto path = std::filesystem::temp_directory_path() / "gbnns_graph_roundtrip.bin";
  save_graph(path, g);
  const auto back = load_graph(path, ds);
  EXPECT_EQ(back, g);
  EXPECT_EQ(back.long_edge_scheme(), LongEdgeScheme::KleinbergRank);
}

TEST(GraphIo, CorruptionDetected) {
  const auto ds = generate_uniform(50, 2, 1);
  const auto path = std::filesystem::temp_directory_path() / "gbnns_graph_bad.bin";
  save_graph(path, build_knn(ds, 3));
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  EXPECT_THROW(load_graph(path), Error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTAGRAPH";
  }
  EXPECT_THROW(load_graph(path), Error);
}
