#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gbnns/data.hpp"
#include "gbnns/vector_io.hpp"

using namespace gbnns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gbnns_test_data";
  fs::create_directories(dir);
  return dir / name;
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

// Nearest neighbour by a scan in reverse order, ties to the lower index.
NodeId reverse_scan(const Dataset& ds, const Eigen::VectorXd& q) {
  NodeId best = static_cast<NodeId>(ds.size() - 1);
  double best_dot = q.dot(ds.point(best));
  for (Eigen::Index j = ds.size() - 1; j >= 0; --j) {
    const double d = q.dot(ds.point(j));
    if (d >= best_dot) best = static_cast<NodeId>(j), best_dot = d;
  }
  return best;
}

}  // namespace

TEST(Distance, Basics) {
  Eigen::Vector2d a(1, 0), b(0, 1);
  EXPECT_NEAR(distance(a, b, Metric::Spherical), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(distance(a, b, Metric::Euclidean), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(distance(a, a, Metric::Spherical), 0.0);
  EXPECT_NEAR(distance(a, Eigen::Vector2d(-a), Metric::Spherical), std::numbers::pi, 1e-15);
}

TEST(Dataset, RejectsBadInput) {
  EXPECT_THROW(Dataset(Eigen::MatrixXd::Identity(3, 1), Metric::Spherical, "one"), Error);
  Eigen::MatrixXd p(2, 2);
  p << 1, 2, 0, 0;
  EXPECT_THROW(Dataset(p, Metric::Spherical, "unnormalised"), Error);
}

TEST(GenerateUniform, UnitNormAndDeterministic) {
  const auto ds = generate_uniform(1000, 8, 7);
  EXPECT_EQ(ds.dim(), 9);
  EXPECT_EQ(ds.sphere_dim(), 8);
  for (Eigen::Index i = 0; i < ds.size(); ++i) EXPECT_NEAR(ds.point(i).norm(), 1.0, 1e-12);
  EXPECT_EQ(ds.points(), generate_uniform(1000, 8, 7).points());
  EXPECT_NE(ds.points(), generate_uniform(1000, 8, 8).points());
}

TEST(GenerateUniform, CoordinateMeansNearZero) {
  const auto ds = generate_uniform(100000, 2, 1);
  const Eigen::VectorXd m = ds.points().rowwise().mean();
  for (Eigen::Index r = 0; r < m.size(); ++r) EXPECT_LT(std::abs(m[r]), 4.0 / std::sqrt(1e5));
}

TEST(PlantQueries, WithinRadiusAndTruthIsExact) {
  const auto ds = generate_uniform(10000, 4, 3);
  const auto qs = plant_queries(ds, 100, 0.1, 3);
  ASSERT_EQ(qs.size(), 100);
  ASSERT_TRUE(qs.planted_radius);
  for (Eigen::Index i = 0; i < qs.size(); ++i) {
    EXPECT_NEAR(qs.queries.col(i).norm(), 1.0, 1e-12);
    EXPECT_LE(distance(qs.queries.col(i), ds.point(qs.planted[i]), Metric::Spherical), 0.1 + 1e-12);
    EXPECT_EQ(qs.ground_truth[i], reverse_scan(ds, qs.queries.col(i)));
  }
}

TEST(PlantQueries, TinyRadiusRecoversPlanted) {
  const auto ds = generate_uniform(2000, 3, 5);
  const auto qs = plant_queries(ds, 200, 1e-9, 5);
  for (Eigen::Index i = 0; i < qs.size(); ++i) EXPECT_EQ(qs.ground_truth[i], qs.planted[i]);
}

TEST(SampleQueriesUniform, DeterministicAndExact) {
  const auto ds = generate_uniform(3000, 5, 2);
  const auto a = sample_queries_uniform(ds, 50, 9);
  const auto b = sample_queries_uniform(ds, 50, 9);
  EXPECT_EQ(a.queries, b.queries);
  EXPECT_FALSE(a.planted_radius);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a.queries.col(i).norm(), 1.0, 1e-12);
    EXPECT_EQ(a.ground_truth[i], reverse_scan(ds, a.queries.col(i)));
  }
}

TEST(Regime, Classification) {
  EXPECT_EQ(regime_params(100000, 2).regime, Regime::Dense);
  EXPECT_EQ(regime_params(10000, 128).regime, Regime::Sparse);
}

TEST(VectorIo, FvecsFixture) {
  const auto path = scratch("two.fvecs");
  {
    std::ofstream out(path, std::ios::binary);
    for (const auto& v : {std::vector<float>{1, 2, 2}, std::vector<float>{0, 0, 5}}) {
      put<std::int32_t>(out, 3);
      for (float x : v) put(out, x);
    }
  }
  const auto ds = load_vectors(path, VectorFormat::Fvecs, true);
  EXPECT_EQ(ds.size(), 2);
  EXPECT_EQ(ds.sphere_dim(), 2);
  EXPECT_NEAR(ds.point(0)[1], 2.0 / 3.0, 1e-7);
  EXPECT_NEAR(ds.point(1)[2], 1.0, 1e-12);
}

TEST(VectorIo, BvecsThreeFourFive) {
  const auto path = scratch("tri.bvecs");
  {
    std::ofstream out(path, std::ios::binary);
    for (int i = 0; i < 2; ++i) {
      put<std::int32_t>(out, 2);
      put<std::uint8_t>(out, static_cast<std::uint8_t>(3 + i));
      put<std::uint8_t>(out, 4);
    }
  }
  const auto ds = load_vectors(path, VectorFormat::Bvecs, true);
  EXPECT_NEAR(ds.point(0)[0], 0.6, 1e-12);
  EXPECT_NEAR(ds.point(0)[1], 0.8, 1e-12);
}

TEST(VectorIo, TruncatedAndInconsistentFilesThrow) {
  const auto path = scratch("bad.fvecs");
  {
    std::ofstream out(path, std::ios::binary);
    put<std::int32_t>(out, 3);
    put<float>(out, 1.0f);
  }
  try {
    read_vectors(path, VectorFormat::Fvecs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncatedFile);
  }
  {
    std::ofstream out(path, std::ios::binary);
    put<std::int32_t>(out, 1);
    put<float>(out, 1.0f);
    put<std::int32_t>(out, 2);
    put<float>(out, 1.0f);
    put<float>(out, 1.0f);
  }
  try {
    read_vectors(path, VectorFormat::Fvecs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentDimensions);
  }
}

TEST(VectorIo, DatasetRoundTripKeepsId) {
  const auto ds = generate_uniform(50, 3, 4);
  const auto path = scratch("round.fvecs");
  save_dataset(path, ds);
  const auto back = load_dataset(path);
  EXPECT_EQ(back.id(), ds.id());
  EXPECT_EQ(back.size(), ds.size());
  EXPECT_LT((back.points() - ds.points()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NnHistogram, TwoPoints) {
  Eigen::MatrixXd p(2, 2);
  p << 1, 0, 0, 1;
  const auto h = nn_distance_histogram(Dataset(p, Metric::Spherical, "pair"), 1);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts[0], 2);
  EXPECT_NEAR(h.nn_distances[0], std::numbers::pi / 2, 1e-15);
}

TEST(NnHistogram, DuplicatesFillZeroBin) {
  Eigen::MatrixXd p(2, 3);
  p << 1, 1, 0, 0, 0, 1;
  const auto h = nn_distance_histogram(Dataset(p, Metric::Spherical, "dup"), 4, 2.0);
  EXPECT_EQ(h.counts[0], 2);
}

TEST(NnHistogram, ModeNearSpacing) {
  const auto ds = generate_uniform(10000, 2, 6);
  const auto h = nn_distance_histogram(ds, 40);
  std::size_t mode = 0;
  for (std::size_t i = 1; i < h.counts.size(); ++i)
    if (h.counts[i] > h.counts[mode]) mode = i;
  const double at = h.bin_center(mode);
  EXPECT_GT(at, 0.01 / 3.0);
  EXPECT_LT(at, 0.01 * 3.0);
}
