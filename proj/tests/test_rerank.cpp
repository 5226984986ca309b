#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "gbnns/rerank.hpp"

using namespace gbnns;

namespace {

SearchConfig beam(int width) {
  SearchConfig cfg;
  cfg.algorithm = SearchAlgorithm::Beam;
  cfg.beam_width = width;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(FitTransform, IdentityIsBitExact) {
  const auto ds = generate_uniform(300, 5, 1);
  const auto fitted = fit_transform(ds, {TransformKind::Identity, 0, 0});
  EXPECT_EQ(fitted.transformed.points(), ds.points());
  EXPECT_EQ(fitted.transformed.id(), ds.id());
}

TEST(FitTransform, FullRankRandomProjectionPreservesDistances) {
  const auto ds = generate_uniform(200, 2, 2);
  const auto fitted = fit_transform(ds, {TransformKind::RandomProjection, 3, 9});
  const Eigen::MatrixXd& P = fitted.transform.projection();
  EXPECT_LT((P * P.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < 50; ++i)
    for (Eigen::Index j = i + 1; j < 50; ++j)
      EXPECT_NEAR(fitted.transformed.distance(i, j), ds.distance(i, j), 1e-9);
}

TEST(FitTransform, PcaKeepsLeadingAxes) {
  // Points spread mostly in the first two coordinates.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd p(6, 400);
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index r = 0; r < 6; ++r) p(r, j) = normal(rng) * (r < 2 ? 10.0 : 0.1);
  normalize_columns(p);
  const auto fitted = fit_transform(Dataset(p, Metric::Spherical, "flat"), {TransformKind::PcaProjection, 2, 0});
  const Eigen::MatrixXd& P = fitted.transform.projection();
  EXPECT_GT(P.leftCols(2).norm(), 0.99 * std::sqrt(2.0));
  EXPECT_EQ(fitted.transformed.dim(), 2);
}

TEST(FitTransform, RejectsBadDimension) {
  const auto ds = generate_uniform(50, 4, 1);
  EXPECT_THROW(fit_transform(ds, {TransformKind::RandomProjection, 1, 0}), Error);
  EXPECT_THROW(fit_transform(ds, {TransformKind::RandomProjection, 6, 0}), Error);
}

TEST(Transform, SaveLoadRoundTrip) {
  const auto ds = generate_uniform(100, 7, 4);
  const auto fitted = fit_transform(ds, {TransformKind::RandomProjection, 4, 11});
  const auto path = std::filesystem::temp_directory_path() / "gbnns_transform.bin";
  save_transform(path, fitted.transform);
  const auto back = load_transform(path);
  EXPECT_EQ(back, fitted.transform);
  EXPECT_EQ(back.apply(ds).points(), fitted.transformed.points());
  EXPECT_EQ(back.apply(ds).id(), fitted.transformed.id());
}

TEST(SearchAndRerank, IdentityMatchesBeamSearch) {
  const auto ds = generate_uniform(1500, 3, 6);
  const auto fitted = fit_transform(ds, {TransformKind::Identity, 0, 0});
  const auto g = build_knn(ds, 8);
  const auto qs = sample_queries_uniform(ds, 50, 6);
  for (Eigen::Index i = 0; i < qs.size(); ++i) {
    const auto r = search_and_rerank(g, fitted.transformed, ds, qs.queries.col(i), fitted.transform, beam(5));
    const auto plain = beam_search(g, ds, qs.queries.col(i), beam(5));
    EXPECT_EQ(r.answer, plain.answer);
    EXPECT_EQ(r.low_answer, plain.answer);
    EXPECT_EQ(r.low.distance_computations, plain.distance_computations);
  }
}

TEST(SearchAndRerank, FullWidthIsExactInOriginalSpace) {
  const auto ds = generate_uniform(400, 9, 7);
  const auto fitted = fit_transform(ds, {TransformKind::RandomProjection, 3, 2});
  const auto g = build_knn(fitted.transformed, 8, true);
  const auto qs = sample_queries_uniform(ds, 40, 7);
  const auto ev = evaluate_rerank(g, fitted.transformed, ds, qs, fitted.transform, beam(400), true);
  EXPECT_EQ(ev.recall_rerank, 1.0);
  for (const auto& r : ev.per_query) EXPECT_EQ(r.original_distance_computations, 400);
}

TEST(SearchAndRerank, RerankNeverWorseThanLowOnly) {
  const auto ds = generate_uniform(3000, 15, 8);
  const auto fitted = fit_transform(ds, {TransformKind::RandomProjection, 6, 3});
  const auto g = build_knn(fitted.transformed, 16);
  const auto qs = sample_queries_uniform(ds, 200, 8);
  for (int w : {1, 8, 32}) {
    const auto ev = evaluate_rerank(g, fitted.transformed, ds, qs, fitted.transform, beam(w));
    EXPECT_GE(ev.recall_rerank, ev.recall_low_only) << "beam " << w;
  }
}

TEST(SearchAndRerank, RejectsMismatchedTransform) {
  const auto ds = generate_uniform(200, 5, 1);
  const auto fitted = fit_transform(ds, {TransformKind::RandomProjection, 3, 1});
  const auto other = fit_transform(ds, {TransformKind::RandomProjection, 3, 2});
  const auto g = build_knn(fitted.transformed, 4);
  EXPECT_THROW(search_and_rerank(g, fitted.transformed, ds, ds.point(0), other.transform, beam(4)), Error);
}
