#pragma once

#include <Eigen/Core>
#include <algorithm>

namespace gbnns::detail {

inline constexpr Eigen::Index kSourceBlock = 64;

/// For every column s of `sources`, calls visit(s, dots) where dots[j] is
/// <targets.col(j), sources.col(s)> for all j. Products come from one GEMM per
/// block of sources; blocks run in parallel, so `visit` must only touch
/// per-source state.
template <typename Visit>
void for_each_source(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& sources, Visit&& visit) {
  const Eigen::Index num_sources = sources.cols();
  const Eigen::Index num_blocks = (num_sources + kSourceBlock - 1) / kSourceBlock;
#pragma omp parallel
  {
    Eigen::MatrixXd products;
#pragma omp for schedule(dynamic)
    for (Eigen::Index b = 0; b < num_blocks; ++b) {
      const Eigen::Index begin = b * kSourceBlock;
      const Eigen::Index len = std::min(kSourceBlock, num_sources - begin);
      products.noalias() = targets.transpose() * sources.middleCols(begin, len);
      for (Eigen::Index s = 0; s < len; ++s) visit(begin + s, products.col(s).data());
    }
  }
}

/// Strict "closer than" on inner products with the lowest index winning ties.
inline bool closer(double dot_a, Eigen::Index a, double dot_b, Eigen::Index b) {
  return dot_a > dot_b || (dot_a == dot_b && a < b);
}

}  // namespace gbnns::detail
