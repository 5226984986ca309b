#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "gbnns/common.hpp"

namespace gbnns {

/// Exact inverse-CDF sampling over unnormalised non-negative weights.
class InverseCdf {
 public:
  InverseCdf() = default;
  explicit InverseCdf(std::span<const double> weights) { assign(weights); }

  void assign(std::span<const double> weights) {
    cumulative_.resize(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      total += weights[i];
      cumulative_[i] = total;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must have positive mass");
  }

  double total() const { return cumulative_.back(); }
  std::size_t size() const { return cumulative_.size(); }

  template <typename Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, total());
    const double x = u(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

/// Vose's alias method: O(n) build, O(1) draws.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (n == 0 || !(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must have positive mass");
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
    for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t size() const { return prob_.size(); }

  template <typename Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> column(0, prob_.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::size_t i = column(rng);
    return coin(rng) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace gbnns
