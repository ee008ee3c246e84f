#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ensinfo/combination.hpp"
#include "ensinfo/embedding.hpp"
#include "ensinfo/knn.hpp"

namespace ensinfo {

inline constexpr double kEulerGamma = 0.57721566490153286;

// psi(n) for positive integers: -gamma + sum_{j=1}^{n-1} 1/j.
double digamma(std::size_t n);

// psi(1..max_n) accumulated once, in the same order as digamma().
class DigammaTable {
 public:
  explicit DigammaTable(std::size_t max_n);
  double operator()(std::size_t n) const { return table_.at(n); }
  std::size_t max_n() const noexcept { return table_.size() - 1; }

 private:
  std::vector<double> table_;
};

struct EstimatorParams {
  int k = 4;
  // Uniform noise in [-jitter, jitter] added to every coordinate before
  // searching; 0 disables it. Only needed for data with repeated values.
  double jitter = 0.0;
  std::uint64_t jitter_seed = 0;
};

// Kozachenko-Leonenko differential entropy in nats under the maximum norm
// (unit ball volume 2^d). Throws Error(insufficient_points) if fewer than
// k + 1 points and Error(duplicate_points) if some k-th neighbour distance
// is zero.
double kl_entropy(const PointSet& points, const EstimatorParams& params);

// Joint k-d tree plus one tree per marginal over the same point ids, so a
// query's joint k-th neighbour radius can be turned into marginal counts.
class CombinationIndex {
 public:
  CombinationIndex(const PointSet& joint, const CombinationSpec& spec);

  std::size_t size() const noexcept { return joint_.size(); }

  // Sum over marginals of sign * psi(k_i) for one query, where k_i counts
  // points strictly inside the joint k-th neighbour radius (self included).
  // Throws Error(duplicate_points) when that radius is zero.
  double signed_digamma_sum(std::size_t query, int k, const DigammaTable& psi) const;

 private:
  std::vector<int> signs_;
  KdTree joint_;
  std::vector<KdTree> marginals_;
};

// Same queries answered by a linear scan over column-major coordinates.
// Cheaper than CombinationIndex when only a few queries hit each point set,
// as in the per-instant windows of the time-resolved estimators.
class ScanIndex {
 public:
  ScanIndex(const PointSet& joint, const CombinationSpec& spec);

  std::size_t size() const noexcept { return n_; }
  double signed_digamma_sum(std::size_t query, int k, const DigammaTable& psi) const;

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> columns_;  // columns_[c * n_ + j]
  std::vector<std::vector<std::size_t>> marginals_;
  std::vector<std::size_t> shared_;  // coordinates common to every marginal
  std::vector<int> signs_;
};

// Projects every point of `joint` onto the listed coordinates.
PointSet project(const PointSet& joint, std::span<const std::size_t> coordinates);

// Stationary estimate F(k) - sum_i s_i <F(k_i(n))>_n with F(k) = psi(k) - psi(N)
// over all points of `joint`.
double static_combination(const PointSet& joint, const CombinationSpec& spec, const EstimatorParams& params);

// Same estimate with every (trial, time) of the ensemble pooled.
double static_combination(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                          const EstimatorParams& params);

// All joint vectors of an ensemble as one point set.
PointSet pooled_points(const EmbeddedEnsemble& ensemble);

// Copy of `points` with uniform noise in [-amplitude, amplitude] per coordinate.
PointSet jittered(const PointSet& points, double amplitude, std::uint64_t seed);

}  // namespace ensinfo
