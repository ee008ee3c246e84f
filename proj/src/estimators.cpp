#include "ensinfo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ensinfo/error.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

double digamma(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::invalid_spec, "digamma is only defined for positive integers");
  double value = -kEulerGamma;
  for (std::size_t j = 1; j < n; ++j) value += 1.0 / static_cast<double>(j);
  return value;
}

DigammaTable::DigammaTable(std::size_t max_n) : table_(max_n + 1, 0.0) {
  if (max_n == 0) return;
  table_[1] = -kEulerGamma;
  for (std::size_t n = 2; n <= max_n; ++n) table_[n] = table_[n - 1] + 1.0 / static_cast<double>(n - 1);
}

PointSet jittered(const PointSet& points, double amplitude, std::uint64_t seed) {
  std::vector<double> coords(points.coords().begin(), points.coords().end());
  Rng rng(derive_seed(seed, {0x9e11u}));
  std::uniform_real_distribution<double> noise(-amplitude, amplitude);
  for (double& v : coords) v += noise(rng);
  return PointSet(points.dim(), std::move(coords));
}

double kl_entropy(const PointSet& input, const EstimatorParams& params) {
  if (params.k < 1) throw Error(ErrorKind::invalid_spec, "k must be at least 1");
  const std::size_t n = input.size();
  if (n < static_cast<std::size_t>(params.k) + 1) {
    throw Error(ErrorKind::insufficient_points, "KL entropy needs at least k + 1 points, have " + std::to_string(n));
  }
  const PointSet points = params.jitter > 0.0 ? jittered(input, params.jitter, params.jitter_seed) : input;
  const KdTree tree(points);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = tree.kth_nn_distance(i, params.k);
    if (eps <= 0.0) {
      throw Error(ErrorKind::duplicate_points,
                  "point " + std::to_string(i) + " has a zero k-th neighbour distance; enable jitter");
    }
    log_sum += std::log(eps);
  }
  const auto d = static_cast<double>(points.dim());
  const DigammaTable psi(n);
  return -psi(static_cast<std::size_t>(params.k)) + psi(n) + d * std::log(2.0) +
         d * log_sum / static_cast<double>(n);
}

PointSet project(const PointSet& joint, std::span<const std::size_t> coordinates) {
  std::vector<double> coords;
  coords.reserve(joint.size() * coordinates.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const auto p = joint.point(i);
    for (std::size_t c : coordinates) coords.push_back(p[c]);
  }
  return PointSet(coordinates.size(), std::move(coords));
}

CombinationIndex::CombinationIndex(const PointSet& joint, const CombinationSpec& spec)
    : signs_(spec.signs), joint_(joint) {
  if (joint.dim() != spec.m) {
    throw Error(ErrorKind::invalid_spec, "point dimension " + std::to_string(joint.dim()) +
                                             " does not match combination dimension " + std::to_string(spec.m));
  }
  marginals_.reserve(spec.marginals.size());
  for (const auto& marginal : spec.marginals) marginals_.emplace_back(project(joint, marginal));
}

double CombinationIndex::signed_digamma_sum(std::size_t query, int k, const DigammaTable& psi) const {
  const double eps = joint_.kth_nn_distance(query, k);
  if (eps <= 0.0) {
    throw Error(ErrorKind::duplicate_points,
                "a query has a zero k-th neighbour distance in the joint space; enable jitter");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    sum += signs_[i] * psi(marginals_[i].count_within_strict(query, eps));
  }
  return sum;
}

ScanIndex::ScanIndex(const PointSet& joint, const CombinationSpec& spec)
    : n_(joint.size()), dim_(joint.dim()), columns_(joint.size() * joint.dim()), marginals_(spec.marginals),
      signs_(spec.signs) {
  if (joint.dim() != spec.m) {
    throw Error(ErrorKind::invalid_spec, "point dimension " + std::to_string(joint.dim()) +
                                             " does not match combination dimension " + std::to_string(spec.m));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    const auto p = joint.point(j);
    for (std::size_t c = 0; c < dim_; ++c) columns_[c * n_ + j] = p[c];
  }
  shared_ = marginals_.empty() ? std::vector<std::size_t>{} : marginals_.front();
  for (const auto& marginal : marginals_) {
    std::vector<std::size_t> kept;
    for (std::size_t c : shared_) {
      if (std::find(marginal.begin(), marginal.end(), c) != marginal.end()) kept.push_back(c);
    }
    shared_ = std::move(kept);
  }
}

double ScanIndex::signed_digamma_sum(std::size_t query, int k, const DigammaTable& psi) const {
  const auto kk = static_cast<std::size_t>(k);
  if (k < 1 || n_ < kk + 1) {
    throw Error(ErrorKind::insufficient_points, "need at least k + 1 points for a k-th neighbour query");
  }
  thread_local std::vector<double> dist;
  dist.assign(n_, 0.0);
  for (std::size_t c = 0; c < dim_; ++c) {
    const double* col = columns_.data() + c * n_;
    const double q = col[query];
    for (std::size_t j = 0; j < n_; ++j) dist[j] = std::max(dist[j], std::abs(col[j] - q));
  }
  dist[query] = std::numeric_limits<double>::infinity();

  // k smallest joint distances, kept sorted.
  std::vector<double> best(kk, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n_; ++j) {
    const double d = dist[j];
    if (d >= best[kk - 1]) continue;
    std::size_t i = kk - 1;
    while (i > 0 && best[i - 1] > d) {
      best[i] = best[i - 1];
      --i;
    }
    best[i] = d;
  }
  const double eps = best[kk - 1];
  if (eps <= 0.0) {
    throw Error(ErrorKind::duplicate_points,
                "a query has a zero k-th neighbour distance in the joint space; enable jitter");
  }

  if (!shared_.empty()) {
    // Every marginal holds the shared coordinates, so only points within eps
    // on those can be counted; the rest are never looked at again.
    for (std::size_t j = 0; j < n_; ++j) dist[j] = 0.0;
    for (std::size_t c : shared_) {
      const double* col = columns_.data() + c * n_;
      const double q = col[query];
      for (std::size_t j = 0; j < n_; ++j) dist[j] = std::max(dist[j], std::abs(col[j] - q));
    }
    thread_local std::vector<std::size_t> near;
    near.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (dist[j] < eps) near.push_back(j);
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < marginals_.size(); ++m) {
      std::size_t count = 0;  // self included: its distance is 0 < eps
      for (std::size_t j : near) {
        double reach = 0.0;
        for (std::size_t c : marginals_[m]) reach = std::max(reach, std::abs(columns_[c * n_ + j] - columns_[c * n_ + query]));
        count += reach < eps ? 1 : 0;
      }
      sum += signs_[m] * psi(count);
    }
    return sum;
  }

  // Marginal counts in blocks: per-coordinate distances for a block stay in
  // cache while every marginal takes its maximum over them.
  constexpr std::size_t kBlock = 128;
  thread_local std::vector<double> diff, reach, tally;
  diff.resize(dim_ * kBlock);
  reach.resize(kBlock);
  // Per-lane neighbour tallies; whole numbers, so the sums are exact.
  tally.assign(marginals_.size() * kBlock, 0.0);
  for (std::size_t j0 = 0; j0 < n_; j0 += kBlock) {
    const std::size_t len = std::min(kBlock, n_ - j0);
    for (std::size_t c = 0; c < dim_; ++c) {
      const double* col = columns_.data() + c * n_ + j0;
      const double q = columns_[c * n_ + query];
      double* out = diff.data() + c * kBlock;
      for (std::size_t b = 0; b < len; ++b) out[b] = std::abs(col[b] - q);
    }
    double* r = reach.data();
    for (std::size_t m = 0; m < marginals_.size(); ++m) {
      const auto& coords = marginals_[m];
      const double* first = diff.data() + coords[0] * kBlock;
      for (std::size_t b = 0; b < len; ++b) r[b] = first[b];
      for (std::size_t i = 1; i < coords.size(); ++i) {
        const double* d = diff.data() + coords[i] * kBlock;
        for (std::size_t b = 0; b < len; ++b) r[b] = std::max(r[b], d[b]);
      }
      double* lanes = tally.data() + m * kBlock;
      for (std::size_t b = 0; b < len; ++b) lanes[b] += r[b] < eps ? 1.0 : 0.0;
    }
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < marginals_.size(); ++m) {
    double count = 0.0;  // self included: its distance is 0 < eps
    for (std::size_t b = 0; b < kBlock; ++b) count += tally[m * kBlock + b];
    sum += signs_[m] * psi(static_cast<std::size_t>(count));
  }
  return sum;
}

double static_combination(const PointSet& input, const CombinationSpec& spec, const EstimatorParams& params) {
  require_valid(spec);
  if (params.k < 1) throw Error(ErrorKind::invalid_spec, "k must be at least 1");
  const std::size_t n = input.size();
  if (n < static_cast<std::size_t>(params.k) + 1) {
    throw Error(ErrorKind::insufficient_points,
                "combination estimate needs at least k + 1 points, have " + std::to_string(n));
  }
  const PointSet joint = params.jitter > 0.0 ? jittered(input, params.jitter, params.jitter_seed) : input;
  const CombinationIndex index(joint, spec);
  const DigammaTable psi(n);
  double local_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) local_sum += index.signed_digamma_sum(i, params.k, psi);

  int sign_total = 0;
  for (int s : spec.signs) sign_total += s;
  // F(k) - sum_i s_i (<psi(k_i)> - psi(N)) = psi(k) + (S - 1) psi(N) - <sum_i s_i psi(k_i)>
  return psi(static_cast<std::size_t>(params.k)) + (sign_total - 1) * psi(n) -
         local_sum / static_cast<double>(n);
}

PointSet pooled_points(const EmbeddedEnsemble& ensemble) {
  return PointSet(ensemble.dim(), std::vector<double>(ensemble.data().begin(), ensemble.data().end()));
}

double static_combination(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                          const EstimatorParams& params) {
  return static_combination(pooled_points(ensemble), spec, params);
}

}  // namespace ensinfo
