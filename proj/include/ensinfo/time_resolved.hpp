#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ensinfo/combination.hpp"
#include "ensinfo/embedding.hpp"
#include "ensinfo/estimators.hpp"

namespace ensinfo {

// Which N enters F(k) = psi(k) - psi(N) at each instant.
enum class Normalization {
  window,  // actual candidate count of the (possibly truncated) window
  fixed,   // trials * min(2 * half_width + 1, retained instants), edges ignored
};

// Neighbour pool of the single-trial estimators (naive and average).
enum class BaselinePool {
  trial,   // the whole trial: pointwise terms of the stationary estimate
  window,  // the trial's own points within half_width of the instant
};

struct TemporalParams {
  std::size_t half_width = 25;  // sigma, in samples
  EstimatorParams estimator;
  std::size_t smoothing = 20;   // moving-average order q; 1 disables
  Normalization normalization = Normalization::window;
  BaselinePool baseline_pool = BaselinePool::trial;
};

// One estimate per retained instant, in nats.
struct EstimateSeries {
  std::vector<std::int64_t> time;  // recording-clock time of each instant
  std::vector<double> value;
  std::vector<std::size_t> n_eff;  // candidate points behind each value
  // Filled by the permutation test; empty otherwise.
  std::vector<double> threshold;
  std::vector<double> p_value;

  std::size_t size() const noexcept { return value.size(); }
};

// Ensemble estimator: at each instant n, the joint k-th neighbour radius of
// every trial's point at n is found among all trials' points within
// half_width of n, marginal neighbours are counted inside that radius, and
// the per-trial terms are averaged before smoothing.
EstimateSeries ensemble_estimate(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                                 const TemporalParams& params, std::size_t threads = 1);

// Single-trial pointwise estimate at every instant; neighbours come only
// from `trial` itself, from the pool chosen by baseline_pool.
EstimateSeries naive_pointwise(const EmbeddedEnsemble& ensemble, std::size_t trial, const CombinationSpec& spec,
                               const TemporalParams& params, std::size_t threads = 1);

// Mean over trials of the naive pointwise estimates, then smoothed.
EstimateSeries average_estimate(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                                const TemporalParams& params, std::size_t threads = 1);

enum class EstimatorKind { ensemble, average, naive };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& text);

// Dispatches on `kind`; the naive estimator uses trial 0.
EstimateSeries estimate(EstimatorKind kind, const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                        const TemporalParams& params, std::size_t threads = 1);

// Centred moving average of order q: instant n averages the samples in
// [n - q/2, n - q/2 + q - 1] that exist. q = 0 is treated as 1.
std::vector<double> moving_average(std::span<const double> series, std::size_t order);

// CSV columns: time,value,n_eff[,threshold,p_value].
void write_csv(const EstimateSeries& series, std::ostream& out);
void store_csv(const EstimateSeries& series, const std::filesystem::path& path);

}  // namespace ensinfo
