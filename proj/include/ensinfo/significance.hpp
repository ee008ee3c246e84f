#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ensinfo/time_resolved.hpp"

namespace ensinfo {

struct SurrogateConfig {
  std::size_t surrogates = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

// Throws Error(config) for zero surrogates or alpha outside (0, 1).
void check(const SurrogateConfig& config);

// Set when (surrogates + 1) * alpha < 1: even a value above every surrogate
// cannot reach the requested level.
std::optional<std::string> resolution_warning(const SurrogateConfig& config);

// Uniform random permutation of [0, trials) for surrogate `index`; depends
// only on (seed, index).
std::vector<std::size_t> surrogate_permutation(std::size_t trials, std::uint64_t seed, std::size_t index);

// Reassigns every block built from `channel` across trials: trial r of the
// result holds those blocks from trial permutation[r]. Other blocks are
// untouched. Throws Error(unknown_channel) if no block uses the channel and
// Error(config) if `permutation` is not a permutation of the trials.
EmbeddedEnsemble shuffle_trials(const EmbeddedEnsemble& ensemble, std::size_t channel,
                                std::span<const std::size_t> permutation);

struct SignificanceResult {
  std::vector<double> threshold;  // (1 - alpha) order statistic of the surrogates
  std::vector<double> p_value;    // (1 + #{surrogate >= observed}) / (S + 1)
};

// Re-runs the estimator on `config.surrogates` trial-shuffled copies of the
// ensemble. `observed` must come from the same estimator and parameters;
// when absent it is computed here.
SignificanceResult permutation_test(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                                    const TemporalParams& params, const SurrogateConfig& config,
                                    std::size_t shuffle_channel, EstimatorKind kind = EstimatorKind::ensemble,
                                    std::size_t threads = 1, const EstimateSeries* observed = nullptr);

// Copies threshold and p-value columns into the series.
void attach(EstimateSeries& series, const SignificanceResult& result);

// Fraction of instants where value > threshold, restricted to recording-clock
// times in [from, to).
double exceedance_fraction(const EstimateSeries& series, std::int64_t from, std::int64_t to);

}  // namespace ensinfo
