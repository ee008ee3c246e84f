#include "ensinfo/significance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensinfo/error.hpp"
#include "ensinfo/parallel.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

void check(const SurrogateConfig& config) {
  if (config.surrogates == 0) throw Error(ErrorKind::config, "permutation test needs at least one surrogate");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorKind::config, "significance level must lie in (0, 1)");
  }
}

std::optional<std::string> resolution_warning(const SurrogateConfig& config) {
  // Smallest attainable p-value is 1 / (S + 1).
  if (static_cast<double>(config.surrogates + 1) * config.alpha >= 1.0 - 1e-12) return std::nullopt;
  return "with " + std::to_string(config.surrogates) + " surrogates no p-value can fall below " +
         std::to_string(config.alpha) + "; use at least " +
         std::to_string(static_cast<std::size_t>(std::ceil(1.0 / config.alpha - 1.0 - 1e-9))) + " surrogates";
}

std::vector<std::size_t> surrogate_permutation(std::size_t trials, std::uint64_t seed, std::size_t index) {
  std::vector<std::size_t> perm(trials);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x5u, index}));
  for (std::size_t i = trials; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

EmbeddedEnsemble shuffle_trials(const EmbeddedEnsemble& ensemble, std::size_t channel,
                                std::span<const std::size_t> permutation) {
  if (permutation.size() != ensemble.trials()) {
    throw Error(ErrorKind::config, "permutation length differs from the trial count");
  }
  std::vector<bool> seen(ensemble.trials(), false);
  for (std::size_t r : permutation) {
    if (r >= ensemble.trials() || seen[r]) throw Error(ErrorKind::config, "not a permutation of the trials");
    seen[r] = true;
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [offset, offset + dim)
  for (const auto& block : ensemble.blocks()) {
    if (block.channel == channel) ranges.emplace_back(block.offset, block.offset + static_cast<std::size_t>(block.spec.dim));
  }
  if (ranges.empty()) {
    throw Error(ErrorKind::unknown_channel, "no embedded block uses channel " + std::to_string(channel));
  }

  EmbeddedEnsemble out = ensemble;
  for (std::size_t r = 0; r < ensemble.trials(); ++r) {
    for (std::size_t t = 0; t < ensemble.times(); ++t) {
      auto dst = out.mutable_point(r, t);
      const auto src = ensemble.point(permutation[r], t);
      for (const auto& [lo, hi] : ranges) std::copy(src.begin() + lo, src.begin() + hi, dst.begin() + lo);
    }
  }
  return out;
}

SignificanceResult permutation_test(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                                    const TemporalParams& params, const SurrogateConfig& config,
                                    std::size_t shuffle_channel, EstimatorKind kind, std::size_t threads,
                                    const EstimateSeries* observed) {
  check(config);
  EstimateSeries computed;
  if (!observed) {
    computed = estimate(kind, ensemble, spec, params, threads);
    observed = &computed;
  }
  const std::size_t times = observed->size();
  const std::size_t s_count = config.surrogates;

  // surrogate_values[s * times + t]
  std::vector<double> surrogate_values(s_count * times);
  parallel_for(s_count, threads, [&](std::size_t s) {
    const auto perm = surrogate_permutation(ensemble.trials(), config.seed, s);
    const auto series = estimate(kind, shuffle_trials(ensemble, shuffle_channel, perm), spec, params, 1);
    if (series.size() != times) throw Error(ErrorKind::format, "surrogate series length mismatch");
    std::copy(series.value.begin(), series.value.end(),
              surrogate_values.begin() + static_cast<std::ptrdiff_t>(s * times));
  });

  // 1-based rank ceil((1 - alpha) S); the tiny slack absorbs rounding in the
  // product so e.g. alpha = 0.05, S = 100 gives rank 95.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - config.alpha) * static_cast<double>(s_count) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, s_count);

  SignificanceResult result;
  result.threshold.resize(times);
  result.p_value.resize(times);
  std::vector<double> column(s_count);
  for (std::size_t t = 0; t < times; ++t) {
    std::size_t at_least = 0;
    for (std::size_t s = 0; s < s_count; ++s) {
      column[s] = surrogate_values[s * times + t];
      if (column[s] >= observed->value[t]) ++at_least;
    }
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(rank - 1), column.end());
    result.threshold[t] = column[rank - 1];
    result.p_value[t] = static_cast<double>(1 + at_least) / static_cast<double>(s_count + 1);
  }
  return result;
}

void attach(EstimateSeries& series, const SignificanceResult& result) {
  if (result.threshold.size() != series.size() || result.p_value.size() != series.size()) {
    throw Error(ErrorKind::format, "significance result length differs from the series");
  }
  series.threshold = result.threshold;
  series.p_value = result.p_value;
}

double exceedance_fraction(const EstimateSeries& series, std::int64_t from, std::int64_t to) {
  if (series.threshold.size() != series.size()) throw Error(ErrorKind::config, "series has no threshold");
  std::size_t total = 0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.time[i] < from || series.time[i] >= to) continue;
    ++total;
    if (series.value[i] > series.threshold[i]) ++above;
  }
  return total == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(total);
}

}  // namespace ensinfo
