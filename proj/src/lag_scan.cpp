#include "ensinfo/lag_scan.hpp"

#include <numeric>

#include "ensinfo/embedding.hpp"
#include "ensinfo/error.hpp"
#include "ensinfo/parallel.hpp"

namespace ensinfo {

namespace {

const CombinationSpec kMutualInformation{2, {{0}, {1}}, {1, 1}};

// Scores every lag; each embedded vector is (destination, lagged source).
template <typename Score>
LagScan scan_with(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, std::size_t threads, Score score) {
  if (max_lag < 0 || 2 * static_cast<std::size_t>(max_lag) >= ensemble.length()) {
    throw Error(ErrorKind::config, "maximum lag " + std::to_string(max_lag) +
                                       " must lie in [0, length / 2) for length " +
                                       std::to_string(ensemble.length()));
  }
  const std::size_t src = ensemble.resolve(source);
  const std::size_t dst = ensemble.resolve(destination);
  if (src == dst) throw Error(ErrorKind::invalid_spec, "source and destination must differ");

  const std::vector<ChannelRef> pair{src, dst};
  const TrialEnsemble two = slice_channels(ensemble, pair);
  const std::vector<EmbeddingSpec> layout{{std::size_t{1}, 1, 1, 0}, {std::size_t{0}, 1, 1, 0}};

  LagScan scan;
  scan.mutual_information.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  parallel_for(scan.mutual_information.size(), threads, [&](std::size_t lag) {
    const TrialEnsemble lagged = apply_lag(two, std::size_t{0}, static_cast<int>(lag));
    scan.mutual_information[lag] = score(delay_embed(lagged, layout));
  });
  for (std::size_t lag = 1; lag < scan.mutual_information.size(); ++lag) {
    if (scan.mutual_information[lag] > scan.mutual_information[static_cast<std::size_t>(scan.best_lag)]) {
      scan.best_lag = static_cast<int>(lag);
    }
  }
  return scan;
}

}  // namespace

LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, const EstimatorParams& params, std::size_t threads) {
  return scan_with(ensemble, source, destination, max_lag, threads, [&](const EmbeddedEnsemble& pair) {
    return static_combination(pair, kMutualInformation, params);
  });
}

LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, const TemporalParams& params, std::size_t threads) {
  TemporalParams raw = params;
  raw.smoothing = 1;
  return scan_with(ensemble, source, destination, max_lag, threads, [&](const EmbeddedEnsemble& pair) {
    const EstimateSeries series = ensemble_estimate(pair, kMutualInformation, raw);
    return std::accumulate(series.value.begin(), series.value.end(), 0.0) / static_cast<double>(series.size());
  });
}

int find_optimal_lag(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                     int max_lag, const EstimatorParams& params, std::size_t threads) {
  return scan_lags(ensemble, source, destination, max_lag, params, threads).best_lag;
}

int find_optimal_lag(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                     int max_lag, const TemporalParams& params, std::size_t threads) {
  return scan_lags(ensemble, source, destination, max_lag, params, threads).best_lag;
}

LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, LagCriterion criterion, const TemporalParams& params, std::size_t threads) {
  if (criterion == LagCriterion::pooled) {
    return scan_lags(ensemble, source, destination, max_lag, params.estimator, threads);
  }
  return scan_lags(ensemble, source, destination, max_lag, params, threads);
}

std::string to_string(LagCriterion criterion) {
  return criterion == LagCriterion::pooled ? "pooled" : "ensemble";
}

LagCriterion parse_lag_criterion(const std::string& text) {
  if (text == "pooled") return LagCriterion::pooled;
  if (text == "ensemble") return LagCriterion::ensemble;
  throw Error(ErrorKind::config, "unknown lag criterion '" + text + "' (expected ensemble or pooled)");
}

}  // namespace ensinfo
