#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ensinfo/ensemble.hpp"
#include "ensinfo/estimators.hpp"
#include "ensinfo/time_resolved.hpp"

namespace ensinfo {

struct LagScan {
  std::vector<double> mutual_information;  // indexed by lag 0..max_lag
  int best_lag = 0;
};

// How the MI between the lagged source and the destination is scored.
enum class LagCriterion {
  ensemble,  // time average of the unsmoothed ensemble MI
  pooled,    // stationary MI over all trials and times
};

std::string to_string(LagCriterion criterion);
LagCriterion parse_lag_criterion(const std::string& text);

// Stationary MI, pooled over all trials and times, between the source
// delayed by each lag in [0, max_lag] and the destination. Ties go to the
// smaller lag. Throws Error(config) unless 0 <= max_lag < length / 2.
LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, const EstimatorParams& params, std::size_t threads = 1);

// Same scan scored by the mean over instants of the ensemble MI. Unlike the
// pooled score this keeps dependence whose sign changes over time, such as
// a coupling gain that oscillates across the record.
LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, const TemporalParams& params, std::size_t threads = 1);

LagScan scan_lags(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                  int max_lag, LagCriterion criterion, const TemporalParams& params, std::size_t threads = 1);

int find_optimal_lag(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                     int max_lag, const EstimatorParams& params, std::size_t threads = 1);

int find_optimal_lag(const TrialEnsemble& ensemble, const ChannelRef& source, const ChannelRef& destination,
                     int max_lag, const TemporalParams& params, std::size_t threads = 1);

}  // namespace ensinfo
