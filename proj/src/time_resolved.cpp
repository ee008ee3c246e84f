#include "ensinfo/time_resolved.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>

#include "ensinfo/error.hpp"
#include "ensinfo/knn.hpp"
#include "ensinfo/parallel.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

namespace {

int sign_total(const CombinationSpec& spec) { return std::accumulate(spec.signs.begin(), spec.signs.end(), 0); }

std::vector<std::size_t> all_coordinates(std::size_t m) {
  std::vector<std::size_t> c(m);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

void check_params(const TemporalParams& params) {
  if (params.estimator.k < 1) throw Error(ErrorKind::invalid_spec, "k must be at least 1");
  if (!(params.estimator.jitter >= 0.0)) throw Error(ErrorKind::config, "jitter must be non-negative");
}

EmbeddedEnsemble maybe_jittered(const EmbeddedEnsemble& ensemble, const EstimatorParams& params) {
  if (params.jitter <= 0.0) return ensemble;
  std::vector<double> data(ensemble.data().begin(), ensemble.data().end());
  Rng rng(derive_seed(params.jitter_seed, {0x9e12u}));
  std::uniform_real_distribution<double> noise(-params.jitter, params.jitter);
  for (double& v : data) v += noise(rng);
  return EmbeddedEnsemble(ensemble.trials(), ensemble.first(), ensemble.times(), ensemble.dim(), std::move(data),
                          ensemble.blocks(), ensemble.time_origin());
}

std::size_t normalizing_count(const TemporalParams& params, std::size_t trials, std::size_t times,
                              std::size_t actual) {
  if (params.normalization == Normalization::window) return actual;
  const std::size_t full = params.half_width >= times ? times : std::min(times, 2 * params.half_width + 1);
  return trials * full;
}

void require_window(std::size_t points, int k, std::size_t t) {
  if (points < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorKind::insufficient_points, "window at instant " + std::to_string(t) + " holds " +
                                                    std::to_string(points) + " points, need k + 1 = " +
                                                    std::to_string(k + 1));
  }
}

EstimateSeries empty_series(const EmbeddedEnsemble& ensemble) {
  EstimateSeries series;
  series.time.resize(ensemble.times());
  for (std::size_t t = 0; t < ensemble.times(); ++t) series.time[t] = ensemble.clock_time(t);
  series.value.assign(ensemble.times(), 0.0);
  series.n_eff.assign(ensemble.times(), 0);
  return series;
}

void check_ensemble(const EmbeddedEnsemble& ensemble, const CombinationSpec& spec) {
  require_valid(spec);
  if (ensemble.dim() != spec.m) {
    throw Error(ErrorKind::invalid_spec, "ensemble dimension " + std::to_string(ensemble.dim()) +
                                             " does not match combination dimension " + std::to_string(spec.m));
  }
  if (ensemble.trials() == 0 || ensemble.times() == 0) {
    throw Error(ErrorKind::insufficient_points, "empty ensemble");
  }
}

// Unsmoothed naive estimates for one trial.
std::vector<double> pointwise_values(const EmbeddedEnsemble& ensemble, std::size_t trial,
                                     const CombinationSpec& spec, const TemporalParams& params,
                                     const DigammaTable& psi, std::size_t threads, std::vector<std::size_t>* sizes) {
  const auto coords = all_coordinates(spec.m);
  const int k = params.estimator.k;
  const int s_total = sign_total(spec);
  std::vector<double> values(ensemble.times());
  if (sizes) sizes->assign(ensemble.times(), 0);
  if (params.baseline_pool == BaselinePool::trial) {
    const WindowPoints pool = build_window_index(ensemble, coords, {0, ensemble.times()}, trial);
    require_window(pool.points.size(), k, 0);
    const ScanIndex index(pool.points, spec);
    const double offset = psi(static_cast<std::size_t>(k)) + (s_total - 1) * psi(pool.points.size());
    parallel_for(ensemble.times(), threads, [&](std::size_t t) {
      values[t] = offset - index.signed_digamma_sum(pool.id(0, t), k, psi);
    });
    if (sizes) sizes->assign(ensemble.times(), pool.points.size());
    return values;
  }
  parallel_for(ensemble.times(), threads, [&](std::size_t t) {
    const WindowPoints window = build_window_index(ensemble, coords, {t, params.half_width}, trial);
    require_window(window.points.size(), k, t);
    const ScanIndex index(window.points, spec);
    const std::size_t n_norm = normalizing_count(params, 1, ensemble.times(), window.points.size());
    values[t] = psi(static_cast<std::size_t>(k)) + (s_total - 1) * psi(n_norm) -
                index.signed_digamma_sum(window.id(0, t), k, psi);
    if (sizes) (*sizes)[t] = window.points.size();
  });
  return values;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

EstimateSeries ensemble_estimate(const EmbeddedEnsemble& input, const CombinationSpec& spec,
                                 const TemporalParams& params, std::size_t threads) {
  check_params(params);
  check_ensemble(input, spec);
  const EmbeddedEnsemble ensemble = maybe_jittered(input, params.estimator);
  const auto coords = all_coordinates(spec.m);
  const int k = params.estimator.k;
  const int s_total = sign_total(spec);
  const std::size_t trials = ensemble.trials();
  const DigammaTable psi(std::max(trials * ensemble.times(), static_cast<std::size_t>(k)));

  EstimateSeries series = empty_series(ensemble);
  parallel_for(ensemble.times(), threads, [&](std::size_t t) {
    const WindowPoints window = build_window_index(ensemble, coords, {t, params.half_width});
    require_window(window.points.size(), k, t);
    const ScanIndex index(window.points, spec);
    std::vector<double> terms(trials);
    for (std::size_t r = 0; r < trials; ++r) terms[r] = index.signed_digamma_sum(window.id(r, t), k, psi);
    // Summed in value order so relabelling trials cannot change the rounding.
    std::sort(terms.begin(), terms.end());
    const double local = std::accumulate(terms.begin(), terms.end(), 0.0);
    const std::size_t n_norm = normalizing_count(params, trials, ensemble.times(), window.points.size());
    series.value[t] = psi(static_cast<std::size_t>(k)) + (s_total - 1) * psi(n_norm) -
                      local / static_cast<double>(trials);
    series.n_eff[t] = window.points.size();
  });
  series.value = moving_average(series.value, params.smoothing);
  return series;
}

EstimateSeries naive_pointwise(const EmbeddedEnsemble& input, std::size_t trial, const CombinationSpec& spec,
                               const TemporalParams& params, std::size_t threads) {
  check_params(params);
  check_ensemble(input, spec);
  if (trial >= input.trials()) throw Error(ErrorKind::config, "trial " + std::to_string(trial) + " out of range");
  const EmbeddedEnsemble ensemble = maybe_jittered(input, params.estimator);
  const DigammaTable psi(std::max(ensemble.times(), static_cast<std::size_t>(params.estimator.k)));
  EstimateSeries series = empty_series(ensemble);
  series.value = moving_average(pointwise_values(ensemble, trial, spec, params, psi, threads, &series.n_eff),
                                params.smoothing);
  return series;
}

EstimateSeries average_estimate(const EmbeddedEnsemble& input, const CombinationSpec& spec,
                                const TemporalParams& params, std::size_t threads) {
  check_params(params);
  check_ensemble(input, spec);
  const EmbeddedEnsemble ensemble = maybe_jittered(input, params.estimator);
  const DigammaTable psi(std::max(ensemble.times(), static_cast<std::size_t>(params.estimator.k)));
  EstimateSeries series = empty_series(ensemble);
  std::vector<double> sum(ensemble.times(), 0.0);
  std::vector<std::size_t> sizes;
  for (std::size_t r = 0; r < ensemble.trials(); ++r) {
    const auto values = pointwise_values(ensemble, r, spec, params, psi, threads, &sizes);
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += values[t];
  }
  for (std::size_t t = 0; t < sum.size(); ++t) {
    series.value[t] = sum[t] / static_cast<double>(ensemble.trials());
    series.n_eff[t] = sizes[t] * ensemble.trials();
  }
  series.value = moving_average(series.value, params.smoothing);
  return series;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ensemble: return "ensemble";
    case EstimatorKind::average: return "average";
    case EstimatorKind::naive: return "naive";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(const std::string& text) {
  if (text == "ensemble") return EstimatorKind::ensemble;
  if (text == "average") return EstimatorKind::average;
  if (text == "naive") return EstimatorKind::naive;
  throw Error(ErrorKind::config, "unknown estimator '" + text + "' (expected ensemble, average or naive)");
}

EstimateSeries estimate(EstimatorKind kind, const EmbeddedEnsemble& ensemble, const CombinationSpec& spec,
                        const TemporalParams& params, std::size_t threads) {
  switch (kind) {
    case EstimatorKind::ensemble: return ensemble_estimate(ensemble, spec, params, threads);
    case EstimatorKind::average: return average_estimate(ensemble, spec, params, threads);
    case EstimatorKind::naive: return naive_pointwise(ensemble, 0, spec, params, threads);
  }
  throw Error(ErrorKind::config, "unknown estimator");
}

std::vector<double> moving_average(std::span<const double> series, std::size_t order) {
  const std::size_t q = std::max<std::size_t>(order, 1);
  std::vector<double> out(series.size());
  if (q == 1) {
    std::copy(series.begin(), series.end(), out.begin());
    return out;
  }
  const auto size = static_cast<std::int64_t>(series.size());
  const auto back = static_cast<std::int64_t>(q / 2);
  for (std::int64_t n = 0; n < size; ++n) {
    const std::int64_t lo = std::max<std::int64_t>(0, n - back);
    const std::int64_t hi = std::min<std::int64_t>(size - 1, n - back + static_cast<std::int64_t>(q) - 1);
    double sum = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) sum += series[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(n)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

void write_csv(const EstimateSeries& series, std::ostream& out) {
  const bool tested = !series.threshold.empty() && !series.p_value.empty();
  out << "time,value,n_eff";
  if (tested) out << ",threshold,p_value";
  out << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.time[i] << ',' << format_number(series.value[i]) << ',' << series.n_eff[i];
    if (tested) out << ',' << format_number(series.threshold[i]) << ',' << format_number(series.p_value[i]);
    out << '\n';
  }
}

void store_csv(const EstimateSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_csv(series, out);
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace ensinfo
