#include "ensinfo/embedding.hpp"

#include <algorithm>

#include "ensinfo/error.hpp"

namespace ensinfo {

EmbeddedEnsemble::EmbeddedEnsemble(std::size_t trials, std::size_t first, std::size_t times,
                                   std::size_t dim, std::vector<double> data,
                                   std::vector<EmbeddedBlock> blocks, std::int64_t time_origin)
    : trials_(trials),
      first_(first),
      times_(times),
      dim_(dim),
      data_(std::move(data)),
      blocks_(std::move(blocks)),
      time_origin_(time_origin) {
  if (data_.size() != trials_ * times_ * dim_) {
    throw Error(ErrorKind::format, "embedded data size does not match dimensions");
  }
}

EmbeddedEnsemble EmbeddedEnsemble::select_trials(std::span<const std::size_t> trials) const {
  std::vector<double> data;
  data.reserve(trials.size() * times_ * dim_);
  for (std::size_t r : trials) {
    if (r >= trials_) throw Error(ErrorKind::config, "trial " + std::to_string(r) + " out of range");
    auto begin = data_.begin() + static_cast<std::ptrdiff_t>(r * times_ * dim_);
    data.insert(data.end(), begin, begin + static_cast<std::ptrdiff_t>(times_ * dim_));
  }
  return EmbeddedEnsemble(trials.size(), first_, times_, dim_, std::move(data), blocks_, time_origin_);
}

EmbeddedEnsemble delay_embed(const TrialEnsemble& ensemble, std::span<const EmbeddingSpec> specs) {
  if (specs.empty()) throw Error(ErrorKind::invalid_spec, "no embedding blocks requested");
  const auto length = static_cast<std::int64_t>(ensemble.length());

  std::vector<EmbeddedBlock> blocks;
  std::size_t dim = 0;
  // Valid n satisfy lo <= n <= hi for every block.
  std::int64_t lo = 0;
  std::int64_t hi = length - 1;
  for (const auto& spec : specs) {
    if (spec.dim < 1 || spec.delay < 1 || spec.horizon < 0) {
      throw Error(ErrorKind::invalid_spec, "embedding needs dim >= 1, delay >= 1, horizon >= 0");
    }
    blocks.push_back({spec, ensemble.resolve(spec.channel), dim});
    dim += static_cast<std::size_t>(spec.dim);
    lo = std::max<std::int64_t>(lo, static_cast<std::int64_t>(spec.dim - 1) * spec.delay - spec.horizon);
    hi = std::min<std::int64_t>(hi, length - 1 - spec.horizon);
  }
  if (lo > hi) {
    throw Error(ErrorKind::too_short, "series of length " + std::to_string(length) +
                                          " is too short for the requested embedding");
  }

  const auto first = static_cast<std::size_t>(lo);
  const auto times = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> data(ensemble.trials() * times * dim);
  for (std::size_t r = 0; r < ensemble.trials(); ++r) {
    for (std::size_t t = 0; t < times; ++t) {
      double* out = data.data() + (r * times + t) * dim;
      const auto n = static_cast<std::int64_t>(first + t);
      for (const auto& block : blocks) {
        for (int j = 0; j < block.spec.dim; ++j) {
          const auto source = n + block.spec.horizon - static_cast<std::int64_t>(j) * block.spec.delay;
          *out++ = ensemble.at(r, static_cast<std::size_t>(source), block.channel);
        }
      }
    }
  }
  return EmbeddedEnsemble(ensemble.trials(), first, times, dim, std::move(data), std::move(blocks),
                          ensemble.time_origin());
}

TrialEnsemble apply_lags(const TrialEnsemble& ensemble,
                         std::span<const std::pair<ChannelRef, int>> lags) {
  const auto length = static_cast<std::int64_t>(ensemble.length());
  std::vector<std::int64_t> per_channel(ensemble.channels(), 0);
  for (const auto& [ref, lag] : lags) {
    if (lag >= length || -static_cast<std::int64_t>(lag) >= length) {
      throw Error(ErrorKind::invalid_lag, "lag " + std::to_string(lag) + " for channel " + describe(ref) +
                                              " must be smaller than the series length " +
                                              std::to_string(length));
    }
    per_channel[ensemble.resolve(ref)] = lag;
  }
  // Output instant j sits at input time t = begin + j; channel c reads t - lag_c.
  const std::int64_t max_lag = *std::max_element(per_channel.begin(), per_channel.end());
  const std::int64_t min_lag = *std::min_element(per_channel.begin(), per_channel.end());
  const std::int64_t begin = std::max<std::int64_t>(0, max_lag);
  const std::int64_t end = length - 1 + std::min<std::int64_t>(0, min_lag);
  if (end < begin) throw Error(ErrorKind::invalid_lag, "lags leave no overlapping samples");

  const auto new_length = static_cast<std::size_t>(end - begin + 1);
  std::vector<double> samples;
  samples.reserve(ensemble.trials() * new_length * ensemble.channels());
  for (std::size_t r = 0; r < ensemble.trials(); ++r) {
    for (std::size_t j = 0; j < new_length; ++j) {
      const std::int64_t t = begin + static_cast<std::int64_t>(j);
      for (std::size_t c = 0; c < ensemble.channels(); ++c) {
        samples.push_back(ensemble.at(r, static_cast<std::size_t>(t - per_channel[c]), c));
      }
    }
  }
  return TrialEnsemble(ensemble.trials(), new_length, ensemble.channels(), std::move(samples),
                       ensemble.channel_names(), ensemble.time_origin() + begin);
}

TrialEnsemble apply_lag(const TrialEnsemble& ensemble, const ChannelRef& channel, int lag) {
  const std::pair<ChannelRef, int> one{channel, lag};
  return apply_lags(ensemble, std::span(&one, 1));
}

}  // namespace ensinfo
