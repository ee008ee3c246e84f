#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ensinfo/ensemble.hpp"

namespace ensinfo {

// One delay-embedded coordinate block. At time n the block holds
//   (x(n + horizon), x(n + horizon - delay), ..., x(n + horizon - (dim - 1) * delay)).
// horizon = 0 gives a past-state block, horizon = 1 the one-step-ahead sample.
struct EmbeddingSpec {
  ChannelRef channel = std::size_t{0};
  int dim = 1;
  int delay = 1;
  int horizon = 0;
};

struct EmbeddedBlock {
  EmbeddingSpec spec;
  std::size_t channel = 0;  // resolved channel index
  std::size_t offset = 0;   // first coordinate of this block in the joint vector
};

// Joint state vectors for every (trial, time) in a common valid time range.
class EmbeddedEnsemble {
 public:
  EmbeddedEnsemble() = default;
  EmbeddedEnsemble(std::size_t trials, std::size_t first, std::size_t times, std::size_t dim,
                   std::vector<double> data, std::vector<EmbeddedBlock> blocks, std::int64_t time_origin);

  std::size_t trials() const noexcept { return trials_; }
  // Number of retained time instants.
  std::size_t times() const noexcept { return times_; }
  // Index (within the source TrialEnsemble) of the first retained instant.
  std::size_t first() const noexcept { return first_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<EmbeddedBlock>& blocks() const noexcept { return blocks_; }

  // Recording-clock time of retained instant t (0 <= t < times()).
  std::int64_t clock_time(std::size_t t) const noexcept {
    return time_origin_ + static_cast<std::int64_t>(first_ + t);
  }
  std::int64_t time_origin() const noexcept { return time_origin_; }

  // t is the retained-instant index, 0 <= t < times().
  std::span<const double> point(std::size_t trial, std::size_t t) const noexcept {
    return {data_.data() + (trial * times_ + t) * dim_, dim_};
  }
  std::span<double> mutable_point(std::size_t trial, std::size_t t) noexcept {
    return {data_.data() + (trial * times_ + t) * dim_, dim_};
  }

  std::span<const double> data() const noexcept { return data_; }

  // Keeps only the listed trials, in the listed order.
  EmbeddedEnsemble select_trials(std::span<const std::size_t> trials) const;

 private:
  std::size_t trials_ = 0;
  std::size_t first_ = 0;
  std::size_t times_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<EmbeddedBlock> blocks_;
  std::int64_t time_origin_ = 0;
};

// Throws Error(too_short) when no time instant admits every block and
// Error(invalid_spec) for dim < 1, delay < 1 or horizon < 0.
EmbeddedEnsemble delay_embed(const TrialEnsemble& ensemble, std::span<const EmbeddingSpec> specs);

// new[n] = old[n - lag] for the lagged channel; every channel is truncated to
// the common overlap so the result stays aligned. Negative lags shift the
// other way. Throws Error(invalid_lag) when |lag| >= length.
TrialEnsemble apply_lag(const TrialEnsemble& ensemble, const ChannelRef& channel, int lag);

// Several lags at once, each relative to the unshifted input.
TrialEnsemble apply_lags(const TrialEnsemble& ensemble,
                         std::span<const std::pair<ChannelRef, int>> lags);

}  // namespace ensinfo
