#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ensinfo {

// A channel addressed either by 0-based position or by name.
using ChannelRef = std::variant<std::size_t, std::string>;

std::string describe(const ChannelRef& ref);

// Repeated multivariate recordings: samples laid out [trial][time][channel].
//
// Immutable after construction. `time_origin` is the index, on the original
// recording clock, of sample 0; it only changes when lagging truncates the
// head of the series and is not part of the binary format.
class TrialEnsemble {
 public:
  TrialEnsemble() = default;

  // Throws Error(non_finite) if any sample is NaN or infinite and
  // Error(format) if the sample count does not match the dimensions.
  TrialEnsemble(std::size_t trials, std::size_t length, std::size_t channels,
                std::vector<double> samples, std::vector<std::string> channel_names = {},
                std::int64_t time_origin = 0);

  std::size_t trials() const noexcept { return trials_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t channels() const noexcept { return channels_; }
  std::int64_t time_origin() const noexcept { return time_origin_; }

  double at(std::size_t trial, std::size_t time, std::size_t channel) const noexcept {
    return samples_[(trial * length_ + time) * channels_ + channel];
  }

  std::span<const double> samples() const noexcept { return samples_; }

  // Names default to "channel_<i>" when none were supplied.
  const std::vector<std::string>& channel_names() const noexcept { return names_; }

  // Throws Error(unknown_channel).
  std::size_t resolve(const ChannelRef& ref) const;

  // Equality compares dimensions and the bit patterns of every sample.
  friend bool operator==(const TrialEnsemble& a, const TrialEnsemble& b);

 private:
  std::size_t trials_ = 0;
  std::size_t length_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> samples_;
  std::vector<std::string> names_;
  std::int64_t time_origin_ = 0;
};

// Long-format CSV: one row per (trial, time), one column per channel.
// An empty `value_columns` selects every column other than trial and time,
// in header order.
struct CsvLayout {
  std::string trial_column = "trial";
  std::string time_column = "time";
  std::vector<std::string> value_columns;
};

TrialEnsemble load_csv(const std::filesystem::path& path, const CsvLayout& layout = {});
void store_csv(const TrialEnsemble& ensemble, const std::filesystem::path& path);

// Binary layout: "EIN1", u32 trials, u32 length, u32 channels (little
// endian), then trials*length*channels little-endian IEEE-754 doubles.
void store_binary(const TrialEnsemble& ensemble, const std::filesystem::path& path);
TrialEnsemble load_binary(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_binary(const TrialEnsemble& ensemble);
TrialEnsemble decode_binary(std::span<const std::uint8_t> bytes);

TrialEnsemble slice_channels(const TrialEnsemble& ensemble, std::span<const ChannelRef> channels);

// Adds independent uniform noise in [-amplitude, amplitude] to every sample.
TrialEnsemble add_jitter(const TrialEnsemble& ensemble, double amplitude, std::uint64_t seed);

// max - min over all samples; 0 for an empty ensemble.
double sample_range(const TrialEnsemble& ensemble);

}  // namespace ensinfo
