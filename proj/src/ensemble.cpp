#include "ensinfo/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "ensinfo/error.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

namespace {

constexpr char kMagic[4] = {'E', 'I', 'N', '1'};
constexpr std::size_t kHeaderBytes = 16;

std::string default_name(std::size_t c) { return "channel_" + std::to_string(c); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": cannot parse '" +
                                      std::string(field) + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::non_finite,
                "line " + std::to_string(line_no) + ": sample '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_integer(std::string_view field, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected an integer, got '" +
                                      std::string(field) + "'");
  }
  return value;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

std::string format_sample(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

std::string describe(const ChannelRef& ref) {
  if (const auto* index = std::get_if<std::size_t>(&ref)) return "#" + std::to_string(*index);
  return "'" + std::get<std::string>(ref) + "'";
}

TrialEnsemble::TrialEnsemble(std::size_t trials, std::size_t length, std::size_t channels,
                             std::vector<double> samples, std::vector<std::string> channel_names,
                             std::int64_t time_origin)
    : trials_(trials),
      length_(length),
      channels_(channels),
      samples_(std::move(samples)),
      names_(std::move(channel_names)),
      time_origin_(time_origin) {
  if (trials_ == 0 || length_ == 0 || channels_ == 0) {
    throw Error(ErrorKind::format, "ensemble dimensions must all be at least 1");
  }
  if (samples_.size() != trials_ * length_ * channels_) {
    throw Error(ErrorKind::format, "sample count " + std::to_string(samples_.size()) +
                                       " does not match dimensions");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      std::size_t c = i % channels_;
      std::size_t n = (i / channels_) % length_;
      std::size_t r = i / (channels_ * length_);
      throw Error(ErrorKind::non_finite, "trial " + std::to_string(r) + ", time " +
                                             std::to_string(n) + ", channel " + std::to_string(c));
    }
  }
  if (names_.empty()) {
    for (std::size_t c = 0; c < channels_; ++c) names_.push_back(default_name(c));
  } else if (names_.size() != channels_) {
    throw Error(ErrorKind::format, "expected " + std::to_string(channels_) + " channel names");
  }
}

std::size_t TrialEnsemble::resolve(const ChannelRef& ref) const {
  if (const auto* index = std::get_if<std::size_t>(&ref)) {
    if (*index >= channels_) {
      throw Error(ErrorKind::unknown_channel, "channel index " + std::to_string(*index) +
                                                  " out of range (" + std::to_string(channels_) +
                                                  " channels)");
    }
    return *index;
  }
  const auto& name = std::get<std::string>(ref);
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorKind::unknown_channel, "no channel named '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool operator==(const TrialEnsemble& a, const TrialEnsemble& b) {
  if (a.trials_ != b.trials_ || a.length_ != b.length_ || a.channels_ != b.channels_) return false;
  return std::equal(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), b.samples_.end(),
                    [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                    });
}

TrialEnsemble load_csv(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, path.string() + ": missing header row");
  std::vector<std::string> header;
  for (auto field : split_row(line)) header.emplace_back(field);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::parse, "header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t trial_col = column_of(layout.trial_column);
  const std::size_t time_col = column_of(layout.time_column);
  std::vector<std::size_t> value_cols;
  std::vector<std::string> names;
  if (layout.value_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == trial_col || i == time_col) continue;
      value_cols.push_back(i);
      names.push_back(header[i]);
    }
  } else {
    for (const auto& name : layout.value_columns) {
      value_cols.push_back(column_of(name));
      names.push_back(name);
    }
  }
  if (value_cols.empty()) throw Error(ErrorKind::parse, "no value columns");

  // trial label -> (time -> channel values)
  std::map<std::int64_t, std::map<std::int64_t, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_row(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    std::int64_t trial = parse_integer(fields[trial_col], line_no);
    std::int64_t time = parse_integer(fields[time_col], line_no);
    std::vector<double> values;
    values.reserve(value_cols.size());
    for (std::size_t c : value_cols) values.push_back(parse_double(fields[c], line_no));
    if (!rows[trial].emplace(time, std::move(values)).second) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": duplicate (trial, time) row");
    }
  }
  if (rows.empty()) throw Error(ErrorKind::parse, path.string() + ": no data rows");

  const auto& first_trial = rows.begin()->second;
  const std::int64_t t0 = first_trial.begin()->first;
  const std::size_t length = first_trial.size();
  std::vector<double> samples;
  samples.reserve(rows.size() * length * value_cols.size());
  for (const auto& [label, times] : rows) {
    if (times.size() != length) {
      throw Error(ErrorKind::ragged_trial, "trial " + std::to_string(label) + " has " +
                                               std::to_string(times.size()) + " samples, expected " +
                                               std::to_string(length));
    }
    std::int64_t expected = t0;
    for (const auto& [time, values] : times) {
      if (time != expected) {
        throw Error(ErrorKind::ragged_trial, "trial " + std::to_string(label) +
                                                 " does not cover times " + std::to_string(t0) + ".." +
                                                 std::to_string(t0 + static_cast<std::int64_t>(length) - 1));
      }
      ++expected;
      samples.insert(samples.end(), values.begin(), values.end());
    }
  }
  return TrialEnsemble(rows.size(), length, value_cols.size(), std::move(samples), std::move(names), t0);
}

void store_csv(const TrialEnsemble& ensemble, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "trial,time";
  for (const auto& name : ensemble.channel_names()) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < ensemble.trials(); ++r) {
    for (std::size_t n = 0; n < ensemble.length(); ++n) {
      out << r << ',' << ensemble.time_origin() + static_cast<std::int64_t>(n);
      for (std::size_t c = 0; c < ensemble.channels(); ++c) out << ',' << format_sample(ensemble.at(r, n, c));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<std::uint8_t> encode_binary(const TrialEnsemble& ensemble) {
  constexpr auto max32 = std::numeric_limits<std::uint32_t>::max();
  if (ensemble.trials() > max32 || ensemble.length() > max32 || ensemble.channels() > max32) {
    throw Error(ErrorKind::dimension_overflow, "dimensions exceed 32-bit header fields");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + ensemble.samples().size() * 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(ensemble.trials()));
  put_u32(out, static_cast<std::uint32_t>(ensemble.length()));
  put_u32(out, static_cast<std::uint32_t>(ensemble.channels()));
  for (double v : ensemble.samples()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

TrialEnsemble decode_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw Error(ErrorKind::format, "truncated header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorKind::format, "bad magic bytes");
  }
  const std::uint64_t trials = get_u32(bytes, 4);
  const std::uint64_t length = get_u32(bytes, 8);
  const std::uint64_t channels = get_u32(bytes, 12);
  // Each factor is < 2^32, so the first product cannot overflow.
  const std::uint64_t tl = trials * length;
  if (channels != 0 && tl > std::numeric_limits<std::uint64_t>::max() / 8 / channels) {
    throw Error(ErrorKind::dimension_overflow, "header dimensions overflow");
  }
  const std::uint64_t count = tl * channels;
  if (bytes.size() - kHeaderBytes != count * 8) {
    throw Error(ErrorKind::format, "payload holds " + std::to_string(bytes.size() - kHeaderBytes) +
                                       " bytes, header requires " + std::to_string(count * 8));
  }
  std::vector<double> samples(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    const std::size_t at = kHeaderBytes + i * 8;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[at + b]) << (8 * b);
    samples[i] = std::bit_cast<double>(bits);
  }
  return TrialEnsemble(trials, length, channels, std::move(samples));
}

void store_binary(const TrialEnsemble& ensemble, const std::filesystem::path& path) {
  auto bytes = encode_binary(ensemble);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

TrialEnsemble load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_binary(bytes);
}

TrialEnsemble slice_channels(const TrialEnsemble& ensemble, std::span<const ChannelRef> channels) {
  std::vector<std::size_t> picked;
  std::vector<std::string> names;
  for (const auto& ref : channels) {
    picked.push_back(ensemble.resolve(ref));
    names.push_back(ensemble.channel_names()[picked.back()]);
  }
  if (picked.empty()) throw Error(ErrorKind::unknown_channel, "empty channel list");
  std::vector<double> samples;
  samples.reserve(ensemble.trials() * ensemble.length() * picked.size());
  for (std::size_t r = 0; r < ensemble.trials(); ++r)
    for (std::size_t n = 0; n < ensemble.length(); ++n)
      for (std::size_t c : picked) samples.push_back(ensemble.at(r, n, c));
  return TrialEnsemble(ensemble.trials(), ensemble.length(), picked.size(), std::move(samples),
                       std::move(names), ensemble.time_origin());
}

TrialEnsemble add_jitter(const TrialEnsemble& ensemble, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::config, "jitter amplitude must be finite and non-negative");
  }
  std::vector<double> samples(ensemble.samples().begin(), ensemble.samples().end());
  if (amplitude > 0.0) {
    Rng rng(derive_seed(seed, {0x6a17u}));
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    for (double& v : samples) v += noise(rng);
  }
  return TrialEnsemble(ensemble.trials(), ensemble.length(), ensemble.channels(), std::move(samples),
                       ensemble.channel_names(), ensemble.time_origin());
}

double sample_range(const TrialEnsemble& ensemble) {
  auto s = ensemble.samples();
  if (s.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return *hi - *lo;
}

}  // namespace ensinfo
