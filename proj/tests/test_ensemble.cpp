#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "ensinfo/ensemble.hpp"
#include "ensinfo/error.hpp"

using namespace ensinfo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ensinfo_test_ensemble";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ensinfo::Error");
  return ErrorKind::config;
}

TrialEnsemble random_ensemble(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  const std::size_t r = dim(rng), n = dim(rng) * 3, c = dim(rng);
  std::vector<double> s(r * n * c);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (double& v : s) {
    do {
      v = std::bit_cast<double>(bits(rng));  // arbitrary finite bit patterns, subnormals included
    } while (!std::isfinite(v));
  }
  return TrialEnsemble(r, n, c, std::move(s));
}

}  // namespace

TEST_CASE("csv with two trials of three samples loads") {
  const auto p = scratch("small.csv");
  write_text(p, "trial,time,channel_0\n0,0,1.5\n0,1,2\n0,2,-3\n1,0,4\n1,1,5.25\n1,2,6\n");
  const auto e = load_csv(p);
  CHECK(e.trials() == 2);
  CHECK(e.length() == 3);
  CHECK(e.channels() == 1);
  CHECK(e.at(0, 2, 0) == -3.0);
  CHECK(e.at(1, 1, 0) == 5.25);
  CHECK(e.channel_names() == std::vector<std::string>{"channel_0"});
}

TEST_CASE("csv rows may arrive out of order") {
  const auto p = scratch("shuffled.csv");
  write_text(p, "time,trial,a,b\n1,1,3,30\n0,0,0,0\n0,1,2,20\n1,0,1,10\n");
  const auto e = load_csv(p);
  CHECK(e.at(1, 0, 1) == 20.0);
  CHECK(e.at(0, 1, 0) == 1.0);
  CHECK(e.resolve(std::string("b")) == 1);
}

TEST_CASE("csv with a short trial is ragged") {
  const auto p = scratch("ragged.csv");
  write_text(p, "trial,time,x\n0,0,1\n0,1,2\n0,2,3\n1,0,4\n1,1,5\n");
  CHECK(kind_of([&] { load_csv(p); }) == ErrorKind::ragged_trial);
}

TEST_CASE("csv containing NaN is rejected") {
  const auto p = scratch("nan.csv");
  write_text(p, "trial,time,x\n0,0,1\n0,1,NaN\n");
  CHECK(kind_of([&] { load_csv(p); }) == ErrorKind::non_finite);
}

TEST_CASE("csv parse failures") {
  const auto p = scratch("bad.csv");
  write_text(p, "trial,time,x\n0,0,abc\n");
  CHECK(kind_of([&] { load_csv(p); }) == ErrorKind::parse);
  write_text(p, "trial,time,x\n0,0\n");
  CHECK(kind_of([&] { load_csv(p); }) == ErrorKind::parse);
  write_text(p, "foo,time,x\n0,0,1\n");
  CHECK(kind_of([&] { load_csv(p); }) == ErrorKind::parse);
  CHECK(kind_of([&] { load_csv(scratch("missing.csv")); }) == ErrorKind::io);
}

TEST_CASE("csv round trip preserves values at full precision") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1e3);
  std::vector<double> s(4 * 7 * 2);
  for (double& v : s) v = g(rng);
  s[3] = 5e-310;  // subnormal
  s[4] = -0.0;
  const TrialEnsemble e(4, 7, 2, s, {"a", "b"});
  const auto p = scratch("roundtrip.csv");
  store_csv(e, p);
  CHECK(load_csv(p) == e);
}

TEST_CASE("binary round trip is bit exact for random ensembles") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const auto e = random_ensemble(rng);
    CHECK(decode_binary(encode_binary(e)) == e);
  }
  const auto e = random_ensemble(rng);
  const auto p = scratch("roundtrip.bin");
  store_binary(e, p);
  CHECK(load_binary(p) == e);
}

TEST_CASE("binary layout is little endian with the EIN1 magic") {
  const TrialEnsemble e(1, 1, 1, {1.0});
  const auto bytes = encode_binary(e);
  REQUIRE(bytes.size() == 24);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "EIN1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 1);
  // 1.0 = 0x3FF0000000000000
  CHECK(bytes[22] == 0xF0);
  CHECK(bytes[23] == 0x3F);
}

TEST_CASE("binary decoding rejects damaged files") {
  const TrialEnsemble e(2, 3, 1, {1, 2, 3, 4, 5, 6});
  auto bytes = encode_binary(e);
  SUBCASE("truncated header") {
    std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 10);
    CHECK(kind_of([&] { decode_binary(head); }) == ErrorKind::format);
  }
  SUBCASE("truncated payload") {
    bytes.pop_back();
    CHECK(kind_of([&] { decode_binary(bytes); }) == ErrorKind::format);
  }
  SUBCASE("wrong magic") {
    bytes[0] = 'X';
    CHECK(kind_of([&] { decode_binary(bytes); }) == ErrorKind::format);
  }
  SUBCASE("dimensions that overflow") {
    for (int i = 4; i < 16; ++i) bytes[i] = 0xFF;
    CHECK(kind_of([&] { decode_binary(bytes); }) == ErrorKind::dimension_overflow);
  }
  SUBCASE("non-finite payload") {
    const auto nan_bits = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::quiet_NaN());
    for (int b = 0; b < 8; ++b) bytes[16 + b] = static_cast<std::uint8_t>(nan_bits >> (8 * b));
    CHECK(kind_of([&] { decode_binary(bytes); }) == ErrorKind::non_finite);
  }
}

TEST_CASE("slicing channels") {
  std::vector<double> s;
  for (int r = 0; r < 2; ++r)
    for (int n = 0; n < 4; ++n)
      for (int c = 0; c < 3; ++c) s.push_back(100 * r + 10 * n + c);
  const TrialEnsemble e(2, 4, 3, s, {"x", "y", "z"});

  const std::vector<ChannelRef> first{std::size_t{0}};
  const auto one = slice_channels(e, first);
  CHECK(one.channels() == 1);
  CHECK(one.at(1, 3, 0) == 130.0);

  const std::vector<ChannelRef> swapped{std::string("z"), std::size_t{0}};
  const auto two = slice_channels(e, swapped);
  CHECK(two.channel_names() == std::vector<std::string>{"z", "x"});
  CHECK(two.at(0, 2, 0) == 22.0);
  CHECK(two.at(0, 2, 1) == 20.0);

  const std::vector<ChannelRef> bad{std::size_t{5}};
  CHECK(kind_of([&] { slice_channels(e, bad); }) == ErrorKind::unknown_channel);
  const std::vector<ChannelRef> bad_name{std::string("w")};
  CHECK(kind_of([&] { slice_channels(e, bad_name); }) == ErrorKind::unknown_channel);
}

TEST_CASE("constructing with a non-finite sample fails") {
  CHECK(kind_of([] { TrialEnsemble(1, 2, 1, {0.0, std::numeric_limits<double>::infinity()}); }) ==
        ErrorKind::non_finite);
}
