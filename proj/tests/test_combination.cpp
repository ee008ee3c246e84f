#include <doctest.h>

#include <random>

#include "ensinfo/combination.hpp"
#include "ensinfo/error.hpp"

using namespace ensinfo;

namespace {

// Marginal sets are written 0-based here; the textbook form numbers
// coordinates from 1.
const TrialEnsemble three_channels(1, 4, 3, std::vector<double>(12, 0.0), {"x", "y", "z"});

MeasureRoles roles(MeasureKind kind, int dx = 1, int dy = 1, int dz = 1) {
  MeasureRoles r;
  r.kind = kind;
  r.target = std::string("x");
  r.source = std::string("y");
  if (kind == MeasureKind::pmi || kind == MeasureKind::pte) r.conditioner = std::string("z");
  r.target_dim = dx;
  r.source_dim = dy;
  r.conditioner_dim = dz;
  return r;
}

}  // namespace

TEST_CASE("mutual information structure is a valid combination") {
  CHECK(validate({2, {{0}, {1}}, {1, 1}}).ok());
}

TEST_CASE("partial transfer entropy structure is a valid combination") {
  // joint (W, X, Z, Y): H_WXZ + H_XZY - H_XZ
  CHECK(validate({4, {{0, 1, 2}, {1, 2, 3}, {1, 2}}, {1, 1, -1}}).ok());
}

TEST_CASE("uncovered coordinate is reported") {
  const auto report = validate({2, {{0}}, {1}});
  CHECK_FALSE(report.ok());
  REQUIRE(report.coverage.size() == 1);
  CHECK(report.coverage[0].coordinate == 1);
  CHECK(report.coverage[0].coverage == 0);
}

TEST_CASE("structural problems are reported") {
  CHECK_FALSE(validate({2, {{0, 1}, {}}, {1, 1}}).ok());
  CHECK_FALSE(validate({2, {{0, 1}}, {2}}).ok());
  CHECK_FALSE(validate({2, {{0, 5}}, {1}}).ok());
  CHECK_FALSE(validate({2, {{0, 1}}, {1, 1}}).ok());
  CHECK_THROWS_AS(require_valid({2, {{0}}, {1}}), Error);
}

TEST_CASE("transfer entropy factory with unit dims") {
  const auto m = build_measure(roles(MeasureKind::te), three_channels);
  CHECK(m.spec.m == 3);  // (W, X, Y)
  CHECK(m.spec.marginals == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}, {1}});
  CHECK(m.spec.signs == std::vector<int>{1, 1, -1});
  REQUIRE(m.embedding.size() == 3);
  CHECK(m.embedding[0].horizon == 1);
  CHECK(m.embedding[0].dim == 1);
  CHECK(m.embedding[1].horizon == 0);
  CHECK(m.embedding[2].horizon == 0);
  CHECK(m.target_channel == 0);
  CHECK(m.source_channel == 1);
}

TEST_CASE("partial mutual information factory with unit dims") {
  const auto m = build_measure(roles(MeasureKind::pmi), three_channels);
  CHECK(m.spec.m == 3);  // (X, Z, Y)
  CHECK(m.spec.marginals == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}, {1}});
  CHECK(m.spec.signs == std::vector<int>{1, 1, -1});
  CHECK(m.conditioner_channel == std::size_t{2});
}

TEST_CASE("mutual information factory with a two-dimensional target") {
  const auto m = build_measure(roles(MeasureKind::mi, 2, 1), three_channels);
  CHECK(m.spec.m == 3);
  CHECK(m.spec.marginals == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
  CHECK(m.spec.signs == std::vector<int>{1, 1});
}

TEST_CASE("every factory output validates across dims") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(1, 5);
  for (auto kind : {MeasureKind::mi, MeasureKind::te, MeasureKind::pmi, MeasureKind::pte}) {
    for (int i = 0; i < 25; ++i) {
      const auto m = build_measure(roles(kind, dim(rng), dim(rng), dim(rng)), three_channels);
      CHECK(validate(m.spec).ok());
      std::size_t total = 0;
      for (const auto& e : m.embedding) total += static_cast<std::size_t>(e.dim);
      CHECK(total == m.spec.m);
      const bool directed = kind == MeasureKind::te || kind == MeasureKind::pte;
      for (std::size_t b = 0; b < m.embedding.size(); ++b) {
        const bool future = directed && b == 0;
        CHECK(m.embedding[b].horizon == (future ? 1 : 0));
        if (future) CHECK(m.embedding[b].dim == 1);
      }
    }
  }
}

TEST_CASE("invalid roles") {
  auto r = roles(MeasureKind::te);
  r.source = std::string("x");
  CHECK_THROWS_AS(build_measure(r, three_channels), Error);
  auto p = roles(MeasureKind::pte);
  p.conditioner.reset();
  CHECK_THROWS_AS(build_measure(p, three_channels), Error);
  auto u = roles(MeasureKind::mi);
  u.source = std::string("w");
  try {
    build_measure(u, three_channels);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_channel);
  }
}

TEST_CASE("combination spec serializes to json and back") {
  const auto m = build_measure(roles(MeasureKind::pte, 2, 1, 3), three_channels);
  const auto doc = to_json(m.spec);
  CHECK(doc.at("m") == 7);
  CHECK(doc.contains("marginals"));
  CHECK(doc.contains("signs"));
  CHECK(combination_from_json(doc) == m.spec);
}
