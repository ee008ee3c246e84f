#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensinfo/embedding.hpp"
#include "ensinfo/ensemble.hpp"

namespace ensinfo {

// Signed sum of marginal entropies minus the joint entropy of an
// m-dimensional vector. Marginal coordinate indices are 0-based.
//
// Valid iff every marginal is non-empty and, for every coordinate j, the
// signs of the marginals containing j add up to exactly 1.
struct CombinationSpec {
  std::size_t m = 0;
  std::vector<std::vector<std::size_t>> marginals;
  std::vector<int> signs;

  friend bool operator==(const CombinationSpec&, const CombinationSpec&) = default;
};

struct CoverageViolation {
  std::size_t coordinate = 0;
  int coverage = 0;
};

struct ValidationReport {
  std::vector<CoverageViolation> coverage;  // coordinates whose signed coverage != 1
  std::vector<std::string> problems;        // structural issues (sizes, signs, ranges, empties)

  bool ok() const noexcept { return coverage.empty() && problems.empty(); }
};

ValidationReport validate(const CombinationSpec& spec);

// Throws Error(invalid_spec) with the report rendered into the message.
void require_valid(const CombinationSpec& spec);

nlohmann::json to_json(const CombinationSpec& spec);
CombinationSpec combination_from_json(const nlohmann::json& doc);

enum class MeasureKind { mi, te, pmi, pte };

std::string to_string(MeasureKind kind);
MeasureKind parse_measure_kind(const std::string& text);

// Channel roles for a measure. The target is X, the source Y and the
// conditioner Z in the usual notation; MI and PMI are symmetric in X and Y
// but the source is still the role whose trials get shuffled.
struct MeasureRoles {
  MeasureKind kind = MeasureKind::te;
  ChannelRef target = std::size_t{0};
  ChannelRef source = std::size_t{1};
  std::optional<ChannelRef> conditioner;
  int target_dim = 1;
  int source_dim = 1;
  int conditioner_dim = 1;
  int delay = 1;
};

struct Measure {
  CombinationSpec spec;
  // Joint vector layout: (W?, target past, conditioner past?, source past).
  std::vector<EmbeddingSpec> embedding;
  std::size_t target_channel = 0;
  std::size_t source_channel = 0;
  std::optional<std::size_t> conditioner_channel;
};

// Throws Error(invalid_spec) for bad roles or dims and
// Error(unknown_channel) for channels missing from `ensemble`.
Measure build_measure(const MeasureRoles& roles, const TrialEnsemble& ensemble);

}  // namespace ensinfo
