#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ensinfo/combination.hpp"
#include "ensinfo/lag_scan.hpp"
#include "ensinfo/significance.hpp"
#include "ensinfo/synthgen.hpp"
#include "ensinfo/time_resolved.hpp"

namespace ensinfo {

// A fully resolved run. Every field has a default, and to_json() writes all
// of them, so a provenance record can be fed back as a config.
struct RunConfig {
  // Input: a file (.bin or .csv) or the coupled AR generator.
  std::optional<std::filesystem::path> input_path;
  CoupledARConfig generator;
  std::string gen_format = "bin";  // gen output: bin, csv or both

  MeasureRoles measure{MeasureKind::pte, std::string("y"), std::string("x"), std::string("z")};
  EstimatorKind estimator = EstimatorKind::ensemble;
  TemporalParams temporal;
  bool jitter_auto = false;  // jitter = 1e-10 * data range

  // Lags: "auto" scans [0, max_lag] per non-target role; otherwise explicit
  // per-channel lags applied as given.
  bool auto_lags = true;
  std::vector<std::pair<ChannelRef, int>> lags;
  int max_lag = 30;
  LagCriterion lag_criterion = LagCriterion::ensemble;

  // lagscan command; default to the measure's source and target.
  std::optional<ChannelRef> scan_source;
  std::optional<ChannelRef> scan_destination;

  bool significance = true;
  SurrogateConfig surrogate;

  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path out = "out";
};

// Throws Error(config) on unknown values or malformed fields. Unknown keys
// ("software", "command", "resolved") from provenance records are ignored.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

ChannelRef channel_from_json(const nlohmann::json& value);
nlohmann::json to_json(const ChannelRef& ref);

struct EstimateRun {
  EstimateSeries series;
  std::vector<std::pair<std::string, int>> applied_lags;  // channel name -> lag
  std::optional<std::string> warning;
};

struct LagScanRun {
  LagScan scan;
  std::string source;
  std::string destination;
};

// Loads or generates the input ensemble named by the config.
TrialEnsemble load_input(const RunConfig& config);

// Each command writes its outputs plus run.json under config.out.
void cmd_gen(const RunConfig& config);
EstimateRun cmd_estimate(const RunConfig& config);
LagScanRun cmd_lagscan(const RunConfig& config);

// The estimation pipeline without any file output.
EstimateRun run_estimate(const TrialEnsemble& ensemble, const RunConfig& config);

// Lag actually applied to a non-target channel given its MI-maximising lag:
// directed measures predict the target one step ahead, so the source is
// aligned one sample earlier than the MI peak.
int applied_lag(MeasureKind kind, int mi_peak_lag);

void write_lagscan_csv(const LagScan& scan, const std::filesystem::path& path);

}  // namespace ensinfo
