#include "ensinfo/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "ensinfo/embedding.hpp"
#include "ensinfo/error.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

namespace {

constexpr std::uint64_t kSurrogateStream = 1;
constexpr std::uint64_t kJitterStream = 2;

using nlohmann::json;

std::string normalization_name(Normalization n) { return n == Normalization::window ? "window" : "fixed"; }

std::string baseline_pool_name(BaselinePool p) { return p == BaselinePool::trial ? "trial" : "window"; }

BaselinePool parse_baseline_pool(const std::string& text) {
  if (text == "trial") return BaselinePool::trial;
  if (text == "window") return BaselinePool::window;
  throw Error(ErrorKind::config, "unknown baseline pool '" + text + "' (expected trial or window)");
}

Normalization parse_normalization(const std::string& text) {
  if (text == "window") return Normalization::window;
  if (text == "fixed") return Normalization::fixed;
  throw Error(ErrorKind::config, "unknown normalization '" + text + "' (expected window or fixed)");
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void prepare_out(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

json provenance(const RunConfig& config, const std::string& command) {
  json doc = to_json(config);
  doc["command"] = command;
  doc["software"] = {{"name", "ensinfo"}, {"version", ENSINFO_VERSION}};
  return doc;
}

EstimatorParams seeded_estimator(const RunConfig& config) {
  EstimatorParams p = config.temporal.estimator;
  p.jitter_seed = derive_seed(config.seed, {kJitterStream});
  return p;
}

void require_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::format, std::string("non-finite value in ") + what);
  }
}

}  // namespace

ChannelRef channel_from_json(const json& value) {
  if (value.is_number_unsigned()) return value.get<std::size_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) return static_cast<std::size_t>(value.get<std::int64_t>());
  if (value.is_string()) return value.get<std::string>();
  throw Error(ErrorKind::config, "channel must be a name or a non-negative index, got " + value.dump());
}

json to_json(const ChannelRef& ref) {
  if (const auto* index = std::get_if<std::size_t>(&ref)) return *index;
  return std::get<std::string>(ref);
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  RunConfig config;
  try {
    config.seed = doc.value("seed", config.seed);
    config.threads = doc.value("threads", config.threads);
    if (doc.contains("out")) config.out = doc.at("out").get<std::string>();

    config.generator.seed = config.seed;
    if (doc.contains("input")) {
      const json& input = doc.at("input");
      if (input.contains("path")) config.input_path = input.at("path").get<std::string>();
      if (input.contains("generator")) {
        json gen = input.at("generator");
        if (gen.contains("channels") && gen.at("channels").get<int>() != 3) {
          throw Error(ErrorKind::config, "the coupled AR generator produces exactly 3 channels");
        }
        if (!gen.contains("seed")) gen["seed"] = config.seed;
        config.generator = coupled_ar_from_json(gen);
      }
      if (config.input_path && input.contains("generator")) {
        throw Error(ErrorKind::config, "input names both a file and a generator");
      }
      config.gen_format = input.value("format", config.gen_format);
    }
    if (config.gen_format != "bin" && config.gen_format != "csv" && config.gen_format != "both") {
      throw Error(ErrorKind::config, "input.format must be bin, csv or both");
    }

    if (doc.contains("measure")) {
      const json& m = doc.at("measure");
      auto& roles = config.measure;
      roles.kind = parse_measure_kind(m.value("kind", to_string(roles.kind)));
      if (m.contains("target")) roles.target = channel_from_json(m.at("target"));
      if (m.contains("source")) roles.source = channel_from_json(m.at("source"));
      const bool conditioned = roles.kind == MeasureKind::pmi || roles.kind == MeasureKind::pte;
      if (m.contains("conditioner") && !m.at("conditioner").is_null()) {
        roles.conditioner = channel_from_json(m.at("conditioner"));
      } else if (!conditioned || m.contains("conditioner")) {
        roles.conditioner.reset();
      }
      if (!conditioned) roles.conditioner.reset();
      roles.target_dim = m.value("target_dim", roles.target_dim);
      roles.source_dim = m.value("source_dim", roles.source_dim);
      roles.conditioner_dim = m.value("conditioner_dim", roles.conditioner_dim);
      roles.delay = m.value("delay", roles.delay);
    }

    if (doc.contains("estimator")) {
      const json& e = doc.at("estimator");
      config.estimator = parse_estimator_kind(e.value("kind", to_string(config.estimator)));
      auto& t = config.temporal;
      t.estimator.k = e.value("k", t.estimator.k);
      t.half_width = e.value("half_width", t.half_width);
      t.smoothing = e.value("smoothing", t.smoothing);
      t.normalization = parse_normalization(e.value("normalization", normalization_name(t.normalization)));
      t.baseline_pool = parse_baseline_pool(e.value("baseline_pool", baseline_pool_name(t.baseline_pool)));
      if (e.contains("jitter")) {
        const json& j = e.at("jitter");
        if (j.is_boolean()) {
          config.jitter_auto = j.get<bool>();
          t.estimator.jitter = 0.0;
        } else if (j.is_string() && j.get<std::string>() == "auto") {
          config.jitter_auto = true;
        } else {
          t.estimator.jitter = j.get<double>();
          config.jitter_auto = false;
        }
      }
      if (t.estimator.k < 1) throw Error(ErrorKind::config, "estimator.k must be at least 1");
      if (!(t.estimator.jitter >= 0.0)) throw Error(ErrorKind::config, "estimator.jitter must be non-negative");
    }

    if (doc.contains("lags")) {
      const json& lags = doc.at("lags");
      if (lags.is_string()) {
        if (lags.get<std::string>() != "auto") throw Error(ErrorKind::config, "lags must be \"auto\" or an object");
        config.auto_lags = true;
      } else if (lags.is_object()) {
        config.auto_lags = false;
        config.lags.clear();
        for (const auto& [name, lag] : lags.items()) config.lags.emplace_back(name, lag.get<int>());
      } else {
        throw Error(ErrorKind::config, "lags must be \"auto\" or an object of channel -> lag");
      }
    }
    config.max_lag = doc.value("max_lag", config.max_lag);
    if (doc.contains("lag_criterion")) config.lag_criterion = parse_lag_criterion(doc.at("lag_criterion").get<std::string>());

    if (doc.contains("lagscan")) {
      const json& s = doc.at("lagscan");
      if (s.contains("source")) config.scan_source = channel_from_json(s.at("source"));
      if (s.contains("destination")) config.scan_destination = channel_from_json(s.at("destination"));
      config.max_lag = s.value("max_lag", config.max_lag);
    }

    if (doc.contains("significance")) {
      const json& s = doc.at("significance");
      config.significance = s.value("enabled", config.significance);
      config.surrogate.surrogates = s.value("surrogates", config.surrogate.surrogates);
      config.surrogate.alpha = s.value("alpha", config.surrogate.alpha);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, e.what());
  }
  if (config.significance) check(config.surrogate);
  if (config.max_lag < 0) throw Error(ErrorKind::config, "max_lag must be non-negative");
  config.surrogate.seed = derive_seed(config.seed, {kSurrogateStream});
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& config) {
  json doc;
  doc["seed"] = config.seed;
  doc["out"] = config.out.string();
  json input;
  if (config.input_path) {
    input["path"] = config.input_path->string();
  } else {
    input["generator"] = to_json(config.generator);
  }
  input["format"] = config.gen_format;
  doc["input"] = input;

  const auto& roles = config.measure;
  json measure = {{"kind", to_string(roles.kind)},
                  {"target", to_json(roles.target)},
                  {"source", to_json(roles.source)},
                  {"target_dim", roles.target_dim},
                  {"source_dim", roles.source_dim},
                  {"delay", roles.delay}};
  if (roles.conditioner) {
    measure["conditioner"] = to_json(*roles.conditioner);
    measure["conditioner_dim"] = roles.conditioner_dim;
  }
  doc["measure"] = measure;

  json jitter = config.jitter_auto ? json("auto") : json(config.temporal.estimator.jitter);
  doc["estimator"] = {{"kind", to_string(config.estimator)},
                      {"k", config.temporal.estimator.k},
                      {"half_width", config.temporal.half_width},
                      {"smoothing", config.temporal.smoothing},
                      {"normalization", normalization_name(config.temporal.normalization)},
                      {"baseline_pool", baseline_pool_name(config.temporal.baseline_pool)},
                      {"jitter", jitter}};
  if (config.auto_lags) {
    doc["lags"] = "auto";
  } else {
    json lags = json::object();
    for (const auto& [ref, lag] : config.lags) {
      const json key = to_json(ref);
      lags[key.is_string() ? key.get<std::string>() : key.dump()] = lag;
    }
    doc["lags"] = lags;
  }
  doc["max_lag"] = config.max_lag;
  doc["lag_criterion"] = to_string(config.lag_criterion);
  json scan = json::object();
  if (config.scan_source) scan["source"] = to_json(*config.scan_source);
  if (config.scan_destination) scan["destination"] = to_json(*config.scan_destination);
  doc["lagscan"] = scan;
  doc["significance"] = {{"enabled", config.significance},
                         {"surrogates", config.surrogate.surrogates},
                         {"alpha", config.surrogate.alpha}};
  return doc;
}

TrialEnsemble load_input(const RunConfig& config) {
  if (!config.input_path) return generate_coupled_ar(config.generator);
  const auto ext = config.input_path->extension().string();
  if (ext == ".csv") return load_csv(*config.input_path);
  return load_binary(*config.input_path);
}

int applied_lag(MeasureKind kind, int mi_peak_lag) {
  const bool directed = kind == MeasureKind::te || kind == MeasureKind::pte;
  return directed ? std::max(0, mi_peak_lag - 1) : mi_peak_lag;
}

EstimateRun run_estimate(const TrialEnsemble& input, const RunConfig& config) {
  EstimateRun run;
  const MeasureRoles& roles = config.measure;
  // Resolves roles and rejects bad combinations before any expensive work.
  const Measure probe = build_measure(roles, input);
  EstimatorParams estimator = seeded_estimator(config);
  TrialEnsemble data = input;
  if (config.jitter_auto) estimator.jitter = 1e-10 * sample_range(input);
  if (estimator.jitter > 0.0) {
    data = add_jitter(input, estimator.jitter, estimator.jitter_seed);
    estimator.jitter = 0.0;
  }

  TemporalParams temporal = config.temporal;
  temporal.estimator = estimator;

  std::vector<std::pair<ChannelRef, int>> lags;
  if (config.auto_lags) {
    std::vector<std::size_t> movers{probe.source_channel};
    if (probe.conditioner_channel) movers.push_back(*probe.conditioner_channel);
    for (std::size_t channel : movers) {
      const int peak = scan_lags(data, channel, probe.target_channel, config.max_lag, config.lag_criterion, temporal,
                                 config.threads)
                           .best_lag;
      lags.emplace_back(channel, applied_lag(roles.kind, peak));
    }
  } else {
    lags = config.lags;
  }
  for (const auto& [ref, lag] : lags) run.applied_lags.emplace_back(data.channel_names()[data.resolve(ref)], lag);
  const TrialEnsemble aligned = apply_lags(data, lags);

  const Measure measure = build_measure(roles, aligned);
  const EmbeddedEnsemble embedded = delay_embed(aligned, measure.embedding);

  const bool degenerate = config.estimator == EstimatorKind::ensemble && embedded.trials() == 1 &&
                          temporal.half_width + 1 >= embedded.times();
  if (degenerate) {
    // Every window is the whole record: report the stationary estimate at
    // every instant rather than its per-point decomposition.
    TemporalParams raw = temporal;
    raw.smoothing = 1;
    run.series = ensemble_estimate(embedded, measure.spec, raw, config.threads);
    const double mean = std::accumulate(run.series.value.begin(), run.series.value.end(), 0.0) /
                        static_cast<double>(run.series.size());
    std::fill(run.series.value.begin(), run.series.value.end(), mean);
    run.warning = "window spans the whole single-trial record; reporting the stationary estimate";
  } else {
    run.series = estimate(config.estimator, embedded, measure.spec, temporal, config.threads);
  }

  if (config.significance) {
    if (embedded.trials() < 2) {
      run.warning = "permutation test skipped: trial shuffling needs at least two trials";
    } else {
      if (auto w = resolution_warning(config.surrogate)) run.warning = *w;
      attach(run.series, permutation_test(embedded, measure.spec, temporal, config.surrogate, measure.source_channel,
                                          config.estimator, config.threads, &run.series));
    }
  }
  require_finite(run.series.value, "estimate");
  return run;
}

void cmd_gen(const RunConfig& config) {
  if (config.input_path) throw Error(ErrorKind::config, "gen needs a generator input, not a file");
  const TrialEnsemble ensemble = generate_coupled_ar(config.generator);
  prepare_out(config.out);
  if (config.gen_format == "bin" || config.gen_format == "both") store_binary(ensemble, config.out / "ensemble.bin");
  if (config.gen_format == "csv" || config.gen_format == "both") store_csv(ensemble, config.out / "ensemble.csv");
  json doc = provenance(config, "gen");
  doc["resolved"] = {{"trials", ensemble.trials()}, {"length", ensemble.length()}, {"channels", ensemble.channels()}};
  write_json(doc, config.out / "run.json");
}

EstimateRun cmd_estimate(const RunConfig& config) {
  const TrialEnsemble ensemble = load_input(config);
  EstimateRun run = run_estimate(ensemble, config);
  prepare_out(config.out);
  store_csv(run.series, config.out / "estimate.csv");
  json doc = provenance(config, "estimate");
  json lags = json::object();
  for (const auto& [name, lag] : run.applied_lags) lags[name] = lag;
  doc["resolved"] = {{"applied_lags", lags}, {"instants", run.series.size()}};
  if (run.warning) doc["resolved"]["warning"] = *run.warning;
  write_json(doc, config.out / "run.json");
  return run;
}

LagScanRun cmd_lagscan(const RunConfig& config) {
  const TrialEnsemble ensemble = load_input(config);
  const ChannelRef source = config.scan_source.value_or(config.measure.source);
  const ChannelRef destination = config.scan_destination.value_or(config.measure.target);
  EstimatorParams estimator = seeded_estimator(config);
  TrialEnsemble data = ensemble;
  if (config.jitter_auto) estimator.jitter = 1e-10 * sample_range(ensemble);
  if (estimator.jitter > 0.0) {
    data = add_jitter(ensemble, estimator.jitter, estimator.jitter_seed);
    estimator.jitter = 0.0;
  }
  LagScanRun run;
  TemporalParams temporal = config.temporal;
  temporal.estimator = estimator;
  run.scan = scan_lags(data, source, destination, config.max_lag, config.lag_criterion, temporal, config.threads);
  run.source = data.channel_names()[data.resolve(source)];
  run.destination = data.channel_names()[data.resolve(destination)];
  require_finite(run.scan.mutual_information, "lag scan");
  prepare_out(config.out);
  write_lagscan_csv(run.scan, config.out / "lagscan.csv");
  json doc = provenance(config, "lagscan");
  doc["resolved"] = {{"source", run.source}, {"destination", run.destination}, {"best_lag", run.scan.best_lag}};
  write_json(doc, config.out / "run.json");
  return run;
}

void write_lagscan_csv(const LagScan& scan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "lag,mi,best\n";
  out.precision(17);
  for (std::size_t lag = 0; lag < scan.mutual_information.size(); ++lag) {
    out << lag << ',' << scan.mutual_information[lag] << ','
        << (static_cast<int>(lag) == scan.best_lag ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace ensinfo
