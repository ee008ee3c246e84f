#include "ensinfo/combination.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "ensinfo/error.hpp"

namespace ensinfo {

ValidationReport validate(const CombinationSpec& spec) {
  ValidationReport report;
  if (spec.m == 0) report.problems.push_back("joint dimension m must be at least 1");
  if (spec.marginals.empty()) report.problems.push_back("no marginals");
  if (spec.marginals.size() != spec.signs.size()) {
    report.problems.push_back("marginal count " + std::to_string(spec.marginals.size()) +
                              " differs from sign count " + std::to_string(spec.signs.size()));
    return report;
  }
  std::vector<int> coverage(spec.m, 0);
  for (std::size_t i = 0; i < spec.marginals.size(); ++i) {
    const int s = spec.signs[i];
    if (s != 1 && s != -1) report.problems.push_back("sign " + std::to_string(i) + " is not +1 or -1");
    const auto& marginal = spec.marginals[i];
    if (marginal.empty()) report.problems.push_back("marginal " + std::to_string(i) + " is empty");
    std::set<std::size_t> seen;
    for (std::size_t j : marginal) {
      if (j >= spec.m) {
        report.problems.push_back("marginal " + std::to_string(i) + " references coordinate " +
                                  std::to_string(j) + " >= m");
        continue;
      }
      if (!seen.insert(j).second) {
        report.problems.push_back("marginal " + std::to_string(i) + " repeats coordinate " + std::to_string(j));
        continue;
      }
      coverage[j] += s;
    }
  }
  for (std::size_t j = 0; j < spec.m; ++j) {
    if (coverage[j] != 1) report.coverage.push_back({j, coverage[j]});
  }
  return report;
}

void require_valid(const CombinationSpec& spec) {
  const auto report = validate(spec);
  if (report.ok()) return;
  std::ostringstream msg;
  msg << "invalid entropy combination";
  for (const auto& p : report.problems) msg << "; " << p;
  for (const auto& v : report.coverage) msg << "; coordinate " << v.coordinate << " has signed coverage " << v.coverage;
  throw Error(ErrorKind::invalid_spec, msg.str());
}

nlohmann::json to_json(const CombinationSpec& spec) {
  return {{"m", spec.m}, {"marginals", spec.marginals}, {"signs", spec.signs}};
}

CombinationSpec combination_from_json(const nlohmann::json& doc) {
  try {
    CombinationSpec spec;
    spec.m = doc.at("m").get<std::size_t>();
    spec.marginals = doc.at("marginals").get<std::vector<std::vector<std::size_t>>>();
    spec.signs = doc.at("signs").get<std::vector<int>>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("combination spec: ") + e.what());
  }
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::mi: return "mi";
    case MeasureKind::te: return "te";
    case MeasureKind::pmi: return "pmi";
    case MeasureKind::pte: return "pte";
  }
  return "?";
}

MeasureKind parse_measure_kind(const std::string& text) {
  if (text == "mi") return MeasureKind::mi;
  if (text == "te") return MeasureKind::te;
  if (text == "pmi") return MeasureKind::pmi;
  if (text == "pte") return MeasureKind::pte;
  throw Error(ErrorKind::config, "unknown measure '" + text + "' (expected mi, te, pmi or pte)");
}

namespace {

std::vector<std::size_t> range_of(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

std::vector<std::size_t> concat(std::initializer_list<std::vector<std::size_t>> parts) {
  std::vector<std::size_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

Measure build_measure(const MeasureRoles& roles, const TrialEnsemble& ensemble) {
  const bool conditioned = roles.kind == MeasureKind::pmi || roles.kind == MeasureKind::pte;
  const bool directed = roles.kind == MeasureKind::te || roles.kind == MeasureKind::pte;
  if (conditioned && !roles.conditioner) {
    throw Error(ErrorKind::invalid_spec, to_string(roles.kind) + " needs a conditioner channel");
  }
  if (!conditioned && roles.conditioner) {
    throw Error(ErrorKind::invalid_spec, to_string(roles.kind) + " takes no conditioner channel");
  }
  if (roles.target_dim < 1 || roles.source_dim < 1 || (conditioned && roles.conditioner_dim < 1) ||
      roles.delay < 1) {
    throw Error(ErrorKind::invalid_spec, "embedding dims and delay must be at least 1");
  }

  Measure out;
  out.target_channel = ensemble.resolve(roles.target);
  out.source_channel = ensemble.resolve(roles.source);
  if (conditioned) out.conditioner_channel = ensemble.resolve(*roles.conditioner);
  if (out.target_channel == out.source_channel ||
      (out.conditioner_channel &&
       (*out.conditioner_channel == out.target_channel || *out.conditioner_channel == out.source_channel))) {
    throw Error(ErrorKind::invalid_spec, "measure roles must use distinct channels");
  }

  const auto dx = static_cast<std::size_t>(roles.target_dim);
  const auto dy = static_cast<std::size_t>(roles.source_dim);
  const auto dz = conditioned ? static_cast<std::size_t>(roles.conditioner_dim) : 0;

  std::size_t at = 0;
  std::vector<std::size_t> w, x, z, y;
  if (directed) {
    out.embedding.push_back({out.target_channel, 1, roles.delay, 1});
    w = range_of(at, 1);
    at += 1;
  }
  out.embedding.push_back({out.target_channel, roles.target_dim, roles.delay, 0});
  x = range_of(at, dx);
  at += dx;
  if (conditioned) {
    out.embedding.push_back({*out.conditioner_channel, roles.conditioner_dim, roles.delay, 0});
    z = range_of(at, dz);
    at += dz;
  }
  out.embedding.push_back({out.source_channel, roles.source_dim, roles.delay, 0});
  y = range_of(at, dy);
  at += dy;

  out.spec.m = at;
  switch (roles.kind) {
    case MeasureKind::mi:  // -H_XY + H_X + H_Y
      out.spec.marginals = {x, y};
      out.spec.signs = {1, 1};
      break;
    case MeasureKind::te:  // -H_WXY + H_WX + H_XY - H_X
      out.spec.marginals = {concat({w, x}), concat({x, y}), x};
      out.spec.signs = {1, 1, -1};
      break;
    case MeasureKind::pmi:  // -H_XZY + H_XZ + H_ZY - H_Z
      out.spec.marginals = {concat({x, z}), concat({z, y}), z};
      out.spec.signs = {1, 1, -1};
      break;
    case MeasureKind::pte:  // -H_WXZY + H_WXZ + H_XZY - H_XZ
      out.spec.marginals = {concat({w, x, z}), concat({x, z, y}), concat({x, z})};
      out.spec.signs = {1, 1, -1};
      break;
  }
  require_valid(out.spec);
  return out;
}

}  // namespace ensinfo
