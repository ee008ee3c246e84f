#include "ensinfo/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ensinfo/error.hpp"
#include "ensinfo/rng.hpp"

namespace ensinfo {

void check(const CoupledARConfig& config) {
  if (config.length == 0 || config.trials == 0) throw Error(ErrorKind::config, "length and trials must be positive");
  if (config.delay_yx >= config.length || config.delay_zy >= config.length) {
    throw Error(ErrorKind::config, "coupling delays must be shorter than the series");
  }
  if (config.burn_in < std::max(config.delay_yx, config.delay_zy)) {
    throw Error(ErrorKind::config, "burn-in must cover the longest coupling delay");
  }
  if (!(config.noise_std > 0.0) || !std::isfinite(config.noise_std)) {
    throw Error(ErrorKind::config, "noise standard deviation must be positive");
  }
}

std::pair<double, double> coupling_profiles(std::int64_t n) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(n) / 500.0;
  const double yx = (n >= 250 && n < 750) ? std::sin(phase) : 0.0;
  const double zy = (n >= 750 && n < 1250) ? std::cos(phase) : 0.0;
  return {yx, zy};
}

TrialEnsemble generate_coupled_ar(const CoupledARConfig& config) {
  check(config);
  const std::size_t total = config.burn_in + config.length;
  const auto burn = static_cast<std::int64_t>(config.burn_in);
  std::vector<double> samples(config.trials * config.length * 3);
  std::vector<double> x(total), y(total), z(total);
  for (std::size_t r = 0; r < config.trials; ++r) {
    Rng rx(derive_seed(config.seed, {r, 0}));
    Rng ry(derive_seed(config.seed, {r, 1}));
    Rng rz(derive_seed(config.seed, {r, 2}));
    std::normal_distribution<double> eta(0.0, config.noise_std);
    std::normal_distribution<double> eta_y(0.0, config.noise_std);
    std::normal_distribution<double> eta_z(0.0, config.noise_std);
    for (std::size_t i = 0; i < total; ++i) {
      const std::int64_t n = static_cast<std::int64_t>(i) - burn;  // burn-in has n < 0, kappa = 0
      const auto [k_yx, k_zy] = config.coupled ? coupling_profiles(n) : std::pair{0.0, 0.0};
      const double x_prev = i > 0 ? x[i - 1] : 0.0;
      const double y_prev = i > 0 ? y[i - 1] : 0.0;
      const double z_prev = i > 0 ? z[i - 1] : 0.0;
      x[i] = config.ar[0] * x_prev + eta(rx);
      const double drive_y = (k_yx != 0.0 && i >= config.delay_yx) ? k_yx * std::sin(x[i - config.delay_yx]) : 0.0;
      y[i] = config.ar[1] * y_prev + drive_y + eta_y(ry);
      const double drive_z = (k_zy != 0.0 && i >= config.delay_zy) ? k_zy * std::sin(y[i - config.delay_zy]) : 0.0;
      z[i] = config.ar[2] * z_prev + drive_z + eta_z(rz);
    }
    for (std::size_t n = 0; n < config.length; ++n) {
      double* out = samples.data() + (r * config.length + n) * 3;
      out[0] = x[config.burn_in + n];
      out[1] = y[config.burn_in + n];
      out[2] = z[config.burn_in + n];
    }
  }
  return TrialEnsemble(config.trials, config.length, 3, std::move(samples), {"x", "y", "z"});
}

nlohmann::json to_json(const CoupledARConfig& config) {
  return {{"length", config.length},     {"trials", config.trials},       {"ar", config.ar},
          {"delay_yx", config.delay_yx}, {"delay_zy", config.delay_zy},   {"noise_std", config.noise_std},
          {"burn_in", config.burn_in},   {"coupled", config.coupled},     {"seed", config.seed}};
}

CoupledARConfig coupled_ar_from_json(const nlohmann::json& doc) {
  CoupledARConfig config;
  try {
    config.length = doc.value("length", config.length);
    config.trials = doc.value("trials", config.trials);
    config.ar = doc.value("ar", config.ar);
    config.delay_yx = doc.value("delay_yx", config.delay_yx);
    config.delay_zy = doc.value("delay_zy", config.delay_zy);
    config.noise_std = doc.value("noise_std", config.noise_std);
    config.burn_in = doc.value("burn_in", config.burn_in);
    config.coupled = doc.value("coupled", config.coupled);
    config.seed = doc.value("seed", config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("generator config: ") + e.what());
  }
  check(config);
  return config;
}

}  // namespace ensinfo
