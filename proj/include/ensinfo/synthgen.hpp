#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>

#include <json.hpp>

#include "ensinfo/ensemble.hpp"

namespace ensinfo {

// Three AR processes with time-varying non-linear coupling X -> Y -> Z:
//   x[n] = a_x x[n-1] + eta_x
//   y[n] = a_y y[n-1] + kappa_yx[n] sin(x[n - delay_yx]) + eta_y
//   z[n] = a_z z[n-1] + kappa_zy[n] sin(y[n - delay_zy]) + eta_z
struct CoupledARConfig {
  std::size_t length = 1500;
  std::size_t trials = 50;
  std::array<double, 3> ar = {0.4, 0.5, 0.5};
  std::size_t delay_yx = 10;
  std::size_t delay_zy = 15;
  double noise_std = 1.0;
  std::size_t burn_in = 100;
  bool coupled = true;  // false forces kappa == 0 everywhere
  std::uint64_t seed = 0;
};

// Throws Error(config) when delays reach the length or exceed the burn-in.
void check(const CoupledARConfig& config);

// (kappa_yx[n], kappa_zy[n]):
//   kappa_yx = sin(2 pi n / 500) for 250 <= n < 750, else 0
//   kappa_zy = cos(2 pi n / 500) for 750 <= n < 1250, else 0
std::pair<double, double> coupling_profiles(std::int64_t n);

// Channels "x", "y", "z"; time 0 is the first sample after the burn-in.
TrialEnsemble generate_coupled_ar(const CoupledARConfig& config);

nlohmann::json to_json(const CoupledARConfig& config);
CoupledARConfig coupled_ar_from_json(const nlohmann::json& doc);

}  // namespace ensinfo
