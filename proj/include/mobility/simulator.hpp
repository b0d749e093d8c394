#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mobility/records.hpp"
#include "mobility/rng.hpp"
#include "mobility/types.hpp"

namespace mobility::sim {

struct SimConfig {
  ModelParams params;
  ClassShares fathers;
  std::size_t population = 0;
  std::uint64_t seed = 0;
  /// Agents are sharded across this many threads; 0 means hardware
  /// concurrency. Counts do not depend on it.
  unsigned threads = 1;
};

/// Endowment support bounds, the part of ModelParams that primitives do not fix.
struct Supports {
  double theta_max = 1.0;
  double theta_min = 0.0;
  double theta_M_min = 0.0;
  double theta_M_max = 1.0;
};

/// lambda_M and lambda_U from thresholds_from_primitives, supports as given.
ModelParams params_from_primitives(const Primitives& primitives, const Supports& supports);

struct Agent {
  OccClass father_class = OccClass::Working;
  double theta = 0.0;
  OccClass chosen_class = OccClass::Working;
  std::optional<double> log_utility;
};

/// Working parents: U(0, theta_max); Middle: U(theta_M_min, theta_M_max);
/// Upper: U(theta_min, 1).
double draw_theta(OccClass father, const ModelParams& params, Rng& rng);

/// theta < lambda_M -> Working; lambda_M <= theta < lambda_U -> Middle;
/// otherwise Upper. A tie goes to the higher class.
OccClass choose_class(double theta, double lambda_M, double lambda_U);

/// Largest-remainder split of `population` by the shares; ties go to the
/// lower class index.
std::array<std::size_t, kClassCount> allocate_fathers(const ClassShares& fathers, std::size_t population);

/// Every agent: fathers allocated in class order (Working first), agent i
/// drawing from sub-stream i of the seed. Parameters need well-formed
/// supports only; the model assumptions are not required for sampling.
std::vector<Agent> simulate_agents(const SimConfig& cfg);

/// Tallies (father, chosen) over the same agents as simulate_agents without
/// materializing them. Deterministic given the seed.
TransitionCounts simulate_cohort(const SimConfig& cfg);

struct IncomeLabels {
  int wave_year = 0;
  int birth_year = 0;
};

/// log income = V + eps with V = mu_W (Working), 2 theta mu_M (Middle) or
/// 2 theta mu_U (Upper) and eps ~ N(0, sigma2 of the chosen class). Agent i
/// draws from sub-stream i of `seed`. Zero variances are allowed here.
std::vector<IncomeRecord> simulate_incomes(const Primitives& primitives, std::span<Agent> agents,
                                           const IncomeLabels& labels, std::uint64_t seed);

}  // namespace mobility::sim
