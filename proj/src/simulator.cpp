#include "mobility/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "mobility/model.hpp"

namespace mobility::sim {

ModelParams params_from_primitives(const Primitives& primitives, const Supports& supports) {
  const Thresholds t = model::thresholds_from_primitives(primitives);
  return {t.lambda_M, t.lambda_U, supports.theta_max, supports.theta_min, supports.theta_M_min, supports.theta_M_max};
}

double draw_theta(OccClass father, const ModelParams& p, Rng& rng) {
  switch (father) {
    case OccClass::Working: return rng.uniform(0.0, p.theta_max);
    case OccClass::Middle: return rng.uniform(p.theta_M_min, p.theta_M_max);
    case OccClass::Upper: return rng.uniform(p.theta_min, 1.0);
  }
  return 0.0;
}

OccClass choose_class(double theta, double lambda_M, double lambda_U) {
  if (theta < lambda_M) return OccClass::Working;
  if (theta < lambda_U) return OccClass::Middle;
  return OccClass::Upper;
}

std::array<std::size_t, kClassCount> allocate_fathers(const ClassShares& fathers, std::size_t population) {
  std::array<std::size_t, kClassCount> out{};
  std::array<double, kClassCount> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) {
    const double exact = fathers[i] * static_cast<double>(population);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - std::floor(exact);
    assigned += out[i];
  }
  std::array<std::size_t, kClassCount> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < population; k = (k + 1) % kClassCount, ++assigned) ++out[order[k]];
  return out;
}

namespace {

// Only what the draws need: ordered thresholds and nonempty supports inside
// [0,1]. The model assumptions matter for the closed-form Q, not for sampling.
void check_config(const SimConfig& cfg) {
  if (cfg.population < 1) throw Error(ErrorKind::usage, "population must be at least 1");
  const auto& p = cfg.params;
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(in_unit(p.lambda_M) && in_unit(p.lambda_U) && p.lambda_M <= p.lambda_U))
    throw Error(ErrorKind::invalid_params, "violated: 0 <= lambda_M <= lambda_U <= 1");
  if (!(in_unit(p.theta_max) && p.theta_max > 0.0))
    throw Error(ErrorKind::invalid_params, "violated: 0 < theta_max <= 1");
  if (!(in_unit(p.theta_min) && p.theta_min < 1.0))
    throw Error(ErrorKind::invalid_params, "violated: 0 <= theta_min < 1");
  if (!(in_unit(p.theta_M_min) && in_unit(p.theta_M_max) && p.theta_M_min < p.theta_M_max))
    throw Error(ErrorKind::invalid_params, "violated: 0 <= theta_M_min < theta_M_max <= 1");
}

OccClass father_of(std::size_t agent, const std::array<std::size_t, kClassCount>& alloc) {
  if (agent < alloc[0]) return OccClass::Working;
  if (agent < alloc[0] + alloc[1]) return OccClass::Middle;
  return OccClass::Upper;
}

Agent make_agent(std::size_t i, const SimConfig& cfg, const std::array<std::size_t, kClassCount>& alloc) {
  Rng rng(cfg.seed, i);
  Agent a;
  a.father_class = father_of(i, alloc);
  a.theta = draw_theta(a.father_class, cfg.params, rng);
  a.chosen_class = choose_class(a.theta, cfg.params.lambda_M, cfg.params.lambda_U);
  return a;
}

unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::clamp<std::size_t>(work / 4096, 1, t));
}

}  // namespace

std::vector<Agent> simulate_agents(const SimConfig& cfg) {
  check_config(cfg);
  const auto alloc = allocate_fathers(cfg.fathers, cfg.population);
  std::vector<Agent> agents(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) agents[i] = make_agent(i, cfg, alloc);
  return agents;
}

TransitionCounts simulate_cohort(const SimConfig& cfg) {
  check_config(cfg);
  const auto alloc = allocate_fathers(cfg.fathers, cfg.population);
  const unsigned threads = resolve_threads(cfg.threads, cfg.population);

  // Integer tallies per shard; summing integers is order-independent.
  using Tally = std::array<std::array<std::uint64_t, kClassCount>, kClassCount>;
  std::vector<Tally> shards(threads, Tally{});
  auto run = [&](unsigned shard) {
    const std::size_t begin = cfg.population * shard / threads;
    const std::size_t end = cfg.population * (shard + 1) / threads;
    for (std::size_t i = begin; i < end; ++i) {
      const Agent a = make_agent(i, cfg, alloc);
      ++shards[shard][index_of(a.father_class)][index_of(a.chosen_class)];
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(run, s);
  }

  Matrix3 counts{};
  for (const auto& t : shards)
    for (std::size_t i = 0; i < kClassCount; ++i)
      for (std::size_t j = 0; j < kClassCount; ++j) counts[i][j] += static_cast<double>(t[i][j]);
  return TransitionCounts(counts);
}

std::vector<IncomeRecord> simulate_incomes(const Primitives& p, std::span<Agent> agents, const IncomeLabels& labels,
                                           std::uint64_t seed) {
  if (p.sigma2_W < 0.0 || p.sigma2_M < 0.0 || p.sigma2_U < 0.0)
    throw Error(ErrorKind::invalid_primitives, "utility variances must be nonnegative");
  std::vector<IncomeRecord> out;
  out.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    Agent& a = agents[i];
    double systematic = 0.0;
    double variance = 0.0;
    switch (a.chosen_class) {
      case OccClass::Working: systematic = p.mu_W; variance = p.sigma2_W; break;
      case OccClass::Middle: systematic = 2.0 * a.theta * p.mu_M; variance = p.sigma2_M; break;
      case OccClass::Upper: systematic = 2.0 * a.theta * p.mu_U; variance = p.sigma2_U; break;
    }
    double log_u = systematic;
    if (variance > 0.0) {
      Rng rng(seed, i);
      log_u += std::sqrt(variance) * rng.normal();
    }
    a.log_utility = log_u;
    out.push_back({labels.wave_year, labels.birth_year, a.chosen_class, std::exp(log_u)});
  }
  return out;
}

}  // namespace mobility::sim
