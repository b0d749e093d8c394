// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mobility/data_io.hpp"
#include "mobility/estimation.hpp"
#include "mobility/model.hpp"
#include "mobility/report.hpp"
#include "mobility/simulator.hpp"
#include "support.hpp"

using namespace mobility;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Outcome published_reproduction() {
  const auto t0 = Clock::now();
  const std::string input = fixture::path("reference_micro.csv");
  const char* argv[] = {"mobility", "estimate", "--input", input.c_str()};
  std::ostringstream out, err;
  const int rc = cli::run(4, argv, out, err);
  const double elapsed = seconds_since(t0);
  if (rc != 0) return {false, "estimate exited " + std::to_string(rc) + ": " + err.str()};

  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto d = estimation::decompose(fixture::counts(k));
    worst = std::max(worst, fixture::max_abs_diff(d.P.entries(), fixture::kPublishedP[k]));
    worst = std::max(worst, fixture::max_abs_diff(d.R.entries(), fixture::kPublishedR[k]));
    worst = std::max(worst, fixture::max_abs_diff(d.Q.entries(), fixture::kPublishedQ[k]));
  }
  return {worst <= 0.03 && elapsed < 1.0,
          "max element gap " + fmt("%.4f", worst) + " (<= 0.03), estimate runtime " + fmt("%.3f s", elapsed)};
}

Outcome table5_indexes() {
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto e = estimation::estimate_all(estimation::decompose(fixture::counts(k)));
    const auto& pub = fixture::kPublishedIndexes[k];
    worst = std::max({worst, std::abs(e.indexes.i_obs - pub[0]), std::abs(e.indexes.i_os - pub[1]),
                      std::abs(e.indexes.i_true - pub[2])});
  }
  return {worst <= 0.02, "max gap " + fmt("%.4f", worst) + " (<= 0.02)"};
}

Outcome table7_parameters() {
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    // Published rows are rounded and may sum to 0.99; renormalize them.
    const auto q = TransitionMatrix::normalized(fixture::kPublishedQ[k], 0.02);
    const auto id = model::identify_params(q);
    const auto want = fixture::published_params(k);
    const auto& p = id.params;
    worst = std::max({worst, std::abs(p.lambda_M - want.lambda_M), std::abs(p.lambda_U - want.lambda_U),
                      std::abs(p.theta_max - want.theta_max), std::abs(p.theta_min - want.theta_min),
                      std::abs(p.theta_M_min - want.theta_M_min), std::abs(p.theta_M_max - want.theta_M_max)});
    const double i_true = 1.0 - q.trace() / 3.0;
    const double i_opp = model::i_opp_from_params(p);
    worst = std::max({worst, std::abs(i_opp - fixture::kPublishedOppLoi[k][0]),
                      std::abs(i_opp - i_true - fixture::kPublishedOppLoi[k][1])});
  }
  return {worst <= 0.02, "18 parameters and 6 indexes, max gap " + fmt("%.4f", worst) + " (<= 0.02)"};
}

Outcome identification_round_trip() {
  Rng rng(42, 4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = fixture::random_valid_params(rng);
    const auto back = model::identify_params(model::build_true_matrix(p)).params;
    worst = std::max({worst, std::abs(back.lambda_M - p.lambda_M), std::abs(back.lambda_U - p.lambda_U),
                      std::abs(back.theta_max - p.theta_max), std::abs(back.theta_min - p.theta_min),
                      std::abs(back.theta_M_min - p.theta_M_min), std::abs(back.theta_M_max - p.theta_M_max)});
  }
  return {worst <= 1e-12, "1000 random parameter sets, max error " + fmt("%.2e", worst) + " (<= 1e-12)"};
}

Outcome index_identities() {
  double worst_pipeline = 0.0;
  std::size_t checked = 0;
  auto check = [&](const TransitionCounts& counts) {
    const auto e = estimation::estimate_all(estimation::decompose(counts));
    worst_pipeline = std::max({worst_pipeline, std::abs(e.indexes.i_obs - e.indexes.i_true * e.indexes.i_os),
                               std::abs(e.indexes.i_loi - (e.indexes.i_opp - e.indexes.i_true))});
    ++checked;
  };
  for (std::size_t k = 0; k < 3; ++k) check(fixture::counts(k));
  Rng rng(42, 5);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = fixture::random_valid_params(rng);
    const auto f = ClassShares::from_weights({rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.1, 1.0)});
    try {
      check(sim::simulate_cohort({p, f, 5000, s, 1}));
    } catch (const Error&) {
      // Degenerate draws are covered by the unit suites.
    }
  }

  double worst_closed = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = fixture::random_valid_params(rng);
    worst_closed = std::max(worst_closed, std::abs(model::i_true_from_params(p) -
                                                   (1.0 - model::build_true_matrix(p).trace() / 3.0)));
  }
  return {worst_pipeline <= 1e-9 && worst_closed <= 1e-12 && checked >= 150,
          std::to_string(checked) + " pipeline outputs, identity error " + fmt("%.2e", worst_pipeline) +
              " (<= 1e-9); closed form error " + fmt("%.2e", worst_closed) + " (<= 1e-12)"};
}

Outcome lp_optimality() {
  Rng rng(42, 6);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto f = ClassShares::from_weights({rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)});
    const auto c = ClassShares::from_weights({rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)});
    const auto oracle = fixture::max_trace_oracle(f.values(), c.values());
    if (!oracle) return {false, "oracle found no feasible R"};
    worst = std::max(worst, std::abs(estimation::solve_R(f, c).trace() - *oracle));
  }
  // Published oldest-cohort shares; the father shares sum to 1.01 as printed,
  // so the middle share is taken as 0.43.
  const double trace = estimation::solve_R(ClassShares({0.51, 0.43, 0.06}), ClassShares({0.35, 0.49, 0.16})).trace();
  return {worst <= 1e-9 && std::abs(trace - 2.686) <= 1e-3,
          "100 share pairs, max trace gap " + fmt("%.2e", worst) + " (<= 1e-9); oldest-cohort trace " +
              fmt("%.4f", trace) + " (2.686 +- 1e-3)"};
}

Outcome monte_carlo_convergence() {
  const auto params = fixture::published_params(0);
  const auto fathers = ClassShares::from_weights({1894, 1639, 212});
  const auto t0 = Clock::now();
  const auto counts = sim::simulate_cohort({params, fathers, 1'000'000, cli::kDefaultSeed, 1});
  const double elapsed = seconds_since(t0);
  const double gap = fixture::max_abs_diff(estimation::estimate_P(counts).entries(),
                                           model::build_true_matrix(params).entries());
  return {gap <= 0.005 && elapsed < 5.0,
          "n = 10^6, max |P - Q| " + fmt("%.5f", gap) + " (<= 0.005), runtime " + fmt("%.3f s", elapsed)};
}

Outcome bootstrap_calibration() {
  const CohortSpec cohort{"I", 1940, 1951};
  const auto records = io::expand_counts(fixture::counts(0), cohort);
  const auto t0 = Clock::now();
  const auto b = estimation::bootstrap(records, cohort, {1000, cli::kDefaultSeed, false, 1});
  const double elapsed = seconds_since(t0);
  const double se_obs = b.se.indexes.i_obs;
  const double se_lm = b.se.params.lambda_M;
  const bool ok = std::abs(se_obs / 0.012 - 1.0) <= 0.5 && std::abs(se_lm / 0.027 - 1.0) <= 0.5 && elapsed < 10.0 &&
                  records.size() == 3745;
  return {ok, "n = " + std::to_string(records.size()) + ", B = 1000: se(I_OBS) " + fmt("%.4f", se_obs) +
                  " vs 0.012, se(lambda_M) " + fmt("%.4f", se_lm) + " vs 0.027 (+-50%), runtime " +
                  fmt("%.3f s", elapsed)};
}

Outcome premia_formula() {
  const double v = estimation::premium_interpretation(1.055, 1000.0);
  const auto panel = fixture::income_panel(20000, cli::kDefaultSeed);
  const auto r = estimation::income_premia(panel, {"I", 1940, 1951});
  const fixture::PanelTarget t;
  const double gap = std::max({std::abs(r.mean_ratio_MW - t.mean_ratio_MW), std::abs(r.mean_ratio_UM - t.mean_ratio_UM),
                               std::abs(r.var_ratio_MW - t.var_ratio_MW), std::abs(r.var_ratio_UM - t.var_ratio_UM)});
  return {std::abs(v - 1462.18) <= 0.01 && gap <= 0.01,
          "1000^1.055 = " + fmt("%.4f", v) + " (1462.18 +- 0.01); panel ratios (" + fmt("%.4f", r.mean_ratio_MW) +
              ", " + fmt("%.4f", r.mean_ratio_UM) + ", " + fmt("%.4f", r.var_ratio_MW) + ", " +
              fmt("%.4f", r.var_ratio_UM) + "), max gap " + fmt("%.4f", gap) + " (<= 0.01)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 published P, R, Q reproduction", published_reproduction},
      {"2 published mobility indexes", table5_indexes},
      {"3 published parameters, I_OPP, I_LOI", table7_parameters},
      {"4 identification round trip", identification_round_trip},
      {"5 index identities", index_identities},
      {"6 LP optimality", lp_optimality},
      {"7 Monte-Carlo convergence", monte_carlo_convergence},
      {"8 bootstrap calibration", bootstrap_calibration},
      {"9 premia formula and panel", premia_formula},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
