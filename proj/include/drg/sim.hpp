#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drg/policies.hpp"
#include "drg/rng.hpp"
#include "drg/surface.hpp"

namespace drg {

enum class GammaParam { Rate, Scale };

struct ScenarioConfig {
  int M = 50;               // arm count
  long long L = 10000;      // policy-driven plays per episode
  int warmup = 10;          // forced trials per arm before the policy runs
  double gamma_shape = 1.0;
  double gamma_second = 0.01;  // rate or scale of the hyperprior, per flag
  GammaParam gamma_param = GammaParam::Rate;
  std::uint64_t seed = 0;
  double p0 = 0.5;  // prior mean before any observation
  double n0 = 1.0;  // prior pseudo-count

  void validate() const;
};

struct Scenario {
  std::vector<double> theta;  // true per-arm loss probabilities
  double theta_star = 0.0;    // min over theta
  double a = 0.0, b = 0.0;    // realized hyperparameters, kept for diagnostics
};

// Final episode tallies. R charges the gap in true means for every
// policy-driven play; n_subopt counts plays whose true mean is not minimal.
struct RegretTrace {
  double R = 0.0;
  long long n_subopt = 0;
};

// Optional per-step record: cumulative tallies after each policy play.
struct StepRecord {
  long long step = 0;  // 1-based
  int arm = 0;
  double R = 0.0;
  long long n_subopt = 0;
};

// Two hyperparameters from the Gamma hyperprior, then one Beta(a,b) draw per
// arm; theta_star is their minimum.
template <typename G>
Scenario draw_scenario(const ScenarioConfig& cfg, G& g) {
  cfg.validate();
  const double factor =
      cfg.gamma_param == GammaParam::Rate ? 1.0 / cfg.gamma_second : cfg.gamma_second;
  Scenario sc;
  sc.a = gamma_sample(g, cfg.gamma_shape) * factor;
  sc.b = gamma_sample(g, cfg.gamma_shape) * factor;
  sc.theta.resize(cfg.M);
  for (double& th : sc.theta) th = beta_sample(g, sc.a, sc.b);
  sc.theta_star = sc.theta[0];
  for (double th : sc.theta)
    if (th < sc.theta_star) sc.theta_star = th;
  return sc;
}

// Fresh arms at the prior.
std::vector<ArmState> init_arms(const ScenarioConfig& cfg);

// `warmup` Bernoulli trials per arm, arm-major order, no regret charged.
// Leaves every posterior at n = n0 + warmup.
void warm_up(std::vector<ArmState>& arms, const Scenario& sc,
             const ScenarioConfig& cfg, RandomStream& g);

/** One episode: warm-up, then L rounds of select-play-update.
 *
 * Outcome draws and selection randomness come from separate streams so that
 * runs pair across policies. If trace is given it receives one record per
 * policy round.
 */
RegretTrace run_episode(const PolicySpec& policy, const Scenario& sc,
                        const ScenarioConfig& cfg, RandomStream& outcome_g,
                        RandomStream& policy_g,
                        std::vector<StepRecord>* trace = nullptr);

struct SummaryRow {
  std::string policy;
  std::string metric;  // "R" or "N_subopt"
  double mean = 0.0;
  double sd = 0.0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  long long n_sims = 0;
  std::uint64_t seed = 0;
};

/** Monte-Carlo batch: n_sims scenarios, each played under every policy.
 *
 * Scenario s and the per-episode streams derive from (seed, s) alone, so all
 * policies face identical scenarios and identical stream seeds; results are
 * deterministic given (config, policies) and independent of execution mode.
 */
std::vector<SummaryRow> run_batch(const std::vector<PolicySpec>& policies,
                                  const ScenarioConfig& cfg, long long n_sims,
                                  ExecMode mode = ExecMode::Parallel);

// Reproduce episode s of run_batch for one policy, bit for bit, optionally
// collecting the per-step trace. Lets callers trace without rerunning the
// whole batch.
RegretTrace replay_episode(const PolicySpec& policy, const ScenarioConfig& cfg,
                           long long s, std::vector<StepRecord>* trace = nullptr);

// CSV rows `policy,metric,mean,sd,q25,q50,q75,n_sims,seed` under a metadata
// header; reals carry 17 significant digits, so reading is bit-exact.
void write_results(const std::vector<SummaryRow>& rows, const ScenarioConfig& cfg,
                   std::ostream& os);
void write_results(const std::vector<SummaryRow>& rows, const ScenarioConfig& cfg,
                   const std::string& path);
std::vector<SummaryRow> read_results(std::istream& is);
std::vector<SummaryRow> read_results(const std::string& path);

}  // namespace drg
