#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "drg/nle.hpp"
#include "drg/rng.hpp"
#include "drg/surface.hpp"

namespace drg {

// One arm as the policies see it: the posterior and how many realized trials
// (warm-up included) produced it. posterior.n = n0 + pulls.
struct ArmState {
  PosteriorState posterior;
  int pulls = 0;
};

struct DrPolicy {
  std::shared_ptr<const IndexSurface> surface;
};
struct GreedyPolicy {};
struct ThompsonPolicy {
  double a0 = 1.0;
  double b0 = 1.0;
};
struct UcbPolicy {
  double lambda = 2.0;
};
using PolicySpec = std::variant<DrPolicy, GreedyPolicy, ThompsonPolicy, UcbPolicy>;

// Outcome of one selection round. chosen attains the minimum of indices;
// tie_count is the number of positions sharing that minimum.
struct Decision {
  int chosen = -1;
  std::vector<double> indices;
  int tie_count = 0;
};

// Myopic index: the posterior mean cost itself.
double index_greedy(const ArmState& arm);

// Optimism bonus subtracted from the mean cost; N_total counts plays of the
// whole system. lambda >= 0; N_total >= 1.
double index_ucb(const ArmState& arm, long long n_total, double lambda);

// Surface lookup at the arm's posterior state. Requires n >= n0 of the
// generating config.
double index_dr(const ArmState& arm, const IndexSurface& surface);

// One posterior draw from Beta(a0 + p*n, b0 + (1-p)*n); lies in (0,1).
template <typename G>
double index_thompson(const ArmState& arm, double a0, double b0, G& g) {
  arm.posterior.validate();
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw std::domain_error("index_thompson: a0 and b0 must be positive");
  const double a = a0 + arm.posterior.p * arm.posterior.n;
  const double b = b0 + (1.0 - arm.posterior.p) * arm.posterior.n;
  return beta_sample(g, a, b);
}

// Pick an arm with the minimal index, uniformly at random among exact ties.
template <typename G>
Decision select_arm(const std::vector<double>& indices, G& g) {
  if (indices.empty()) throw std::domain_error("select_arm: empty index vector");
  for (double v : indices)
    if (!std::isfinite(v)) throw std::domain_error("select_arm: indices must be finite");
  double best = indices[0];
  for (double v : indices)
    if (v < best) best = v;
  int ties = 0;
  for (double v : indices)
    if (v == best) ++ties;
  int pick = static_cast<int>(g.uniform() * ties);
  if (pick >= ties) pick = ties - 1;
  Decision d;
  d.indices = indices;
  d.tie_count = ties;
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == best && pick-- == 0) {
      d.chosen = static_cast<int>(i);
      break;
    }
  }
  return d;
}

// Evaluate every arm under the policy, then select. n_total is consumed by
// the UCB variant only.
template <typename G>
Decision decide(const PolicySpec& policy, const std::vector<ArmState>& arms,
                long long n_total, G& g) {
  std::vector<double> idx(arms.size());
  for (size_t m = 0; m < arms.size(); ++m) {
    if (const auto* dr = std::get_if<DrPolicy>(&policy)) {
      if (!dr->surface) throw std::invalid_argument("decide: missing index surface");
      idx[m] = index_dr(arms[m], *dr->surface);
    } else if (std::holds_alternative<GreedyPolicy>(policy)) {
      idx[m] = index_greedy(arms[m]);
    } else if (const auto* th = std::get_if<ThompsonPolicy>(&policy)) {
      idx[m] = index_thompson(arms[m], th->a0, th->b0, g);
    } else {
      idx[m] = index_ucb(arms[m], n_total, std::get<UcbPolicy>(policy).lambda);
    }
  }
  return select_arm(idx, g);
}

// Stable label for result tables: kind plus its distinguishing parameters.
std::string policy_name(const PolicySpec& policy);

}  // namespace drg
