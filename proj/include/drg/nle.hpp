#pragma once

#include <functional>
#include <vector>

namespace drg {

// Posterior summary of a Bernoulli arm: mean p and pseudo-count n.
struct PosteriorState {
  double p = 0.5;  // posterior mean, in [0,1]
  double n = 1.0;  // pseudo-count, > 0
  void validate() const;  // throws std::domain_error
};

// Ambiguity model: a central Beta credible band of mass k around the median.
struct CredibleModel {
  double k = 0.5;   // band mass, 0 <= k < 1
  double n0 = 1.0;  // prior pseudo-count, > 0
  void validate() const;
};

struct ThetaInterval {
  double lo = 0.0;
  double hi = 1.0;  // invariant: 0 <= lo <= hi <= 1
};

/** Central credible interval for the success rate.
 *
 * Quantiles of Beta(p*n, (1-p)*n) at 0.5 -+ k/2. When either shape collapses
 * (p*n <= 1e-12 or (1-p)*n <= 1e-12) the Beta mass sits on the boundary and
 * the interval degenerates to {0} or {1} respectively.
 */
ThetaInterval credible_set(const PosteriorState& s, const CredibleModel& m);

// sup over theta in [t.lo, t.hi] of theta*f1 + (1-theta)*f0. The objective is
// affine in theta, so the supremum is attained at an endpoint.
inline double dr_one_step(double f0, double f1, const ThetaInterval& t) {
  const double vlo = t.lo * f1 + (1.0 - t.lo) * f0;
  const double vhi = t.hi * f1 + (1.0 - t.hi) * f0;
  return vlo > vhi ? vlo : vhi;
}

// Bayes update after one Bernoulli observation: n' = n+1, p' = (p*n + y)/(n+1).
PosteriorState posterior_update(const PosteriorState& s, int outcome);

/** Nested one-step expectations composed backward over a full binary tree.
 *
 * terminal maps outcome paths (0/1 entries, length = depth) to payoffs. Each
 * interior node applies dr_one_step with the credible interval of its own
 * posterior state, which evolves along the path via posterior_update.
 *
 * \param depth number of composed steps, 1 <= depth <= 20 (the tree has 2^depth
 *        leaves; deeper horizons belong to the grid engine)
 */
double compose_expectation(const std::function<double(const std::vector<int>&)>& terminal,
                           const PosteriorState& start, const CredibleModel& model,
                           int depth);

}  // namespace drg
