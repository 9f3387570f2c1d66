#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drg/rng.hpp"

namespace drg {

// Brute-force verification substrate: small filtered binary trees with a
// finite list of one-step outcome probabilities per node ("rectangular"
// ambiguity), exhaustive stopping-rule and allocation-strategy enumeration,
// and direct checks of the optimality statements the production engine
// relies on. Everything here favours transparency over speed; all checks
// are deterministic and own their instance, so callers may run them on
// independent instances concurrently.

// Binary outcome tree of depth D. Node at depth d with path bits q
// (first outcome at the most significant bit) has id (2^d - 1) + q.
// Internal nodes (depth < D) carry the finite set of candidate
// probabilities for the NEXT outcome being 1. Every node of depth >= 1
// carries the cost revealed by the step into it, in [0, 1).
struct FiniteTree {
    int depth = 1;
    double beta = 0.9;
    std::vector<std::vector<double>> theta;  // size (2^D - 1), internal nodes
    std::vector<double> cost;                // size (2^{D+1} - 1), root entry unused

    static int node_id(int d, int path) { return (1 << d) - 1 + path; }
    int internal_count() const { return (1 << depth) - 1; }
    int node_count() const { return (2 << depth) - 1; }
    int leaf_count() const { return 1 << depth; }

    // depth in [1,4], beta in (0,1), theta lists nonempty with values in
    // [0,1], costs in [0,1). Throws std::domain_error otherwise.
    void validate() const;
};

// Uniformly random instance: each internal node gets 1..max_thetas candidate
// probabilities, each depth>=1 node an independent cost in (0,1).
FiniteTree random_tree(int depth, int max_thetas, RandomStream& g);

// Adapted stopping rule on the subtree below some start node: relative
// node (t, q), t in [1, horizon-1], may be labelled "stop"; play always
// halts after `horizon` steps. Labels below a stop are never set, so equal
// rules have equal label vectors.
struct StoppingRule {
    int horizon = 1;
    std::vector<char> stop;  // size (2^horizon - 1); ids (2^t - 1) + q

    // First t in [1, horizon] at which the rule halts along `path`
    // (horizon outcome bits, first step at the most significant bit).
    int stop_time(int path) const;
};

struct CheckReport {
    bool ok = true;
    std::string detail;  // empty when ok, first violation otherwise
};

// Worst-case expectation of a terminal payoff over the rectangular family,
// conditioned on sitting at node (d, path). `payoff` is indexed by the
// 2^{D-d} relative leaf paths below that node.
//
// sup_value: backward recursion, maximising over each node's theta list.
// sup_expectation: additionally recomputes the value by enumerating every
// node-wise choice of theta below the node as an explicit product measure,
// and throws std::logic_error if the two routes disagree beyond 1e-12.
double sup_value(const FiniteTree& tree, const std::vector<double>& payoff, int d, int path);
double sup_expectation(const FiniteTree& tree, const std::vector<double>& payoff, int d, int path);

// All adapted rules for remaining depth D - s, duplicate-free. The count
// obeys f(0) = 1, f(r) = 1 + f(r-1)^2 per subtree node; the first step is
// mandatory, after which the two outcome branches choose independently,
// so |T(s)| = f(D-s-1)^2: 1, 4, 25, 676 for remaining depth 1..4.
std::vector<StoppingRule> enumerate_stopping_times(const FiniteTree& tree, int s);

// Fair per-step compensation at node (d, path): the unique gamma at which
// min over stopping rules of the worst-case discounted compensated cost
// sum_{t<=tau} beta^t (h(d+t) - gamma) crosses zero. Bisected until the
// bracket is below double resolution, so the residual at the returned
// gamma is ~1e-15.
double gittins_oracle(const FiniteTree& tree, int d, int path);

// gittins_oracle at every internal node, indexed by node id.
using NodeIndexMap = std::vector<double>;
NodeIndexMap node_indices(const FiniteTree& tree);

// First step theta >= 1 at which the index path strictly exceeds lambda:
// 0 if lambda >= cap, else min theta with gamma_path[theta] > lambda, else
// the remaining horizon gamma_path.size(). gamma_path[0] is the index at
// the start state s.
int sigma_hitting(const std::vector<double>& gamma_path, int s, double lambda, double cap);

// At every node of depth s: no stopping rule beats compensation at the
// node's own index (worst-case compensated cost >= -1e-8 for all rules),
// and the rule that halts at the first strict index exceedance attains 0
// within 1e-8, i.e. is optimal.
CheckReport check_optimal_stopping(const FiniteTree& tree, int s);

// With Gamma(t) the running maximum of the node indices seen strictly
// before step t, the compensated game is fair: the worst-case value of
// sum beta^t (h - Gamma) from the root is 0 within 1e-8 and every
// conditional tail is <= 1e-8.
CheckReport check_fair_game(const FiniteTree& tree);

// The worst-case measure for the compensated sum also dominates every
// predictable decreasing [0,1]-weighting of it: for Q* the maximising
// product measure, E_{Q*}(sum alpha(t) beta^t (h - Gamma)) >= -epsilon -
// 1e-10 for n_alpha randomised predictable decreasing alpha.
CheckReport check_delay_inequality(const FiniteTree& tree, double epsilon, RandomStream& g,
                                   int n_alpha = 1000);

// Properties of the two-factor product family on independent trees:
// factorisation of nonnegative product payoffs, marginal projection,
// sub-consistency of iterated versus joint worst case, and the strict
// failure of order consistency on the hard-coded two-coin instance
// (iteration orders give 0.5 and 1.0).
CheckReport orthant_checks(const FiniteTree& a, const FiniteTree& b, RandomStream& g);

// Two independent one-step costs H (means {0.4, 0.5}) and G (means
// {0.0, 0.6}): H is better in worst-case mean, yet worse once both are
// compensated by the average (H+G)/2. Verifies 0.5 < 0.6 and 0.25 > 0.1
// exactly, the swapped construction flips both, and degenerate
// single-measure ranges rank consistently.
CheckReport counterexample_compensated_order();

// Adapted allocation strategy over M arms as an outcome-indexed decision
// tree: play n looks at the n observed outcome bits (first play at the
// most significant position) and picks choice[(2^n - 1) + bits]. Along
// every path each arm m is played exactly horizons[m] times.
struct Strategy {
    std::vector<int> horizons;
    std::vector<std::uint8_t> choice;  // size 2^L - 1, L = sum of horizons

    int total() const;
    int arm_at(int n, int hist) const { return choice[(1 << n) - 1 + hist]; }
    // Same choice at every history of each play: a fixed play order.
    bool outcome_independent() const;
};

// Every adapted strategy for the given horizons. Counts follow
// N(c) = sum_m N(c - e_m)^2 over arms with plays left: (1,1) -> 2,
// (2,1) -> 5, (2,2) -> 50, (3,2) -> 3176. Refuses instances with more
// than 8 total plays or more than 200000 strategies.
std::vector<Strategy> enumerate_strategies(const std::vector<int>& horizons);

// Joint outcome panel for a fixed set of arms: every product of node-wise
// extreme measure choices across arms, as a weight row over the joint
// outcome space (arm m contributes 2^{T_m} paths; arm 0 has the smallest
// stride). Built once and shared across strategy evaluations.
struct JointPanel {
    std::vector<int> horizons;
    std::vector<std::size_t> stride;
    std::size_t n_paths = 1;
    std::vector<std::vector<double>> weight;  // [extreme measure][joint path]
};
JointPanel build_joint_panel(const std::vector<FiniteTree>& arms);

// Worst-case compensated value of a strategy: max over the panel's product
// measures of E[sum_n beta^n (h - Gamma)], where the charge Gamma for a
// play of arm m is the running maximum of that arm's node indices along
// its own realised history, including its current state.
double gittins_value(const Strategy& rho, const std::vector<FiniteTree>& arms,
                     const std::vector<NodeIndexMap>& gammas, const JointPanel& panel);
double gittins_value(const Strategy& rho, const std::vector<FiniteTree>& arms,
                     const std::vector<NodeIndexMap>& gammas);

// Predictable compensation schedule for one strategy. charge[v] is the
// discounted prevailing charge beta^{d+1} Gamma for the play decided at
// history node v (depth d); the first payment c1 additionally carries the
// strategy's worst-case compensated value so that the compensated game
// nets to zero: defect = |worst case of (total cost - total compensation)|
// is ~0 by construction.
struct CompensatorLedger {
    double value = 0.0;  // worst-case compensated value of the strategy
    double c1 = 0.0;     // first payment: charge at the root plus value
    std::vector<double> charge;  // per history node, size 2^L - 1
    double defect = 0.0;
};
CompensatorLedger build_compensator(const Strategy& rho, const std::vector<FiniteTree>& arms,
                                    const std::vector<NodeIndexMap>& gammas,
                                    const JointPanel& panel);

// The dynamic lowest-current-index strategy: at every history, play the
// arm with plays remaining whose current node index is smallest, lowest
// arm id on ties.
Strategy lowest_index_strategy(const std::vector<FiniteTree>& arms,
                               const std::vector<NodeIndexMap>& gammas);

// Full optimality sweep over one instance:
//  (i) every enumerated strategy has gittins_value >= -1e-8;
//  (ii) strategies that keep playing an arm exactly until its current
//       index strictly exceeds the run-start index (or the arm is
//       exhausted) have gittins_value <= 1e-8;
//  (iii) the lowest-index strategy's discounted charge prefix sums are
//        minimal path-by-path against every strategy, and its compensator
//        prefix sums likewise.
CheckReport check_sandwich_and_optimality(const std::vector<FiniteTree>& arms);

}  // namespace drg
