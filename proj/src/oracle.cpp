#include "drg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

namespace drg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_node(const FiniteTree& tree, int d, int path) {
    if (d < 0 || d >= tree.depth) throw std::domain_error("node depth out of range");
    if (path < 0 || path >= (1 << d)) throw std::domain_error("node path out of range");
}

// Backward recursion over the subtree below (d, path): each node takes the
// worst (largest) mixture of its children over its theta candidates.
// `payoff` holds one value per relative leaf and is consumed in place.
double sup_value_below(const FiniteTree& tree, int d, int path, std::vector<double> payoff) {
    const int r = tree.depth - d;
    for (int level = r - 1; level >= 0; --level) {
        for (int q = 0; q < (1 << level); ++q) {
            const auto& ths = tree.theta[FiniteTree::node_id(d + level, (path << level) | q)];
            const double v0 = payoff[2 * q];
            const double v1 = payoff[2 * q + 1];
            double best = -kInf;
            for (double th : ths) best = std::max(best, th * v1 + (1.0 - th) * v0);
            payoff[q] = best;
        }
    }
    return payoff[0];
}

// Every node-wise choice of theta below (d, path), materialized as leaf
// probability rows. Row count is the product of the theta list sizes.
std::vector<std::vector<double>> extreme_weights(const FiniteTree& tree, int d, int path) {
    const int r = tree.depth - d;
    std::size_t count = 1;
    for (int level = 0; level < r; ++level) {
        for (int q = 0; q < (1 << level); ++q) {
            count *= tree.theta[FiniteTree::node_id(d + level, (path << level) | q)].size();
            if (count > (std::size_t{1} << 17))
                throw std::length_error("extreme measure enumeration exceeds cap");
        }
    }
    std::function<std::vector<std::vector<double>>(int, int)> gen = [&](int level, int q) {
        std::vector<std::vector<double>> out;
        if (level == r) {
            out.push_back({1.0});
            return out;
        }
        const auto lo = gen(level + 1, 2 * q);
        const auto hi = gen(level + 1, 2 * q + 1);
        const auto& ths = tree.theta[FiniteTree::node_id(d + level, (path << level) | q)];
        out.reserve(ths.size() * lo.size() * hi.size());
        for (double th : ths) {
            for (const auto& a : lo) {
                for (const auto& b : hi) {
                    std::vector<double> row;
                    row.reserve(a.size() + b.size());
                    for (double x : a) row.push_back((1.0 - th) * x);
                    for (double x : b) row.push_back(th * x);
                    out.push_back(std::move(row));
                }
            }
        }
        return out;
    };
    return gen(0, 0);
}

// Worst-case value of the compensated stopped sum  sum_{t<=tau} beta^t (h - gamma)
// for one stopping rule, seen from (d, path).
double rule_value(const FiniteTree& tree, int d, int path, const StoppingRule& rule,
                  double gamma) {
    const int r = tree.depth - d;
    std::vector<double> payoff(std::size_t{1} << r);
    for (int leaf = 0; leaf < (1 << r); ++leaf) {
        const int tstop = rule.stop_time(leaf);
        double acc = 0.0;
        double bt = 1.0;
        for (int t = 1; t <= tstop; ++t) {
            bt *= tree.beta;
            const int id = FiniteTree::node_id(d + t, (path << t) | (leaf >> (r - t)));
            acc += bt * (tree.cost[id] - gamma);
        }
        payoff[leaf] = acc;
    }
    return sup_value_below(tree, d, path, std::move(payoff));
}

double oracle_with_rules(const FiniteTree& tree, int d, int path,
                         const std::vector<StoppingRule>& rules) {
    // min over rules is strictly decreasing in gamma with U(0) >= 0 >= U(1);
    // 80 halvings put the bracket below double resolution
    double lo = 0.0;
    double hi = 1.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double u = kInf;
        for (const auto& rule : rules) u = std::min(u, rule_value(tree, d, path, rule, mid));
        (u > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Discounted compensated increments beta^t (h(t) - Gamma(t)) per full-tree
// leaf and step, with Gamma the running maximum of the node indices seen
// strictly before each step.
std::vector<std::vector<double>> compensated_terms(const FiniteTree& tree,
                                                   const NodeIndexMap& gamma) {
    const int D = tree.depth;
    std::vector<std::vector<double>> term(std::size_t{1} << D,
                                          std::vector<double>(D + 1, 0.0));
    for (int leaf = 0; leaf < (1 << D); ++leaf) {
        double prevail = -kInf;
        double bt = 1.0;
        for (int t = 1; t <= D; ++t) {
            prevail = std::max(prevail, gamma[FiniteTree::node_id(t - 1, leaf >> (D - t + 1))]);
            bt *= tree.beta;
            term[leaf][t] =
                bt * (tree.cost[FiniteTree::node_id(t, leaf >> (D - t))] - prevail);
        }
    }
    return term;
}

std::string describe(const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return std::string(buf);
}

}  // namespace

void FiniteTree::validate() const {
    if (depth < 1 || depth > 4) throw std::domain_error("tree depth must lie in [1,4]");
    if (!std::isfinite(beta) || !(beta > 0.0) || !(beta < 1.0))
        throw std::domain_error("beta must lie in (0,1)");
    if (static_cast<int>(theta.size()) != internal_count())
        throw std::domain_error("theta lists must cover every internal node");
    if (static_cast<int>(cost.size()) != node_count())
        throw std::domain_error("cost entries must cover every node");
    for (const auto& ths : theta) {
        if (ths.empty()) throw std::domain_error("theta lists must be nonempty");
        for (double th : ths)
            if (!(th >= 0.0 && th <= 1.0)) throw std::domain_error("theta must lie in [0,1]");
    }
    for (int id = 1; id < node_count(); ++id)
        if (!(cost[id] >= 0.0 && cost[id] <= 1.0))
            throw std::domain_error("costs must lie in [0,1]");
}

FiniteTree random_tree(int depth, int max_thetas, RandomStream& g) {
    if (depth < 1 || depth > 4) throw std::domain_error("tree depth must lie in [1,4]");
    if (max_thetas < 1) throw std::domain_error("need at least one theta candidate");
    FiniteTree t;
    t.depth = depth;
    t.beta = 0.3 + 0.69 * g.uniform();
    t.theta.resize(t.internal_count());
    for (auto& ths : t.theta) {
        const int n = 1 + std::min(max_thetas - 1, static_cast<int>(g.uniform() * max_thetas));
        ths.resize(n);
        for (double& th : ths) th = g.uniform();
    }
    t.cost.assign(t.node_count(), 0.0);
    for (int id = 1; id < t.node_count(); ++id) t.cost[id] = g.uniform();
    return t;
}

int StoppingRule::stop_time(int path) const {
    for (int t = 1; t < horizon; ++t) {
        const int q = path >> (horizon - t);
        if (stop[(1 << t) - 1 + q]) return t;
    }
    return horizon;
}

double sup_value(const FiniteTree& tree, const std::vector<double>& payoff, int d, int path) {
    tree.validate();
    check_node(tree, d, path);
    if (payoff.size() != std::size_t{1} << (tree.depth - d))
        throw std::invalid_argument("payoff must cover the leaves below the node");
    return sup_value_below(tree, d, path, payoff);
}

double sup_expectation(const FiniteTree& tree, const std::vector<double>& payoff, int d,
                       int path) {
    tree.validate();
    check_node(tree, d, path);
    if (payoff.size() != std::size_t{1} << (tree.depth - d))
        throw std::invalid_argument("payoff must cover the leaves below the node");
    const double a = sup_value_below(tree, d, path, payoff);
    double b = -kInf;
    for (const auto& row : extreme_weights(tree, d, path)) {
        double e = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) e += row[i] * payoff[i];
        b = std::max(b, e);
    }
    if (std::fabs(a - b) > 1e-12)
        throw std::logic_error(
            describe("recursion and enumeration disagree: %.17g vs %.17g", a, b));
    return a;
}

std::vector<StoppingRule> enumerate_stopping_times(const FiniteTree& tree, int s) {
    tree.validate();
    if (s < 0 || s >= tree.depth) throw std::domain_error("start depth must satisfy 0 <= s < depth");
    const int r = tree.depth - s;
    const int labels = (1 << r) - 1;
    // per subtree node: halt here, or defer to both children independently
    std::function<std::vector<std::vector<char>>(int, int)> gen = [&](int t, int q) {
        std::vector<std::vector<char>> out;
        if (t >= r) {
            out.emplace_back(labels, 0);
            return out;
        }
        std::vector<char> halt(labels, 0);
        halt[(1 << t) - 1 + q] = 1;
        out.push_back(std::move(halt));
        const auto lo = gen(t + 1, 2 * q);
        const auto hi = gen(t + 1, 2 * q + 1);
        for (const auto& a : lo) {
            for (const auto& b : hi) {
                std::vector<char> merged(labels, 0);
                for (int i = 0; i < labels; ++i) merged[i] = a[i] | b[i];
                out.push_back(std::move(merged));
            }
        }
        return out;
    };
    // the first step is mandatory, then each outcome branch picks a rule
    std::vector<StoppingRule> rules;
    const auto left = gen(1, 0);
    const auto right = gen(1, 1);
    rules.reserve(left.size() * right.size());
    for (const auto& a : left) {
        for (const auto& b : right) {
            StoppingRule rule;
            rule.horizon = r;
            rule.stop.resize(labels);
            for (int i = 0; i < labels; ++i) rule.stop[i] = a[i] | b[i];
            rules.push_back(std::move(rule));
        }
    }
    return rules;
}

double gittins_oracle(const FiniteTree& tree, int d, int path) {
    tree.validate();
    check_node(tree, d, path);
    return oracle_with_rules(tree, d, path, enumerate_stopping_times(tree, d));
}

NodeIndexMap node_indices(const FiniteTree& tree) {
    tree.validate();
    NodeIndexMap out(tree.internal_count());
    for (int d = 0; d < tree.depth; ++d) {
        const auto rules = enumerate_stopping_times(tree, d);
        for (int q = 0; q < (1 << d); ++q)
            out[FiniteTree::node_id(d, q)] = oracle_with_rules(tree, d, q, rules);
    }
    return out;
}

int sigma_hitting(const std::vector<double>& gamma_path, int s, double lambda, double cap) {
    if (gamma_path.empty()) throw std::domain_error("gamma_path must be nonempty");
    if (s < 0) throw std::domain_error("start stage must be nonnegative");
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
    if (!(cap > 0.0)) throw std::domain_error("cap must be positive");
    if (lambda >= cap) return 0;
    const int horizon = static_cast<int>(gamma_path.size());
    for (int th = 1; th < horizon; ++th)
        if (gamma_path[th] > lambda) return th;
    return horizon;
}

CheckReport check_optimal_stopping(const FiniteTree& tree, int s) {
    tree.validate();
    if (s < 0 || s >= tree.depth) throw std::domain_error("start depth must satisfy 0 <= s < depth");
    const NodeIndexMap gamma = node_indices(tree);
    const auto rules = enumerate_stopping_times(tree, s);
    const int r = tree.depth - s;
    CheckReport rep;
    for (int q = 0; q < (1 << s) && rep.ok; ++q) {
        const double g0 = gamma[FiniteTree::node_id(s, q)];
        double vmin = kInf;
        for (std::size_t i = 0; i < rules.size() && rep.ok; ++i) {
            const double v = rule_value(tree, s, q, rules[i], g0);
            vmin = std::min(vmin, v);
            if (v < -1e-8) {
                rep.ok = false;
                rep.detail = describe("a stopping rule undercuts the node index: value %.17g at node depth %.17g",
                                      v, static_cast<double>(s));
            }
        }
        if (!rep.ok) break;
        // halt at the first strict exceedance of the start index
        StoppingRule sigma;
        sigma.horizon = r;
        sigma.stop.assign((std::size_t{1} << r) - 1, 0);
        for (int t = 1; t <= r - 1; ++t)
            for (int q2 = 0; q2 < (1 << t); ++q2)
                if (gamma[FiniteTree::node_id(s + t, (q << t) | q2)] > g0)
                    sigma.stop[(1 << t) - 1 + q2] = 1;
        const double vs = rule_value(tree, s, q, sigma, g0);
        if (vs > 1e-8) {
            rep.ok = false;
            rep.detail = describe("exceedance rule fails to reach zero: value %.17g at index %.17g", vs, g0);
        } else if (vs > vmin + 1e-8) {
            rep.ok = false;
            rep.detail = describe("exceedance rule misses the minimum: %.17g vs %.17g", vs, vmin);
        }
    }
    return rep;
}

CheckReport check_fair_game(const FiniteTree& tree) {
    tree.validate();
    const NodeIndexMap gamma = node_indices(tree);
    const int D = tree.depth;
    const auto term = compensated_terms(tree, gamma);
    CheckReport rep;
    std::vector<double> payoff(std::size_t{1} << D);
    for (int leaf = 0; leaf < (1 << D); ++leaf) {
        double acc = 0.0;
        for (int t = 1; t <= D; ++t) acc += term[leaf][t];
        payoff[leaf] = acc;
    }
    const double root = sup_value_below(tree, 0, 0, payoff);
    if (std::fabs(root) > 1e-8) {
        rep.ok = false;
        rep.detail = describe("compensated game is not fair at the root: value %.17g (tol %.17g)", root, 1e-8);
        return rep;
    }
    for (int d = 1; d <= D - 1 && rep.ok; ++d) {
        for (int q = 0; q < (1 << d) && rep.ok; ++q) {
            std::vector<double> tail(std::size_t{1} << (D - d));
            for (int rl = 0; rl < (1 << (D - d)); ++rl) {
                const int leaf = (q << (D - d)) | rl;
                double acc = 0.0;
                for (int t = d + 1; t <= D; ++t) acc += term[leaf][t];
                tail[rl] = acc;
            }
            const double tv = sup_value_below(tree, d, q, std::move(tail));
            if (tv > 1e-8) {
                rep.ok = false;
                rep.detail = describe("conditional tail positive: value %.17g at depth %.17g",
                                      tv, static_cast<double>(d));
            }
        }
    }
    return rep;
}

CheckReport check_delay_inequality(const FiniteTree& tree, double epsilon, RandomStream& g,
                                   int n_alpha) {
    tree.validate();
    if (!(epsilon >= 0.0)) throw std::domain_error("epsilon must be nonnegative");
    if (n_alpha < 1) throw std::domain_error("need at least one alpha process");
    const NodeIndexMap gamma = node_indices(tree);
    const int D = tree.depth;
    const auto term = compensated_terms(tree, gamma);
    const auto rows = extreme_weights(tree, 0, 0);
    std::size_t qstar = 0;
    double best = -kInf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double e = 0.0;
        for (int leaf = 0; leaf < (1 << D); ++leaf) {
            double acc = 0.0;
            for (int t = 1; t <= D; ++t) acc += term[leaf][t];
            e += rows[i][leaf] * acc;
        }
        if (e > best) {
            best = e;
            qstar = i;
        }
    }
    const auto& w = rows[qstar];
    CheckReport rep;
    std::vector<double> alpha(tree.internal_count());
    for (int k = 0; k < n_alpha && rep.ok; ++k) {
        // predictable decreasing weights: a root draw, then per-node shrink factors
        alpha[0] = g.uniform();
        for (int d = 1; d < D; ++d)
            for (int q = 0; q < (1 << d); ++q)
                alpha[FiniteTree::node_id(d, q)] =
                    alpha[FiniteTree::node_id(d - 1, q >> 1)] * g.uniform();
        double e = 0.0;
        for (int leaf = 0; leaf < (1 << D); ++leaf) {
            double acc = 0.0;
            for (int t = 1; t <= D; ++t)
                acc += alpha[FiniteTree::node_id(t - 1, leaf >> (D - t + 1))] * term[leaf][t];
            e += w[leaf] * acc;
        }
        if (e < -epsilon - 1e-10) {
            rep.ok = false;
            rep.detail = describe("weighted compensated sum undercuts the bound: %.17g < -%.17g",
                                  e, epsilon + 1e-10);
        }
    }
    return rep;
}

CheckReport orthant_checks(const FiniteTree& a, const FiniteTree& b, RandomStream& g) {
    a.validate();
    b.validate();
    const auto wa = extreme_weights(a, 0, 0);
    const auto wb = extreme_weights(b, 0, 0);
    const int na = a.leaf_count();
    const int nb = b.leaf_count();

    const auto sup_a = [&](const std::vector<double>& f) {
        double best = -kInf;
        for (const auto& row : wa) {
            double e = 0.0;
            for (int i = 0; i < na; ++i) e += row[i] * f[i];
            best = std::max(best, e);
        }
        return best;
    };
    const auto sup_b = [&](const std::vector<double>& f) {
        double best = -kInf;
        for (const auto& row : wb) {
            double e = 0.0;
            for (int i = 0; i < nb; ++i) e += row[i] * f[i];
            best = std::max(best, e);
        }
        return best;
    };
    // outer expectation over the first factor, inner conditional over the second
    const auto iter_outer_a = [&](const std::vector<double>& f) {
        std::vector<double> inner(na);
        for (int ia = 0; ia < na; ++ia) {
            std::vector<double> slice(nb);
            for (int ib = 0; ib < nb; ++ib) slice[ib] = f[static_cast<std::size_t>(ia) * nb + ib];
            inner[ia] = sup_b(slice);
        }
        return sup_a(inner);
    };
    const auto iter_outer_b = [&](const std::vector<double>& f) {
        std::vector<double> inner(nb);
        for (int ib = 0; ib < nb; ++ib) {
            std::vector<double> slice(na);
            for (int ia = 0; ia < na; ++ia) slice[ia] = f[static_cast<std::size_t>(ia) * nb + ib];
            inner[ib] = sup_a(slice);
        }
        return sup_b(inner);
    };
    const auto joint = [&](const std::vector<double>& f) {
        double best = -kInf;
        for (const auto& ra : wa) {
            for (const auto& rb : wb) {
                double e = 0.0;
                for (int ia = 0; ia < na; ++ia)
                    for (int ib = 0; ib < nb; ++ib)
                        e += ra[ia] * rb[ib] * f[static_cast<std::size_t>(ia) * nb + ib];
                best = std::max(best, e);
            }
        }
        return best;
    };

    CheckReport rep;
    std::vector<double> f(static_cast<std::size_t>(na) * nb);
    // nonnegative product payoffs factorize across independent factors
    for (int k = 0; k < 20 && rep.ok; ++k) {
        std::vector<double> fa(na), fb(nb);
        for (double& x : fa) x = g.uniform();
        for (double& x : fb) x = g.uniform();
        for (int ia = 0; ia < na; ++ia)
            for (int ib = 0; ib < nb; ++ib) f[static_cast<std::size_t>(ia) * nb + ib] = fa[ia] * fb[ib];
        const double want = sup_a(fa) * sup_b(fb);
        if (std::fabs(iter_outer_a(f) - want) > 1e-12 || std::fabs(iter_outer_b(f) - want) > 1e-12) {
            rep.ok = false;
            rep.detail = describe("product payoff fails to factorize: %.17g vs %.17g",
                                  iter_outer_a(f), want);
        }
    }
    // payoffs depending on one factor project to that factor's expectation
    for (int k = 0; k < 20 && rep.ok; ++k) {
        std::vector<double> fa(na);
        for (double& x : fa) x = 2.0 * g.uniform() - 1.0;
        for (int ia = 0; ia < na; ++ia)
            for (int ib = 0; ib < nb; ++ib) f[static_cast<std::size_t>(ia) * nb + ib] = fa[ia];
        const double want = sup_a(fa);
        if (std::fabs(iter_outer_a(f) - want) > 1e-12 || std::fabs(iter_outer_b(f) - want) > 1e-12) {
            rep.ok = false;
            rep.detail = describe("marginal projection fails: %.17g vs %.17g", iter_outer_b(f), want);
        }
    }
    // the joint worst case never beats either iterated evaluation
    for (int k = 0; k < 40 && rep.ok; ++k) {
        for (double& x : f) x = 2.0 * g.uniform() - 1.0;
        const double j = joint(f);
        if (j > iter_outer_a(f) + 1e-12 || j > iter_outer_b(f) + 1e-12) {
            rep.ok = false;
            rep.detail = describe("joint worst case exceeds an iterated one: %.17g vs %.17g",
                                  j, std::min(iter_outer_a(f), iter_outer_b(f)));
        }
    }
    if (!rep.ok) return rep;

    // two independent coins, matching-outcome payoff: the iteration order
    // changes the answer, so the product evaluation is only sub-consistent
    FiniteTree full;
    full.depth = 1;
    full.beta = 0.5;
    full.theta = {{0.0, 1.0}};
    full.cost = {0.0, 0.0, 0.0};
    FiniteTree fair = full;
    fair.theta = {{0.5}};
    const auto wfull = extreme_weights(full, 0, 0);
    const auto wfair = extreme_weights(fair, 0, 0);
    const std::vector<double> match = {1.0, 0.0, 0.0, 1.0};  // f(x,y) = 1 iff x == y
    double inner_fair_then_full = -kInf;
    for (const auto& rx : wfull) {
        double e = 0.0;
        for (int ix = 0; ix < 2; ++ix) {
            double inner = -kInf;
            for (const auto& ry : wfair) {
                double s = 0.0;
                for (int iy = 0; iy < 2; ++iy) s += ry[iy] * match[2 * ix + iy];
                inner = std::max(inner, s);
            }
            e += rx[ix] * inner;
        }
        inner_fair_then_full = std::max(inner_fair_then_full, e);
    }
    double inner_full_then_fair = -kInf;
    for (const auto& ry : wfair) {
        double e = 0.0;
        for (int iy = 0; iy < 2; ++iy) {
            double inner = -kInf;
            for (const auto& rx : wfull) {
                double s = 0.0;
                for (int ix = 0; ix < 2; ++ix) s += rx[ix] * match[2 * ix + iy];
                inner = std::max(inner, s);
            }
            e += ry[iy] * inner;
        }
        inner_full_then_fair = std::max(inner_full_then_fair, e);
    }
    if (std::fabs(inner_fair_then_full - 0.5) > 1e-12 ||
        std::fabs(inner_full_then_fair - 1.0) > 1e-12) {
        rep.ok = false;
        rep.detail = describe("order-dependence witness broke: %.17g and %.17g",
                              inner_fair_then_full, inner_full_then_fair);
    }
    return rep;
}

CheckReport counterexample_compensated_order() {
    // two independent one-step costs with worst-case means taken over a
    // finite set of candidate probabilities each
    const auto worst = [](const std::vector<double>& hs, const std::vector<double>& gs,
                          double ch, double cg) {
        // sup over the product family of E[ch*H + cg*G] with E(H)=thH, E(G)=thG
        double best = -kInf;
        for (double th : hs)
            for (double tg : gs) best = std::max(best, ch * th + cg * tg);
        return best;
    };
    const std::vector<double> hset = {0.4, 0.5};
    const std::vector<double> gset = {0.0, 0.6};
    CheckReport rep;
    const double eh = worst(hset, gset, 1.0, 0.0);
    const double eg = worst(hset, gset, 0.0, 1.0);
    const double eh_comp = worst(hset, gset, 0.5, -0.5);   // H - (H+G)/2 = (H-G)/2
    const double eg_comp = worst(hset, gset, -0.5, 0.5);   // G - (H+G)/2 = (G-H)/2
    if (std::fabs(eh - 0.5) > 1e-12 || std::fabs(eg - 0.6) > 1e-12 ||
        std::fabs(eh_comp - 0.25) > 1e-12 || std::fabs(eg_comp - 0.1) > 1e-12) {
        rep.ok = false;
        rep.detail = describe("expected the four reference values, got %.17g and %.17g",
                              eh_comp, eg_comp);
        return rep;
    }
    if (!(eh < eg) || !(eh_comp > eg_comp)) {
        rep.ok = false;
        rep.detail = "compensation failed to reverse the worst-case order";
        return rep;
    }
    // swapping the two ranges flips both comparisons
    const double sh = worst(gset, hset, 1.0, 0.0);
    const double sg = worst(gset, hset, 0.0, 1.0);
    const double sh_comp = worst(gset, hset, 0.5, -0.5);
    const double sg_comp = worst(gset, hset, -0.5, 0.5);
    if (!(sh > sg) || !(sh_comp < sg_comp)) {
        rep.ok = false;
        rep.detail = "swapped construction failed to flip both comparisons";
        return rep;
    }
    // degenerate single-measure ranges rank the same way with or without
    // the shared compensation
    const std::vector<double> ph = {0.45};
    const std::vector<double> pg = {0.3};
    const double dh = worst(ph, pg, 1.0, 0.0);
    const double dg = worst(ph, pg, 0.0, 1.0);
    const double dh_comp = worst(ph, pg, 0.5, -0.5);
    const double dg_comp = worst(ph, pg, -0.5, 0.5);
    if (!((dh > dg) == (dh_comp > dg_comp))) {
        rep.ok = false;
        rep.detail = "degenerate ranges disagreed across compensation";
    }
    return rep;
}

int Strategy::total() const {
    int L = 0;
    for (int T : horizons) L += T;
    return L;
}

bool Strategy::outcome_independent() const {
    const int L = total();
    for (int n = 0; n < L; ++n) {
        const std::uint8_t first = choice[(1 << n) - 1];
        for (int hist = 1; hist < (1 << n); ++hist)
            if (choice[(1 << n) - 1 + hist] != first) return false;
    }
    return true;
}

std::vector<Strategy> enumerate_strategies(const std::vector<int>& horizons) {
    if (horizons.empty()) throw std::domain_error("need at least one arm");
    int L = 0;
    for (int T : horizons) {
        if (T < 0) throw std::domain_error("horizons must be nonnegative");
        L += T;
    }
    if (L < 1) throw std::domain_error("total plays must be positive");
    if (L > 8) throw std::length_error("total plays cap is 8");
    constexpr unsigned long long kMax = 200000;
    // count first; saturate to keep the squaring safe
    std::map<std::vector<int>, unsigned long long> memo;
    std::function<unsigned long long(std::vector<int>&)> cnt =
        [&](std::vector<int>& c) -> unsigned long long {
        bool done = true;
        for (int x : c)
            if (x) done = false;
        if (done) return 1;
        const auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        unsigned long long n = 0;
        for (std::size_t m = 0; m < c.size() && n <= kMax; ++m) {
            if (!c[m]) continue;
            --c[m];
            unsigned long long k = cnt(c);
            ++c[m];
            if (k > kMax) k = kMax + 1;
            n += k * k;
        }
        if (n > kMax) n = kMax + 1;
        memo[c] = n;
        return n;
    };
    std::vector<int> counts = horizons;
    if (cnt(counts) > kMax) throw std::length_error("strategy count exceeds enumeration cap");

    const int nodes = (1 << L) - 1;
    // children of a history node pick independently, so each node's options
    // cross-multiply; entries outside a branch stay zero and the disjoint
    // supports merge by addition
    std::function<std::vector<std::vector<std::uint8_t>>(int, int, std::vector<int>&)> walk =
        [&](int n, int hist, std::vector<int>& left) {
        std::vector<std::vector<std::uint8_t>> out;
        if (n == L) {
            out.emplace_back(nodes, 0);
            return out;
        }
        const int id = (1 << n) - 1 + hist;
        for (std::size_t m = 0; m < left.size(); ++m) {
            if (!left[m]) continue;
            --left[m];
            const auto zero = walk(n + 1, hist << 1, left);
            const auto one = walk(n + 1, (hist << 1) | 1, left);
            ++left[m];
            for (const auto& x : zero) {
                for (const auto& y : one) {
                    std::vector<std::uint8_t> v(nodes, 0);
                    for (int i = 0; i < nodes; ++i) v[i] = static_cast<std::uint8_t>(x[i] + y[i]);
                    v[id] = static_cast<std::uint8_t>(m);
                    out.push_back(std::move(v));
                }
            }
        }
        return out;
    };
    std::vector<Strategy> out;
    for (auto& v : walk(0, 0, counts)) {
        Strategy s;
        s.horizons = horizons;
        s.choice = std::move(v);
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

void check_arm_inputs(const std::vector<FiniteTree>& arms,
                      const std::vector<NodeIndexMap>& gammas) {
    if (arms.empty() || arms.size() > 8) throw std::domain_error("need 1 to 8 arms");
    if (gammas.size() != arms.size()) throw std::invalid_argument("one index map per arm");
    for (std::size_t m = 0; m < arms.size(); ++m) {
        arms[m].validate();
        if (arms[m].beta != arms[0].beta)
            throw std::invalid_argument("arms must share one discount factor");
        if (gammas[m].size() != static_cast<std::size_t>(arms[m].internal_count()))
            throw std::invalid_argument("index map must cover the arm's internal nodes");
    }
}

void check_strategy(const Strategy& rho, const std::vector<FiniteTree>& arms) {
    if (rho.horizons.size() != arms.size())
        throw std::invalid_argument("strategy and arm counts differ");
    int L = 0;
    for (std::size_t m = 0; m < arms.size(); ++m) {
        if (rho.horizons[m] < 1) throw std::domain_error("every arm needs at least one play");
        if (rho.horizons[m] != arms[m].depth)
            throw std::invalid_argument("arm horizon must match its tree depth");
        L += rho.horizons[m];
    }
    if (L > 8) throw std::length_error("total plays cap is 8");
    if (rho.choice.size() != (std::size_t{1} << L) - 1)
        throw std::invalid_argument("choice table must cover every history");
}

// One joint outcome under one strategy: discounted cost and discounted
// prevailing charge per play.
void walk_strategy(const Strategy& rho, const std::vector<FiniteTree>& arms,
                   const std::vector<NodeIndexMap>& gammas, const JointPanel& panel,
                   std::size_t omega, int L, double* cost_out, double* charge_out) {
    int counts[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int prefix[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    double prevail[8];
    for (double& p : prevail) p = -kInf;
    int hist = 0;
    double bt = 1.0;
    const double beta = arms[0].beta;
    for (int n = 0; n < L; ++n) {
        const int m = rho.choice[(1 << n) - 1 + hist];
        const int T = arms[m].depth;
        const int t = counts[m];
        prevail[m] = std::max(prevail[m], gammas[m][FiniteTree::node_id(t, prefix[m])]);
        const std::size_t wpath = (omega / panel.stride[m]) % (std::size_t{1} << T);
        const int bit = static_cast<int>((wpath >> (T - 1 - t)) & 1u);
        bt *= beta;
        cost_out[n] = bt * arms[m].cost[FiniteTree::node_id(t + 1, (prefix[m] << 1) | bit)];
        charge_out[n] = bt * prevail[m];
        prefix[m] = (prefix[m] << 1) | bit;
        ++counts[m];
        hist = (hist << 1) | bit;
    }
}

std::vector<double> strategy_payoffs(const Strategy& rho, const std::vector<FiniteTree>& arms,
                                     const std::vector<NodeIndexMap>& gammas,
                                     const JointPanel& panel, int L) {
    std::vector<double> G(panel.n_paths);
    double cost[8], charge[8];
    for (std::size_t w = 0; w < panel.n_paths; ++w) {
        walk_strategy(rho, arms, gammas, panel, w, L, cost, charge);
        double acc = 0.0;
        for (int n = 0; n < L; ++n) acc += cost[n] - charge[n];
        G[w] = acc;
    }
    return G;
}

}  // namespace

JointPanel build_joint_panel(const std::vector<FiniteTree>& arms) {
    if (arms.empty() || arms.size() > 8) throw std::domain_error("need 1 to 8 arms");
    JointPanel p;
    std::vector<std::vector<std::vector<double>>> per;
    std::size_t rows = 1;
    for (const auto& t : arms) {
        t.validate();
        if (t.beta != arms[0].beta)
            throw std::invalid_argument("arms must share one discount factor");
        per.push_back(extreme_weights(t, 0, 0));
        p.horizons.push_back(t.depth);
        p.stride.push_back(p.n_paths);
        p.n_paths *= std::size_t{1} << t.depth;
        rows *= per.back().size();
        if (rows * p.n_paths > (std::size_t{1} << 20))
            throw std::length_error("joint panel exceeds cap");
    }
    p.weight.assign(rows, std::vector<double>(p.n_paths, 1.0));
    std::vector<std::size_t> pick(arms.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        auto& row = p.weight[r];
        for (std::size_t w = 0; w < p.n_paths; ++w) {
            double x = 1.0;
            for (std::size_t m = 0; m < arms.size(); ++m) {
                const std::size_t wpath = (w / p.stride[m]) % (std::size_t{1} << p.horizons[m]);
                x *= per[m][pick[m]][wpath];
            }
            row[w] = x;
        }
        for (std::size_t m = 0; m < arms.size(); ++m) {
            if (++pick[m] < per[m].size()) break;
            pick[m] = 0;
        }
    }
    return p;
}

double gittins_value(const Strategy& rho, const std::vector<FiniteTree>& arms,
                     const std::vector<NodeIndexMap>& gammas, const JointPanel& panel) {
    check_arm_inputs(arms, gammas);
    check_strategy(rho, arms);
    const int L = rho.total();
    const auto G = strategy_payoffs(rho, arms, gammas, panel, L);
    double best = -kInf;
    for (const auto& row : panel.weight) {
        double e = 0.0;
        for (std::size_t w = 0; w < panel.n_paths; ++w) e += row[w] * G[w];
        best = std::max(best, e);
    }
    return best;
}

double gittins_value(const Strategy& rho, const std::vector<FiniteTree>& arms,
                     const std::vector<NodeIndexMap>& gammas) {
    return gittins_value(rho, arms, gammas, build_joint_panel(arms));
}

CompensatorLedger build_compensator(const Strategy& rho, const std::vector<FiniteTree>& arms,
                                    const std::vector<NodeIndexMap>& gammas,
                                    const JointPanel& panel) {
    check_arm_inputs(arms, gammas);
    check_strategy(rho, arms);
    const int L = rho.total();
    CompensatorLedger led;
    led.value = gittins_value(rho, arms, gammas, panel);
    led.charge.assign((std::size_t{1} << L) - 1, 0.0);
    std::vector<int> counts(arms.size(), 0), prefix(arms.size(), 0);
    std::vector<double> prevail(arms.size(), -kInf);
    const double beta = arms[0].beta;
    std::function<void(int, int, double)> fill = [&](int n, int hist, double bt) {
        if (n == L) return;
        const int m = rho.choice[(1 << n) - 1 + hist];
        const double kept = prevail[m];
        prevail[m] = std::max(prevail[m], gammas[m][FiniteTree::node_id(counts[m], prefix[m])]);
        led.charge[(1 << n) - 1 + hist] = bt * beta * prevail[m];
        ++counts[m];
        const int kept_prefix = prefix[m];
        for (int bit = 0; bit < 2; ++bit) {
            prefix[m] = (kept_prefix << 1) | bit;
            fill(n + 1, (hist << 1) | bit, bt * beta);
        }
        prefix[m] = kept_prefix;
        --counts[m];
        prevail[m] = kept;
    };
    fill(0, 0, 1.0);
    led.c1 = led.charge[0] + led.value;
    // the compensated game nets to zero: worst case of total cost minus
    // total compensation
    const auto G = strategy_payoffs(rho, arms, gammas, panel, L);
    double worst = -kInf;
    for (const auto& row : panel.weight) {
        double e = 0.0;
        for (std::size_t w = 0; w < panel.n_paths; ++w) e += row[w] * G[w];
        worst = std::max(worst, e - led.value);
    }
    led.defect = std::fabs(worst);
    return led;
}

Strategy lowest_index_strategy(const std::vector<FiniteTree>& arms,
                               const std::vector<NodeIndexMap>& gammas) {
    check_arm_inputs(arms, gammas);
    Strategy rho;
    int L = 0;
    for (const auto& t : arms) {
        rho.horizons.push_back(t.depth);
        L += t.depth;
    }
    if (L > 8) throw std::length_error("total plays cap is 8");
    rho.choice.assign((std::size_t{1} << L) - 1, 0);
    std::vector<int> counts(arms.size(), 0), prefix(arms.size(), 0);
    std::function<void(int, int)> fill = [&](int n, int hist) {
        if (n == L) return;
        int pick = -1;
        double best = kInf;
        for (std::size_t m = 0; m < arms.size(); ++m) {
            if (counts[m] >= arms[m].depth) continue;
            const double cur = gammas[m][FiniteTree::node_id(counts[m], prefix[m])];
            if (cur < best) {
                best = cur;
                pick = static_cast<int>(m);
            }
        }
        rho.choice[(1 << n) - 1 + hist] = static_cast<std::uint8_t>(pick);
        ++counts[pick];
        const int kept = prefix[pick];
        for (int bit = 0; bit < 2; ++bit) {
            prefix[pick] = (kept << 1) | bit;
            fill(n + 1, (hist << 1) | bit);
        }
        prefix[pick] = kept;
        --counts[pick];
    };
    fill(0, 0);
    return rho;
}

namespace {

// A strategy respects the running-maximum run structure when it keeps
// playing the current arm exactly while that arm's current index stays at
// or below the index it showed when the run began, switching (or
// re-deciding) only after a strict exceedance or exhaustion.
bool sigma_respecting(const Strategy& rho, const std::vector<FiniteTree>& arms,
                      const std::vector<NodeIndexMap>& gammas, int L) {
    std::vector<int> counts(arms.size(), 0), prefix(arms.size(), 0);
    std::function<bool(int, int, int, double)> walk = [&](int n, int hist, int cur,
                                                          double lambda) {
        if (n == L) return true;
        const int a = rho.choice[(1 << n) - 1 + hist];
        if (n > 0) {
            const double gcur = gammas[cur][FiniteTree::node_id(counts[cur], prefix[cur])];
            const bool still = counts[cur] < arms[cur].depth && gcur <= lambda + 1e-9;
            if (still && a != cur) return false;
            if (!still) {
                cur = a;
                lambda = gammas[a][FiniteTree::node_id(counts[a], prefix[a])];
            }
        } else {
            cur = a;
            lambda = gammas[a][FiniteTree::node_id(0, 0)];
        }
        ++counts[a];
        const int kept = prefix[a];
        bool ok = true;
        for (int bit = 0; bit < 2 && ok; ++bit) {
            prefix[a] = (kept << 1) | bit;
            ok = walk(n + 1, (hist << 1) | bit, cur, lambda);
        }
        prefix[a] = kept;
        --counts[a];
        return ok;
    };
    return walk(0, 0, -1, 0.0);
}

}  // namespace

CheckReport check_sandwich_and_optimality(const std::vector<FiniteTree>& arms) {
    if (arms.empty() || arms.size() > 8) throw std::domain_error("need 1 to 8 arms");
    std::vector<NodeIndexMap> gammas;
    gammas.reserve(arms.size());
    std::vector<int> horizons;
    for (const auto& t : arms) {
        gammas.push_back(node_indices(t));
        horizons.push_back(t.depth);
    }
    const JointPanel panel = build_joint_panel(arms);
    const auto strategies = enumerate_strategies(horizons);
    const Strategy star = lowest_index_strategy(arms, gammas);
    const int L = star.total();

    CheckReport rep;
    const double vstar = gittins_value(star, arms, gammas, panel);
    if (std::fabs(vstar) > 1e-8) {
        rep.ok = false;
        rep.detail = describe("lowest-index strategy value off zero: %.17g (tol %.17g)", vstar, 1e-8);
        return rep;
    }
    std::size_t n_respecting = 0;
    std::vector<double> values(strategies.size());
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        values[i] = gittins_value(strategies[i], arms, gammas, panel);
        if (values[i] < -1e-8) {
            rep.ok = false;
            rep.detail = describe("a strategy undercuts zero: value %.17g (strategy %.17g)",
                                  values[i], static_cast<double>(i));
            return rep;
        }
        if (sigma_respecting(strategies[i], arms, gammas, L)) {
            ++n_respecting;
            if (values[i] > 1e-8) {
                rep.ok = false;
                rep.detail = describe("a run-respecting strategy exceeds zero: value %.17g (strategy %.17g)",
                                      values[i], static_cast<double>(i));
                return rep;
            }
        }
    }
    if (n_respecting == 0) {
        rep.ok = false;
        rep.detail = "no strategy respects the run structure";
        return rep;
    }

    // lowest-index charges dominate path-by-path, for every prefix, both as
    // raw discounted charges and as compensator prefix sums
    double cost_buf[8], charge_star[8], charge_other[8];
    for (std::size_t w = 0; w < panel.n_paths && rep.ok; ++w) {
        walk_strategy(star, arms, gammas, panel, w, L, cost_buf, charge_star);
        for (std::size_t i = 0; i < strategies.size() && rep.ok; ++i) {
            walk_strategy(strategies[i], arms, gammas, panel, w, L, cost_buf, charge_other);
            double ps = 0.0, po = 0.0;
            for (int n = 0; n < L; ++n) {
                ps += charge_star[n];
                po += charge_other[n];
                if (ps > po + 1e-8) {
                    rep.ok = false;
                    rep.detail = describe("charge prefix dominance fails: %.17g > %.17g", ps, po);
                    break;
                }
                if (ps + vstar > po + values[i] + 1e-8) {
                    rep.ok = false;
                    rep.detail = describe("compensator prefix dominance fails: %.17g > %.17g",
                                          ps + vstar, po + values[i]);
                    break;
                }
            }
        }
    }
    return rep;
}

}  // namespace drg
