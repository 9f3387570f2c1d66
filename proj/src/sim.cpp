#include "drg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace drg {
namespace {

// Stream roles under one (seed, sim) pair. Every policy reuses the same
// outcome and selection seeds, which pairs runs and makes identical policy
// specs produce identical episodes.
constexpr std::uint64_t kRoleScenario = 0;
constexpr std::uint64_t kRoleOutcome = 1;
constexpr std::uint64_t kRolePolicy = 2;

void check_scenario(const Scenario& sc, const ScenarioConfig& cfg) {
  if (static_cast<int>(sc.theta.size()) != cfg.M)
    throw std::invalid_argument("run_episode: scenario arm count does not match config");
  double mn = 1.0;
  for (double th : sc.theta) {
    if (!(th >= 0.0 && th <= 1.0)) throw std::invalid_argument("run_episode: theta outside [0,1]");
    mn = std::min(mn, th);
  }
  if (sc.theta.empty() || mn != sc.theta_star)
    throw std::invalid_argument("run_episode: theta_star is not the minimum");
}

// Type-7 quantile on a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  const size_t n = sorted.size();
  const double h = (static_cast<double>(n) - 1.0) * q;
  const size_t i = static_cast<size_t>(h);
  const double frac = h - static_cast<double>(i);
  double v = sorted[i];
  if (frac > 0.0 && i + 1 < n) v += frac * (sorted[i + 1] - sorted[i]);
  return v;
}

SummaryRow summarize(const std::string& policy, const std::string& metric,
                     std::vector<double> xs, std::uint64_t seed) {
  SummaryRow row;
  row.policy = policy;
  row.metric = metric;
  row.n_sims = static_cast<long long>(xs.size());
  row.seed = seed;
  double acc = 0.0;
  for (double x : xs) acc += x;
  row.mean = acc / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - row.mean) * (x - row.mean);
    row.sd = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
  }
  std::sort(xs.begin(), xs.end());
  row.q25 = quantile(xs, 0.25);
  row.q50 = quantile(xs, 0.50);
  row.q75 = quantile(xs, 0.75);
  return row;
}

void fmt(char* buf, size_t n, double x) { std::snprintf(buf, n, "%.17g", x); }

}  // namespace

void ScenarioConfig::validate() const {
  if (M < 1) throw std::domain_error("scenario config: M must be >= 1");
  if (L < 1) throw std::domain_error("scenario config: L must be >= 1");
  if (warmup < 0) throw std::domain_error("scenario config: warmup must be >= 0");
  if (!(gamma_shape > 0.0) || !std::isfinite(gamma_shape))
    throw std::domain_error("scenario config: gamma_shape must be positive");
  if (!(gamma_second > 0.0) || !std::isfinite(gamma_second))
    throw std::domain_error("scenario config: gamma_second must be positive");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::domain_error("scenario config: p0 must be in [0,1]");
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw std::domain_error("scenario config: n0 must be positive");
}

std::vector<ArmState> init_arms(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<ArmState> arms(cfg.M);
  for (ArmState& a : arms) {
    a.posterior = PosteriorState{cfg.p0, cfg.n0};
    a.pulls = 0;
  }
  return arms;
}

void warm_up(std::vector<ArmState>& arms, const Scenario& sc,
             const ScenarioConfig& cfg, RandomStream& g) {
  check_scenario(sc, cfg);
  for (int m = 0; m < cfg.M; ++m) {
    for (int w = 0; w < cfg.warmup; ++w) {
      const int outcome = g.bernoulli(sc.theta[m]) ? 1 : 0;
      arms[m].posterior = posterior_update(arms[m].posterior, outcome);
      arms[m].pulls += 1;
    }
  }
}

RegretTrace run_episode(const PolicySpec& policy, const Scenario& sc,
                        const ScenarioConfig& cfg, RandomStream& outcome_g,
                        RandomStream& policy_g, std::vector<StepRecord>* trace) {
  cfg.validate();
  check_scenario(sc, cfg);
  std::vector<ArmState> arms = init_arms(cfg);
  warm_up(arms, sc, cfg, outcome_g);
  RegretTrace tr;
  if (trace) {
    trace->clear();
    trace->reserve(static_cast<size_t>(cfg.L));
  }
  for (long long step = 1; step <= cfg.L; ++step) {
    // System plays completed so far; floor of 1 keeps the UCB log finite on
    // the degenerate warmup=0 first round.
    const long long n_total =
        std::max<long long>(1, static_cast<long long>(cfg.M) * cfg.warmup + step - 1);
    const Decision d = decide(policy, arms, n_total, policy_g);
    const int m = d.chosen;
    const int outcome = outcome_g.bernoulli(sc.theta[m]) ? 1 : 0;
    arms[m].posterior = posterior_update(arms[m].posterior, outcome);
    arms[m].pulls += 1;
    tr.R += sc.theta[m] - sc.theta_star;
    if (sc.theta[m] != sc.theta_star) tr.n_subopt += 1;
    if (trace) trace->push_back(StepRecord{step, m, tr.R, tr.n_subopt});
  }
  return tr;
}

std::vector<SummaryRow> run_batch(const std::vector<PolicySpec>& policies,
                                  const ScenarioConfig& cfg, long long n_sims,
                                  ExecMode mode) {
  cfg.validate();
  if (n_sims < 1) throw std::domain_error("run_batch: n_sims must be >= 1");
  const int P = static_cast<int>(policies.size());
  std::vector<RegretTrace> slots(static_cast<size_t>(n_sims) * P);
  const bool par = mode == ExecMode::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (long long s = 0; s < n_sims; ++s) {
    RandomStream scen_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRoleScenario));
    const Scenario sc = draw_scenario(cfg, scen_g);
    for (int pi = 0; pi < P; ++pi) {
      RandomStream outcome_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRoleOutcome));
      RandomStream policy_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRolePolicy));
      slots[static_cast<size_t>(s) * P + pi] =
          run_episode(policies[pi], sc, cfg, outcome_g, policy_g);
    }
  }
  std::vector<SummaryRow> rows;
  rows.reserve(2 * static_cast<size_t>(P));
  for (int pi = 0; pi < P; ++pi) {
    std::vector<double> rs(n_sims), ns(n_sims);
    for (long long s = 0; s < n_sims; ++s) {
      rs[s] = slots[static_cast<size_t>(s) * P + pi].R;
      ns[s] = static_cast<double>(slots[static_cast<size_t>(s) * P + pi].n_subopt);
    }
    const std::string name = policy_name(policies[pi]);
    rows.push_back(summarize(name, "R", std::move(rs), cfg.seed));
    rows.push_back(summarize(name, "N_subopt", std::move(ns), cfg.seed));
  }
  return rows;
}

RegretTrace replay_episode(const PolicySpec& policy, const ScenarioConfig& cfg,
                           long long s, std::vector<StepRecord>* trace) {
  cfg.validate();
  if (s < 0) throw std::domain_error("replay_episode: episode number must be >= 0");
  // same stream derivation as the batch loop
  RandomStream scen_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRoleScenario));
  const Scenario sc = draw_scenario(cfg, scen_g);
  RandomStream outcome_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRoleOutcome));
  RandomStream policy_g(stream_seed(cfg.seed, static_cast<std::uint64_t>(s), kRolePolicy));
  return run_episode(policy, sc, cfg, outcome_g, policy_g, trace);
}

void write_results(const std::vector<SummaryRow>& rows, const ScenarioConfig& cfg,
                   std::ostream& os) {
  char s1[32], s2[32], s3[32], s4[32];
  fmt(s1, sizeof s1, cfg.gamma_shape);
  fmt(s2, sizeof s2, cfg.gamma_second);
  fmt(s3, sizeof s3, cfg.p0);
  fmt(s4, sizeof s4, cfg.n0);
  os << "# M=" << cfg.M << " L=" << cfg.L << " warmup=" << cfg.warmup
     << " gamma_shape=" << s1 << " gamma_second=" << s2 << " gamma_param="
     << (cfg.gamma_param == GammaParam::Rate ? "rate" : "scale") << " p0=" << s3
     << " n0=" << s4 << " warmup_charged=0\n";
  os << "policy,metric,mean,sd,q25,q50,q75,n_sims,seed\n";
  char m[32], sd[32], q1[32], q2[32], q3[32];
  for (const SummaryRow& r : rows) {
    fmt(m, sizeof m, r.mean);
    fmt(sd, sizeof sd, r.sd);
    fmt(q1, sizeof q1, r.q25);
    fmt(q2, sizeof q2, r.q50);
    fmt(q3, sizeof q3, r.q75);
    os << '"' << r.policy << "\"," << r.metric << "," << m << "," << sd << ","
       << q1 << "," << q2 << "," << q3 << "," << r.n_sims << "," << r.seed << "\n";
  }
}

void write_results(const std::vector<SummaryRow>& rows, const ScenarioConfig& cfg,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_results: cannot open " + path);
  write_results(rows, cfg, out);
  if (!out) throw std::runtime_error("write_results: write failed for " + path);
}

std::vector<SummaryRow> read_results(std::istream& is) {
  std::vector<SummaryRow> rows;
  std::string line;
  bool saw_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("policy,", 0) == 0) {
      saw_header = true;
      continue;
    }
    if (line[0] != '"') throw std::runtime_error("results csv: unquoted policy field");
    const size_t close = line.find('"', 1);
    if (close == std::string::npos) throw std::runtime_error("results csv: unterminated policy field");
    SummaryRow r;
    r.policy = line.substr(1, close - 1);
    char metric[32];
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str() + close + 1, ",%31[^,],%lf,%lf,%lf,%lf,%lf,%lld,%llu",
                    metric, &r.mean, &r.sd, &r.q25, &r.q50, &r.q75, &r.n_sims, &seed) != 8)
      throw std::runtime_error("results csv: bad data row");
    r.metric = metric;
    r.seed = seed;
    rows.push_back(std::move(r));
  }
  if (!saw_header) throw std::runtime_error("results csv: missing column header");
  return rows;
}

std::vector<SummaryRow> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_results: cannot open " + path);
  return read_results(in);
}

}  // namespace drg
