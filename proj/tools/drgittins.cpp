// drgittins: batch front end for the robust index engine.
//
//   surface   build an index surface and write it as CSV (plus a gamma-p
//             companion file for plotting)
//   simulate  Monte-Carlo bandit benchmark across policies, summary CSV
//   verify    randomized self-checks of the exhaustive finite oracle
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "drg/oracle.hpp"
#include "drg/policies.hpp"
#include "drg/rng.hpp"
#include "drg/sim.hpp"
#include "drg/surface.hpp"

namespace {

// Command-line misuse distinct from a failed run: maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// out.csv -> out_diff.csv; extensionless paths get the suffix appended.
std::string companion_path(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of("/\\");
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "_" + tag;
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

double parse_real(const std::string& item, const std::string& key, const std::string& val) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(val, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != val.size())
    throw UsageError("policy '" + item + "': value of '" + key + "' is not a number");
  return x;
}

int parse_int(const std::string& item, const std::string& key, const std::string& val) {
  const double x = parse_real(item, key, val);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw UsageError("policy '" + item + "': value of '" + key + "' is not an integer");
  return i;
}

/** Parse one `--policies` list.
 *
 * Grammar: items separated by ';', each `tag` or `tag:key=val,key=val`.
 * Tags: dr (k, beta, T, np, ngamma), greedy, thompson (a0, b0),
 * ucb (lambda). The dr surface inherits n0 from the scenario so posterior
 * states map onto surface stages, and its horizon defaults to warmup + L
 * (the most trials any one arm can accumulate).
 */
std::vector<drg::PolicySpec> parse_policies(const std::string& spec,
                                            const drg::ScenarioConfig& sc,
                                            drg::ExecMode mode) {
  std::vector<drg::PolicySpec> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto semi = spec.find(';', pos);
    const std::string item =
        spec.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
    pos = semi == std::string::npos ? spec.size() + 1 : semi + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const std::string tag = item.substr(0, colon);
    std::vector<std::pair<std::string, std::string>> kv;
    if (colon != std::string::npos) {
      std::size_t p = colon + 1;
      while (p <= item.size()) {
        const auto comma = item.find(',', p);
        const std::string pair =
            item.substr(p, comma == std::string::npos ? std::string::npos : comma - p);
        p = comma == std::string::npos ? item.size() + 1 : comma + 1;
        if (pair.empty()) continue;
        const auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
          throw UsageError("policy '" + item + "': expected key=value, got '" + pair + "'");
        kv.emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
      }
    }
    if (tag == "greedy") {
      if (!kv.empty()) throw UsageError("policy 'greedy' takes no parameters");
      out.emplace_back(drg::GreedyPolicy{});
    } else if (tag == "thompson") {
      drg::ThompsonPolicy th;
      for (const auto& [k, v] : kv) {
        if (k == "a0")
          th.a0 = parse_real(item, k, v);
        else if (k == "b0")
          th.b0 = parse_real(item, k, v);
        else
          throw UsageError("policy '" + item + "': unknown parameter '" + k + "'");
      }
      out.emplace_back(th);
    } else if (tag == "ucb") {
      drg::UcbPolicy u;
      for (const auto& [k, v] : kv) {
        if (k == "lambda")
          u.lambda = parse_real(item, k, v);
        else
          throw UsageError("policy '" + item + "': unknown parameter '" + k + "'");
      }
      out.emplace_back(u);
    } else if (tag == "dr") {
      drg::IndexConfig ic;
      ic.n0 = sc.n0;
      ic.T = static_cast<int>(std::min<long long>(sc.warmup + sc.L, 1000000));
      ic.np = 101;
      ic.ngamma = 201;
      for (const auto& [k, v] : kv) {
        if (k == "k")
          ic.k = parse_real(item, k, v);
        else if (k == "beta")
          ic.beta = parse_real(item, k, v);
        else if (k == "T")
          ic.T = parse_int(item, k, v);
        else if (k == "np")
          ic.np = parse_int(item, k, v);
        else if (k == "ngamma")
          ic.ngamma = parse_int(item, k, v);
        else
          throw UsageError("policy '" + item + "': unknown parameter '" + k + "'");
      }
      try {
        ic.validate();
      } catch (const std::domain_error& e) {
        throw UsageError("policy '" + item + "': " + e.what());
      }
      std::cerr << "building index surface for " << item << " (T=" << ic.T << ", Np=" << ic.np
                << ", Ngamma=" << ic.ngamma << ")...\n";
      auto surf = std::make_shared<drg::IndexSurface>(drg::build_surface(ic, mode));
      out.emplace_back(drg::DrPolicy{std::move(surf)});
    } else {
      throw UsageError("unknown policy tag '" + tag + "'");
    }
  }
  if (out.empty()) throw UsageError("--policies parsed to an empty list");
  return out;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  body(os);
  if (!os) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// surface

struct SurfaceArgs {
  drg::IndexConfig cfg;
  std::string out;
};

int cmd_surface(const SurfaceArgs& a, drg::ExecMode mode) {
  try {
    a.cfg.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const drg::IndexSurface s = drg::build_surface(a.cfg, mode);
  write_file(a.out, [&](std::ostream& os) { drg::write_surface_csv(s, os); });
  const std::string diff = companion_path(a.out, "diff");
  write_file(diff, [&](std::ostream& os) { drg::write_surface_diff_csv(s, os); });
  std::cout << "surface: " << a.cfg.T * a.cfg.np << " rows -> " << a.out << " and " << diff
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  drg::ScenarioConfig cfg;
  long long sims = 200;
  std::string policies;
  std::string out;
  std::string trace;
};

int cmd_simulate(const SimulateArgs& a, drg::ExecMode mode) {
  try {
    a.cfg.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  if (a.sims < 1) throw UsageError("--sims must be >= 1");
  const std::vector<drg::PolicySpec> policies = parse_policies(a.policies, a.cfg, mode);
  const std::vector<drg::SummaryRow> rows = drg::run_batch(policies, a.cfg, a.sims, mode);
  write_file(a.out, [&](std::ostream& os) {
    os << "# policies=\"" << a.policies << "\" sims=" << a.sims << " seed=" << a.cfg.seed
       << "\n";
    drg::write_results(rows, a.cfg, os);
  });
  std::cout << "simulate: " << rows.size() << " summary rows -> " << a.out << "\n";
  if (!a.trace.empty()) {
    write_file(a.trace, [&](std::ostream& os) {
      os << "# policies=\"" << a.policies << "\" sims=" << a.sims << " seed=" << a.cfg.seed
         << "\n";
      os << "episode,step,policy,arm,R,N_subopt\n";
      std::vector<drg::StepRecord> steps;
      for (long long s = 0; s < a.sims; ++s) {
        for (const auto& pol : policies) {
          const std::string name = drg::policy_name(pol);
          drg::replay_episode(pol, a.cfg, s, &steps);
          for (const auto& r : steps)
            os << s << "," << r.step << ",\"" << name << "\"," << r.arm << "," << fmt17(r.R)
               << "," << r.n_subopt << "\n";
        }
      }
    });
    std::cout << "trace: " << a.sims * static_cast<long long>(policies.size()) * a.cfg.L
              << " rows -> " << a.trace << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::uint64_t seed = 2024;
  int instances = 50;
  int depth = 3;
  bool inject_failure = false;
};

struct CheckTally {
  std::string name;
  int pass = 0;
  int fail = 0;
  std::string first_failure;
};

void tally(CheckTally& t, const drg::CheckReport& rep, std::uint64_t seed, int instance) {
  if (rep.ok) {
    ++t.pass;
    return;
  }
  ++t.fail;
  if (t.first_failure.empty())
    t.first_failure = "instance=" + std::to_string(instance) + " seed=" + std::to_string(seed) +
                      " detail: " + rep.detail;
}

int cmd_verify(const VerifyArgs& a) {
  if (a.instances < 0) throw UsageError("--instances must be >= 0");
  if (a.depth < 1 || a.depth > 4) throw UsageError("--depth must be in [1,4]");
  CheckTally checks[6];
  const char* names[6] = {"optimal-stopping", "fair-game",         "delay-robustness",
                          "product-family",   "compensated-order", "index-policy"};
  for (int c = 0; c < 6; ++c) checks[c].name = names[c];
  for (int i = 0; i < a.instances; ++i) {
    drg::RandomStream g(drg::stream_seed(a.seed, static_cast<std::uint64_t>(i), 100));
    const int d = 1 + i % a.depth;
    // exact enumeration over measure selections caps the candidate count at
    // the deepest trees
    const drg::FiniteTree t = drg::random_tree(d, d >= 4 ? 2 : 3, g);
    tally(checks[0], drg::check_optimal_stopping(t, 0), a.seed, i);
    tally(checks[1], drg::check_fair_game(t), a.seed, i);
    tally(checks[2], drg::check_delay_inequality(t, 1e-6, g, 200), a.seed, i);
    const int d2 = 1 + (i + 1) % std::min(a.depth, 3);
    const drg::FiniteTree t2 = drg::random_tree(d2, 3, g);
    const drg::FiniteTree t3 = drg::random_tree(std::min(d, 3), 3, g);
    tally(checks[3], drg::orthant_checks(t3, t2, g), a.seed, i);
    tally(checks[4], drg::counterexample_compensated_order(), a.seed, i);
    drg::FiniteTree armA = drg::random_tree(2, 2, g);
    drg::FiniteTree armB = drg::random_tree(i % 10 == 9 ? 3 : 2, 2, g);
    armB.beta = armA.beta;
    tally(checks[5], drg::check_sandwich_and_optimality({armA, armB}), a.seed, i);
  }
  bool all_ok = true;
  for (const CheckTally& c : checks) {
    if (a.instances == 0) break;
    const bool ok = c.fail == 0;
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.pass << "/"
              << (c.pass + c.fail) << " instances";
    if (!ok) std::cout << " (first failure: " << c.first_failure << ")";
    std::cout << "\n";
  }
  if (a.inject_failure) {
    std::cout << "[FAIL] injected-failure: forced by --inject-failure (exit-path test hook)\n";
    all_ok = false;
  }
  if (a.instances == 0 && all_ok) {
    std::cout << "verify: no instances requested\n";
    return a.inject_failure ? 1 : 0;
  }
  std::cout << (all_ok ? "verify: all checks passed\n" : "verify: FAILURES detected\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Gittins-index engine: surface builder, bandit benchmark, oracle checks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a key=value file (INI sections per subcommand)");

  int threads = 0;
  bool serial = false;
  app.add_option("--threads", threads, "Worker thread count (0 = library default)")
      ->envname("DRGITTINS_THREADS")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--serial", serial, "Force single-threaded deterministic execution paths");

  SurfaceArgs sa;
  CLI::App* surface = app.add_subcommand("surface", "Build an index surface CSV");
  surface->add_option("--k", sa.cfg.k, "Credible-band mass in [0,1)")->capture_default_str();
  surface->add_option("--beta", sa.cfg.beta, "Discount factor in (0,1)")->capture_default_str();
  surface->add_option("--T", sa.cfg.T, "Horizon (stage count)")->capture_default_str();
  surface->add_option("--n0", sa.cfg.n0, "Prior pseudo-count")->capture_default_str();
  surface->add_option("--np", sa.cfg.np, "Posterior-mean grid points")->capture_default_str();
  surface->add_option("--ngamma", sa.cfg.ngamma, "Index grid points")->capture_default_str();
  surface->add_option("--out", sa.out, "Output CSV path")->required();

  SimulateArgs ma;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo bandit benchmark");
  simulate->add_option("--m", ma.cfg.M, "Arm count")->capture_default_str();
  simulate->add_option("--l", ma.cfg.L, "Policy-driven plays per episode")->capture_default_str();
  simulate->add_option("--warmup", ma.cfg.warmup, "Forced trials per arm before the policy runs")
      ->capture_default_str();
  simulate->add_option("--shape", ma.cfg.gamma_shape, "Gamma hyperprior shape")
      ->capture_default_str();
  auto* rate = simulate->add_option("--rate", ma.cfg.gamma_second,
                                    "Gamma hyperprior rate (default parameterization)");
  auto* scale = simulate->add_option("--scale", ma.cfg.gamma_second, "Gamma hyperprior scale");
  rate->excludes(scale);
  scale->excludes(rate);
  simulate->add_option("--p0", ma.cfg.p0, "Prior mean")->capture_default_str();
  simulate->add_option("--n0", ma.cfg.n0, "Prior pseudo-count")->capture_default_str();
  simulate->add_option("--seed", ma.cfg.seed, "Master seed")->capture_default_str();
  simulate->add_option("--sims", ma.sims, "Number of scenarios")->capture_default_str();
  simulate
      ->add_option("--policies", ma.policies,
                   "Semicolon list: dr:k=..,beta=..;greedy;thompson:a0=..,b0=..;ucb:lambda=..")
      ->required();
  simulate->add_option("--out", ma.out, "Summary CSV path")->required();
  simulate->add_option("--trace", ma.trace, "Optional per-step trace CSV path");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Randomized oracle self-checks");
  verify->add_option("--seed", va.seed, "Master seed")->capture_default_str();
  verify->add_option("--instances", va.instances, "Randomized instances per check")
      ->capture_default_str();
  verify->add_option("--depth", va.depth, "Largest tree depth to draw (<= 4)")
      ->capture_default_str();
  verify->add_flag("--inject-failure", va.inject_failure)->group("");  // test hook, hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
  const drg::ExecMode mode = serial ? drg::ExecMode::Serial : drg::ExecMode::Parallel;

  try {
    if (app.got_subcommand(surface)) return cmd_surface(sa, mode);
    if (app.got_subcommand(simulate)) {
      if (*scale) ma.cfg.gamma_param = drg::GammaParam::Scale;
      return cmd_simulate(ma, mode);
    }
    return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
