#include "drg/policies.hpp"

#include <cmath>
#include <cstdio>

namespace drg {

double index_greedy(const ArmState& arm) {
  arm.posterior.validate();
  return arm.posterior.p;
}

double index_ucb(const ArmState& arm, long long n_total, double lambda) {
  arm.posterior.validate();
  if (n_total < 1) throw std::domain_error("index_ucb: N_total must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::domain_error("index_ucb: lambda must be nonnegative");
  return arm.posterior.p - std::sqrt(lambda * std::log(static_cast<double>(n_total)) / arm.posterior.n);
}

double index_dr(const ArmState& arm, const IndexSurface& surface) {
  arm.posterior.validate();
  if (arm.posterior.n < surface.cfg.n0) throw std::domain_error("index_dr: posterior count below the surface prior");
  return query_index(surface, arm.posterior.p, arm.posterior.n);
}

std::string policy_name(const PolicySpec& policy) {
  char buf[96];
  if (const auto* dr = std::get_if<DrPolicy>(&policy)) {
    if (!dr->surface) return "dr";
    std::snprintf(buf, sizeof buf, "dr:k=%g,beta=%g", dr->surface->cfg.k, dr->surface->cfg.beta);
    return buf;
  }
  if (std::holds_alternative<GreedyPolicy>(policy)) return "greedy";
  if (const auto* th = std::get_if<ThompsonPolicy>(&policy)) {
    std::snprintf(buf, sizeof buf, "thompson:a0=%g,b0=%g", th->a0, th->b0);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "ucb:lambda=%g", std::get<UcbPolicy>(policy).lambda);
  return buf;
}

}  // namespace drg
