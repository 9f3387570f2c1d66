#include "drg/nle.hpp"

#include <cmath>
#include <stdexcept>

#include "drg/beta.hpp"

namespace drg {

void PosteriorState::validate() const {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("PosteriorState: p must lie in [0,1]");
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::domain_error("PosteriorState: n must be positive and finite");
}

void CredibleModel::validate() const {
  if (!(k >= 0.0 && k < 1.0))
    throw std::domain_error("CredibleModel: k must lie in [0,1)");
  if (!(n0 > 0.0) || !std::isfinite(n0))
    throw std::domain_error("CredibleModel: n0 must be positive and finite");
}

ThetaInterval credible_set(const PosteriorState& s, const CredibleModel& m) {
  s.validate();
  m.validate();
  const double eps = 1e-12;
  const double a = s.p * s.n;
  const double b = (1.0 - s.p) * s.n;
  if (a <= eps) return {0.0, 0.0};
  if (b <= eps) return {1.0, 1.0};
  const double lo = beta_quantile(a, b, 0.5 - 0.5 * m.k);
  const double hi = m.k == 0.0 ? lo : beta_quantile(a, b, 0.5 + 0.5 * m.k);
  return {lo, hi};
}

PosteriorState posterior_update(const PosteriorState& s, int outcome) {
  s.validate();
  if (outcome != 0 && outcome != 1)
    throw std::domain_error("posterior_update: outcome must be 0 or 1");
  double p = (s.p * s.n + outcome) / (s.n + 1.0);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return {p, s.n + 1.0};
}

namespace {

double compose_rec(const std::function<double(const std::vector<int>&)>& terminal,
                   const PosteriorState& s, const CredibleModel& m, int left,
                   std::vector<int>& path) {
  if (left == 0) return terminal(path);
  const ThetaInterval th = credible_set(s, m);
  path.push_back(0);
  const double f0 = compose_rec(terminal, posterior_update(s, 0), m, left - 1, path);
  path.back() = 1;
  const double f1 = compose_rec(terminal, posterior_update(s, 1), m, left - 1, path);
  path.pop_back();
  return dr_one_step(f0, f1, th);
}

}  // namespace

double compose_expectation(const std::function<double(const std::vector<int>&)>& terminal,
                           const PosteriorState& start, const CredibleModel& model,
                           int depth) {
  start.validate();
  model.validate();
  if (!terminal) throw std::invalid_argument("compose_expectation: terminal is empty");
  if (depth < 1 || depth > 20)
    throw std::invalid_argument("compose_expectation: depth must lie in [1,20]");
  std::vector<int> path;
  path.reserve(depth);
  return compose_rec(terminal, start, model, depth, path);
}

}  // namespace drg
