#include "drg/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace drg {
namespace {

struct Anchor {
  int i0;
  double w;
};

// Locate p on the uniform grid. Values within 1e-9 of a knot snap onto it so
// that grid queries reproduce stored values exactly; the top knot is reached
// with weight 1 so interpolation is exact there too.
Anchor locate(double p, int np) {
  if (p <= 0.0) return {0, 0.0};
  if (p >= 1.0) return {np - 2, 1.0};
  const double x = p * (np - 1);
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9 * (np - 1)) {
    const int i = static_cast<int>(r);
    if (i >= np - 1) return {np - 2, 1.0};
    return {i, 0.0};
  }
  int i0 = static_cast<int>(x);
  if (i0 > np - 2) i0 = np - 2;
  return {i0, x - i0};
}

// Both weights hit the endpoints exactly: w=0 gives row[i0], w=1 gives
// row[i0+1].
inline double lerp_row(const double* row, int i0, double w) {
  return (1.0 - w) * row[i0] + w * row[i0 + 1];
}

// One-step unclipped value: play once at charge gamma, then continue with the
// clipped values v0/v1 read from the next stage.
inline double one_step_u(double gamma, double beta, double lo, double hi,
                         double v0, double v1) {
  const double f0 = -gamma + beta * v0;
  const double f1 = (1.0 - gamma) + beta * v1;
  return dr_one_step(f0, f1, ThetaInterval{lo, hi});
}

// Gamma-independent grid data: credible endpoints and child interpolation
// anchors per (stage, grid point). Computed once, shared by every candidate
// gamma sweep.
struct GridPre {
  int T = 0;
  int np = 0;
  std::vector<double> lo, hi;
  std::vector<int> c0i, c1i;
  std::vector<double> c0w, c1w;
};

GridPre precompute(const IndexConfig& cfg, bool par) {
  GridPre pre;
  pre.T = cfg.T;
  pre.np = cfg.np;
  const int cells = cfg.T * cfg.np;
  pre.lo.resize(cells);
  pre.hi.resize(cells);
  pre.c0i.resize(cells);
  pre.c1i.resize(cells);
  pre.c0w.resize(cells);
  pre.c1w.resize(cells);
  const CredibleModel model{cfg.k, cfg.n0};
#pragma omp parallel for schedule(static) if (par)
  for (int c = 0; c < cells; ++c) {
    const int t = c / cfg.np;
    const int i = c % cfg.np;
    const PosteriorState st{cfg.p_at(i), cfg.n0 + t};
    const ThetaInterval th = credible_set(st, model);
    pre.lo[c] = th.lo;
    pre.hi[c] = th.hi;
    const Anchor a0 = locate(posterior_update(st, 0).p, cfg.np);
    const Anchor a1 = locate(posterior_update(st, 1).p, cfg.np);
    pre.c0i[c] = a0.i0;
    pre.c0w[c] = a0.w;
    pre.c1i[c] = a1.i0;
    pre.c1w[c] = a1.w;
  }
  return pre;
}

inline double cell_u(double gamma, double beta, const GridPre& pre, int t,
                     int i, const double* vnext) {
  const size_t c = static_cast<size_t>(t) * pre.np + i;
  const double v0 = lerp_row(vnext, pre.c0i[c], pre.c0w[c]);
  const double v1 = lerp_row(vnext, pre.c1i[c], pre.c1w[c]);
  return one_step_u(gamma, beta, pre.lo[c], pre.hi[c], v0, v1);
}

void backward_fill(double gamma, const IndexConfig& cfg, const GridPre& pre,
                   std::vector<double>& v) {
  v.assign(static_cast<size_t>(cfg.T + 1) * cfg.np, 0.0);
  for (int t = cfg.T - 1; t >= 0; --t) {
    const double* vnext = v.data() + static_cast<size_t>(t + 1) * cfg.np;
    double* vcur = v.data() + static_cast<size_t>(t) * cfg.np;
    for (int i = 0; i < cfg.np; ++i) {
      const double u = cell_u(gamma, cfg.beta, pre, t, i, vnext);
      vcur[i] = u < 0.0 ? u : 0.0;
    }
  }
}

void format_double(char* buf, size_t n, double x) { std::snprintf(buf, n, "%.17g", x); }

}  // namespace

void IndexConfig::validate() const {
  if (!(k >= 0.0 && k < 1.0)) throw std::domain_error("index config: k must be in [0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("index config: beta must be in (0,1)");
  if (T < 1) throw std::domain_error("index config: T must be >= 1");
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw std::domain_error("index config: n0 must be positive and finite");
  if (np < 2) throw std::domain_error("index config: np must be >= 2");
  if (ngamma < 2) throw std::domain_error("index config: ngamma must be >= 2");
}

StageTable stage_backward(double gamma, const IndexConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(gamma)) throw std::domain_error("stage_backward: gamma must be finite");
  const GridPre pre = precompute(cfg, false);
  StageTable tbl;
  tbl.gamma = gamma;
  tbl.T = cfg.T;
  tbl.np = cfg.np;
  backward_fill(gamma, cfg, pre, tbl.v);
  return tbl;
}

double initial_value(double gamma, double p, int stage, const StageTable& tbl,
                     const IndexConfig& cfg) {
  if (stage < 0 || stage >= cfg.T) throw std::domain_error("initial_value: stage out of range");
  if (tbl.T != cfg.T || tbl.np != cfg.np) throw std::invalid_argument("initial_value: table does not match config");
  const PosteriorState st{p, cfg.n0 + stage};
  st.validate();
  const ThetaInterval th = credible_set(st, CredibleModel{cfg.k, cfg.n0});
  const Anchor a0 = locate(posterior_update(st, 0).p, cfg.np);
  const Anchor a1 = locate(posterior_update(st, 1).p, cfg.np);
  const double* vnext = tbl.v.data() + static_cast<size_t>(stage + 1) * cfg.np;
  const double v0 = lerp_row(vnext, a0.i0, a0.w);
  const double v1 = lerp_row(vnext, a1.i0, a1.w);
  return one_step_u(gamma, cfg.beta, th.lo, th.hi, v0, v1);
}

IndexSurface build_surface(const IndexConfig& cfg, ExecMode mode) {
  cfg.validate();
  const bool par = mode == ExecMode::Parallel;
  const GridPre pre = precompute(cfg, par);
  const int cells = cfg.T * cfg.np;
  // Smallest admissible gamma grid index per cell; ngamma is the "none yet"
  // sentinel. Per-thread minima merge with elementwise min, so the result is
  // independent of scheduling.
  std::vector<int> best(cells, cfg.ngamma);
#pragma omp parallel if (par)
  {
    std::vector<int> local(cells, cfg.ngamma);
    std::vector<double> cur(cfg.np), next(cfg.np);
#pragma omp for schedule(static) nowait
    for (int j = 0; j < cfg.ngamma; ++j) {
      const double g = cfg.gamma_at(j);
      std::fill(next.begin(), next.end(), 0.0);
      for (int t = cfg.T - 1; t >= 0; --t) {
        for (int i = 0; i < cfg.np; ++i) {
          const double u = cell_u(g, cfg.beta, pre, t, i, next.data());
          if (u <= 0.0) {
            int& b = local[static_cast<size_t>(t) * cfg.np + i];
            if (j < b) b = j;
          }
          cur[i] = u < 0.0 ? u : 0.0;
        }
        std::swap(cur, next);
      }
    }
#pragma omp critical
    for (int c = 0; c < cells; ++c)
      if (local[c] < best[c]) best[c] = local[c];
  }
  IndexSurface s;
  s.cfg = cfg;
  s.gamma.resize(cells);
  for (int c = 0; c < cells; ++c)
    s.gamma[c] = best[c] < cfg.ngamma ? cfg.gamma_at(best[c]) : 1.0;
  return s;
}

IndexSurface build_surface_reference(const IndexConfig& cfg) {
  cfg.validate();
  const int cells = cfg.T * cfg.np;
  IndexSurface s;
  s.cfg = cfg;
  s.gamma.assign(cells, 1.0);
  std::vector<char> done(cells, 0);
  int remaining = cells;
  for (int j = 0; j < cfg.ngamma && remaining > 0; ++j) {
    const double g = cfg.gamma_at(j);
    const StageTable tbl = stage_backward(g, cfg);
    for (int t = 0; t < cfg.T; ++t) {
      for (int i = 0; i < cfg.np; ++i) {
        const int c = t * cfg.np + i;
        if (done[c]) continue;
        if (initial_value(g, cfg.p_at(i), t, tbl, cfg) <= 0.0) {
          s.gamma[c] = g;
          done[c] = 1;
          --remaining;
        }
      }
    }
  }
  return s;
}

double query_index(const IndexSurface& s, double p, double n) {
  const IndexConfig& c = s.cfg;
  if (!std::isfinite(p) || !std::isfinite(n)) throw std::domain_error("query_index: arguments must be finite");
  if (n >= c.n0 + c.T) return 1.0;
  long stage = std::lround(n - c.n0);
  if (stage < 0) stage = 0;
  if (stage > c.T - 1) stage = c.T - 1;
  double pc = p;
  if (pc < 0.0) pc = 0.0;
  if (pc > 1.0) pc = 1.0;
  const Anchor a = locate(pc, c.np);
  const double* row = s.gamma.data() + static_cast<size_t>(stage) * c.np;
  return lerp_row(row, a.i0, a.w);
}

namespace {

void write_header(const IndexConfig& c, std::ostream& os) {
  char k[32], b[32], n0[32];
  format_double(k, sizeof k, c.k);
  format_double(b, sizeof b, c.beta);
  format_double(n0, sizeof n0, c.n0);
  os << "# k=" << k << " beta=" << b << " T=" << c.T << " n0=" << n0
     << " Np=" << c.np << " Ngamma=" << c.ngamma << "\n";
}

void write_rows(const IndexSurface& s, std::ostream& os, bool diff) {
  char pb[32], gb[32];
  for (int t = 0; t < s.cfg.T; ++t) {
    for (int i = 0; i < s.cfg.np; ++i) {
      const double p = s.cfg.p_at(i);
      const double g = s.at(t, i);
      format_double(pb, sizeof pb, p);
      format_double(gb, sizeof gb, diff ? g - p : g);
      os << t << "," << pb << "," << gb << "\n";
    }
  }
}

}  // namespace

void write_surface_csv(const IndexSurface& s, std::ostream& os) {
  write_header(s.cfg, os);
  os << "stage,p,gamma\n";
  write_rows(s, os, false);
}

void write_surface_diff_csv(const IndexSurface& s, std::ostream& os) {
  write_header(s.cfg, os);
  os << "stage,p,diff\n";
  write_rows(s, os, true);
}

IndexSurface read_surface_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("surface csv: empty input");
  IndexConfig cfg;
  if (std::sscanf(line.c_str(), "# k=%lf beta=%lf T=%d n0=%lf Np=%d Ngamma=%d",
                  &cfg.k, &cfg.beta, &cfg.T, &cfg.n0, &cfg.np, &cfg.ngamma) != 6)
    throw std::runtime_error("surface csv: bad header line");
  cfg.validate();
  if (!std::getline(is, line) || line.rfind("stage,p,", 0) != 0)
    throw std::runtime_error("surface csv: missing column header");
  IndexSurface s;
  s.cfg = cfg;
  s.gamma.resize(static_cast<size_t>(cfg.T) * cfg.np);
  for (int t = 0; t < cfg.T; ++t) {
    for (int i = 0; i < cfg.np; ++i) {
      if (!std::getline(is, line)) throw std::runtime_error("surface csv: truncated data");
      int ts = -1;
      double p = 0.0, g = 0.0;
      if (std::sscanf(line.c_str(), "%d,%lf,%lf", &ts, &p, &g) != 3)
        throw std::runtime_error("surface csv: bad data row");
      if (ts != t || p != cfg.p_at(i))
        throw std::runtime_error("surface csv: row out of order");
      s.gamma[static_cast<size_t>(t) * cfg.np + i] = g;
    }
  }
  return s;
}

}  // namespace drg
