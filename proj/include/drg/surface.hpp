#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "drg/nle.hpp"

namespace drg {

enum class ExecMode { Serial, Parallel };

// Grid description for the index surface. Both grids are uniform on [0,1]
// including the endpoints.
struct IndexConfig {
  double k = 0.5;      // credible-band mass, in [0,1)
  double beta = 0.9999;  // discount, in (0,1)
  int T = 200;         // horizon (number of stages), >= 1
  double n0 = 1.0;     // prior pseudo-count, > 0
  int np = 101;        // posterior-mean grid points, >= 2
  int ngamma = 201;    // index grid points, >= 2

  void validate() const;
  double p_at(int i) const { return static_cast<double>(i) / (np - 1); }
  double gamma_at(int j) const { return static_cast<double>(j) / (ngamma - 1); }
};

// Value tables for one index candidate gamma: v[t][i] over stages t in [0,T]
// (stage T identically zero) and the p grid. Entries are the clipped
// continuation values, nonpositive by construction.
struct StageTable {
  double gamma = 0.0;
  int T = 0;
  int np = 0;
  std::vector<double> v;  // (T+1) * np, stage-major
  double at(int t, int i) const { return v[static_cast<size_t>(t) * np + i]; }
};

// The index surface: for each stage t in [0,T-1] and grid point p, the
// smallest grid gamma whose stopping problem is no longer profitable.
struct IndexSurface {
  IndexConfig cfg;
  std::vector<double> gamma;  // T * np, stage-major
  double at(int t, int i) const { return gamma[static_cast<size_t>(t) * cfg.np + i]; }
};

// Running maximum of the index values seen so far (the prevailing charge).
class PrevailingTracker {
 public:
  double update(double g) {
    if (g > value_) value_ = g;
    return value_;
  }
  double current() const { return value_; }

 private:
  double value_ = -std::numeric_limits<double>::infinity();
};

/** Backward recursion of the clipped continuation values for one gamma.
 *
 * v[T] = 0; for t from T-1 down to 0 and each grid p,
 *   v[t][p] = min{0, sup over the credible band at (p, n0+t) of
 *                   (outcome - gamma) + beta * v[t+1][p']},
 * with p' the posterior mean after the outcome, read from the t+1 row by
 * linear interpolation.
 */
StageTable stage_backward(double gamma, const IndexConfig& cfg);

/** First-step value U at (p, stage): the same one-step supremum, without the
 * min-0 clip (the first play is mandatory). Nonincreasing in gamma; the index
 * at (p, stage) is the smallest grid gamma with U <= 0.
 */
double initial_value(double gamma, double p, int stage, const StageTable& tbl,
                     const IndexConfig& cfg);

/** Build the full index surface.
 *
 * Streaming kernel: candidate gammas are independent backward sweeps, run in
 * parallel under ExecMode::Parallel. Serial and parallel modes produce
 * bitwise-identical surfaces.
 */
IndexSurface build_surface(const IndexConfig& cfg, ExecMode mode = ExecMode::Parallel);

// Reference composition of stage_backward + initial_value + threshold scan,
// kept serial and unfused for testing the streaming kernel against.
IndexSurface build_surface_reference(const IndexConfig& cfg);

/** Query the surface at posterior state (p, n).
 *
 * n maps to stage round(n - n0), clamped to [0, T-1]; n >= n0 + T saturates
 * at the cost bound 1. p is clamped to [0,1] and interpolated linearly;
 * queries at grid knots reproduce stored values exactly.
 */
double query_index(const IndexSurface& s, double p, double n);

// CSV layer. Headers carry the full resolved configuration; doubles are
// written with 17 significant digits so a read round-trips bit-exactly.
void write_surface_csv(const IndexSurface& s, std::ostream& os);
void write_surface_diff_csv(const IndexSurface& s, std::ostream& os);  // gamma - p
IndexSurface read_surface_csv(std::istream& is);

}  // namespace drg
