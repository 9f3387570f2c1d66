#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace drg {

// SplitMix64 step. Used only to spread seeds, not as the sampling engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for a (root, a, b, c) coordinate tuple, so every
// (episode, policy, role) gets its own independent stream. Chaining the
// coordinates through SplitMix64 keeps distinct tuples decorrelated.
inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = root;
  std::uint64_t h = splitmix64(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b + 0xbf58476d1ce4e5b9ULL;
  h ^= splitmix64(s);
  s ^= c + 0x94d049bb133111ebULL;
  h ^= splitmix64(s);
  return h;
}

// mt19937_64-backed stream with hand-rolled transforms. The standard engine
// is fully specified, and the transforms below avoid std::*_distribution,
// whose output is implementation-defined; together that makes every draw
// reproducible from the seed alone.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

namespace detail {
// Marsaglia-Tsang rejection sampler, valid for shape >= 1.
template <class G>
double gamma_shape_ge1(G& g, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = g.normal();
    double t = 1.0 + c * z;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = g.uniform();
    double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}
}  // namespace detail

// ln of a Gamma(shape, 1) draw. Working in logs keeps shape << 1 usable:
// the boosting identity X = Y * U^(1/shape) underflows long before its log does.
template <class G>
double gamma_log_sample(G& g, double shape) {
  if (shape >= 1.0) return std::log(detail::gamma_shape_ge1(g, shape));
  double y = detail::gamma_shape_ge1(g, shape + 1.0);
  return std::log(y) + std::log(g.uniform()) / shape;
}

template <class G>
double gamma_sample(G& g, double shape) {
  return std::exp(gamma_log_sample(g, shape));
}

// Beta(a,b) draw as a Gamma ratio, assembled in log space. The result is
// clamped to the largest representable open sub-interval of (0,1): extreme
// shape pairs push the exact ratio below the smallest positive double.
template <class G>
double beta_sample(G& g, double a, double b) {
  double la = gamma_log_sample(g, a);
  double lb = gamma_log_sample(g, b);
  double d = lb - la;  // x = 1 / (1 + e^d)
  double x;
  if (d >= 0.0) {
    double e = std::exp(-d);
    x = e / (1.0 + e);
  } else {
    x = 1.0 / (1.0 + std::exp(d));
  }
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - 0x1.0p-53;
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  return x;
}

}  // namespace drg
