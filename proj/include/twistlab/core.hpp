#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistlab {

using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void check_finite(const Vec& x, const char* who) {
  if (!all_finite(x)) throw std::invalid_argument(std::string(who) + ": non-finite entry");
}

// ---- small vector algebra -------------------------------------------------

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec add(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "add: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "sub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(double c, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline void axpy(double c, const Vec& x, Vec& y) {
  require(x.size() == y.size(), "axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline bool is_zero(const Vec& a) {
  for (double v : a)
    if (v != 0.0) return false;
  return true;
}

inline Vec basis_vector(std::size_t n, std::size_t i) {
  Vec e(n, 0.0);
  e.at(i) = 1.0;
  return e;
}

// ---- seeded randomness ----------------------------------------------------
//
// Every stochastic routine takes an explicit 64-bit seed.  Sub-streams are
// derived by mixing, so parallel or reordered consumers stay reproducible.

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(eng_);
  }
  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(eng_);
  }
  int uniform_int(int a, int b) {  // inclusive bounds
    std::uniform_int_distribution<int> d(a, b);
    return d(eng_);
  }
  double sign() { return uniform_int(0, 1) == 0 ? -1.0 : 1.0; }

  Vec normal_vec(std::size_t n) {
    Vec v(n);
    for (auto& t : v) t = normal();
    return v;
  }
  Vec sign_vec(std::size_t n) {
    Vec v(n);
    for (auto& t : v) t = sign();
    return v;
  }
  // entries bounded away from zero; log-friendly test vectors
  Vec spread_vec(std::size_t n, double lo = 0.1, double hi = 2.0) {
    Vec v(n);
    for (auto& t : v) t = sign() * uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// Iterate all sign patterns in {-1,+1}^n.  fn receives the pattern vector.
template <class F>
inline void for_each_sign_pattern(std::size_t n, F&& fn) {
  require(n <= 20, "for_each_sign_pattern: n > 20 (enumeration refused)");
  Vec eps(n);
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < n; ++i) eps[i] = (mask >> i) & 1 ? -1.0 : 1.0;
    fn(const_cast<const Vec&>(eps));
  }
}

}  // namespace twistlab
