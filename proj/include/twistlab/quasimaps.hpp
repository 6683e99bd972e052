#pragma once

#include <functional>

#include "twistlab/spaces.hpp"

namespace twistlab {

enum class Linearity { Linear, Quasilinear };

// Degree-1 homogeneous map between coordinate spaces, carried as a closure.
// apply0 extends the map by 0 at the origin; quasilinear formulas with logs
// need that convention so commutators and twisted norms stay total.
struct HomogeneousMap {
  std::function<Vec(const Vec&)> f;
  SpaceSpec domain, codomain;
  Linearity tag = Linearity::Quasilinear;

  Vec apply(const Vec& y) const {
    require(y.size() == domain.dim(), "HomogeneousMap: dimension mismatch");
    return f(y);
  }
  Vec apply0(const Vec& y) const {
    if (is_zero(y)) return zeros(codomain.dim());
    return apply(y);
  }
};

// x_k log(|x_k| / ||x||), entrywise, with 0 log 0 = 0.  Undefined on the zero
// vector and for p = inf.
inline Vec kalton_peck(const SpaceSpec& s, const Vec& x) {
  require(s.p < kInf && s.kind != SpaceKind::Sup, "kalton_peck: needs p < inf");
  require(x.size() == s.dim(), "kalton_peck: dimension mismatch");
  check_finite(x, "kalton_peck");
  require(!is_zero(x), "kalton_peck: zero vector");
  const double nx = norm(s, x);
  Vec out(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) continue;  // 0 log 0 = 0
    out[k] = x[k] * std::log(std::abs(x[k]) / nx);
  }
  return out;
}

inline HomogeneousMap kalton_peck_map(const SpaceSpec& s) {
  HomogeneousMap m;
  m.domain = s;
  m.codomain = s;
  m.tag = Linearity::Quasilinear;
  m.f = [s](const Vec& x) -> Vec {
    if (is_zero(x)) return zeros(s.dim());
    return kalton_peck(s, x);
  };
  return m;
}

inline HomogeneousMap zero_map(const SpaceSpec& dom, const SpaceSpec& cod) {
  HomogeneousMap m;
  m.domain = dom;
  m.codomain = cod;
  m.tag = Linearity::Linear;
  m.f = [n = cod.dim()](const Vec&) { return zeros(n); };
  return m;
}

inline HomogeneousMap linear_map(std::function<Vec(const Vec&)> f, const SpaceSpec& dom,
                                 const SpaceSpec& cod) {
  HomogeneousMap m;
  m.domain = dom;
  m.codomain = cod;
  m.tag = Linearity::Linear;
  m.f = std::move(f);
  return m;
}

// ---- twisted sum -----------------------------------------------------------

struct TwistedSum {
  SpaceSpec X, Y;
  HomogeneousMap omega;  // Y -> X
};

inline TwistedSum twisted_sum(const SpaceSpec& X, const SpaceSpec& Y, HomogeneousMap omega) {
  require(omega.domain.dim() == Y.dim() && omega.codomain.dim() == X.dim(),
          "twisted_sum: omega shape mismatch");
  return TwistedSum{X, Y, std::move(omega)};
}

// ||(x, y)|| = ||x - Omega(y)||_X + ||y||_Y
inline double twisted_norm(const TwistedSum& ts, const Vec& x, const Vec& y) {
  require(x.size() == ts.X.dim() && y.size() == ts.Y.dim(), "twisted_norm: dimension mismatch");
  return norm(ts.X, sub(x, ts.omega.apply0(y))) + norm(ts.Y, y);
}

// ---- sampled constants -----------------------------------------------------
//
// Sampling gives certified lower bounds for the suprema; reports carry the
// seed and the witnessing sample so every value can be replayed.

struct EstimatorReport {
  std::uint64_t seed = 0;
  int n_samples = 0;
  double max_ratio = 0.0;
  std::vector<Vec> argmax_sample;  // the witnessing tuple
};

// sup ||Omega(y + y') - Omega(y) - Omega(y')|| / (||y|| + ||y'||)
inline double quasilinearity_ratio(const HomogeneousMap& omega, const Vec& y, const Vec& yp) {
  const double den = norm(omega.domain, y) + norm(omega.domain, yp);
  if (den == 0.0) return 0.0;
  Vec defect = sub(omega.apply0(add(y, yp)), add(omega.apply0(y), omega.apply0(yp)));
  return norm(omega.codomain, defect) / den;
}

inline EstimatorReport quasilinearity_constant(const HomogeneousMap& omega,
                                               const std::vector<std::pair<Vec, Vec>>& pairs,
                                               std::uint64_t seed = 0) {
  EstimatorReport rep;
  rep.seed = seed;
  rep.n_samples = static_cast<int>(pairs.size());
  for (const auto& [y, yp] : pairs) {
    const double r = quasilinearity_ratio(omega, y, yp);
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.argmax_sample = {y, yp};
    }
  }
  return rep;
}

inline EstimatorReport quasilinearity_constant(const HomogeneousMap& omega, int n_samples,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_samples));
  const std::size_t n = omega.domain.dim();
  for (int i = 0; i < n_samples; ++i) pairs.emplace_back(rng.normal_vec(n), rng.normal_vec(n));
  return quasilinearity_constant(omega, pairs, seed);
}

// sup || sum_i Omega(y_i) || / sum_i ||y_i|| over tuples with sum_i y_i = 0
inline double zero_linearity_ratio(const HomogeneousMap& omega, const std::vector<Vec>& tuple) {
  Vec total = zeros(omega.domain.dim());
  Vec image = zeros(omega.codomain.dim());
  double den = 0.0;
  for (const Vec& y : tuple) {
    axpy(1.0, y, total);
    axpy(1.0, omega.apply0(y), image);
    den += norm(omega.domain, y);
  }
  require(max_abs(total) <= 1e-9 * std::max(1.0, den), "zero_linearity_ratio: tuple must sum to 0");
  if (den == 0.0) return 0.0;
  return norm(omega.codomain, image) / den;
}

inline EstimatorReport zero_linearity_constant(const HomogeneousMap& omega,
                                               const std::vector<std::vector<Vec>>& tuples,
                                               std::uint64_t seed = 0) {
  EstimatorReport rep;
  rep.seed = seed;
  rep.n_samples = static_cast<int>(tuples.size());
  for (const auto& tuple : tuples) {
    const double r = zero_linearity_ratio(omega, tuple);
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.argmax_sample = tuple;
    }
  }
  return rep;
}

// Random balanced tuples: m-1 free vectors plus the balancing tail.
inline std::vector<std::vector<Vec>> balanced_tuples(std::size_t dim, int n_tuples,
                                                     std::uint64_t seed, int max_len = 5) {
  Rng rng(seed);
  std::vector<std::vector<Vec>> tuples;
  tuples.reserve(static_cast<std::size_t>(n_tuples));
  for (int i = 0; i < n_tuples; ++i) {
    const int m = rng.uniform_int(2, max_len);
    std::vector<Vec> tuple;
    Vec total = zeros(dim);
    for (int j = 0; j + 1 < m; ++j) {
      Vec y = rng.normal_vec(dim);
      axpy(1.0, y, total);
      tuple.push_back(std::move(y));
    }
    tuple.push_back(scale(-1.0, total));
    tuples.push_back(std::move(tuple));
  }
  return tuples;
}

inline EstimatorReport zero_linearity_constant(const HomogeneousMap& omega, int n_tuples,
                                               std::uint64_t seed) {
  return zero_linearity_constant(omega, balanced_tuples(omega.domain.dim(), n_tuples, seed), seed);
}

}  // namespace twistlab
