#pragma once

#include <algorithm>

#include "twistlab/core.hpp"

namespace twistlab {

// Finite coordinate models of the function spaces the lab works on.
//
//   WeightedLp      ||x|| = (sum_k w_k |x_k|^p)^(1/p),  p = inf: max_k w_k |x_k|
//   Sup             ||x|| = max_k |x_k|
//   DiscretizedLp   level-m grid on [0,1): 2^m cells of mass 2^-m,
//                   ||f|| = (2^-m sum_k |f_k|^p)^(1/p),  p = inf: max_k |f_k|
//
// Weights sit inside the sum (they are a measure, not a multiplier).
enum class SpaceKind { WeightedLp, Sup, DiscretizedLp };

struct SpaceSpec {
  SpaceKind kind = SpaceKind::WeightedLp;
  double p = 2.0;   // in [1, inf]
  Vec weights;      // WeightedLp only
  int level = 0;    // DiscretizedLp only
  std::size_t n = 0;

  std::size_t dim() const { return n; }

  static SpaceSpec weighted_lp(double p, Vec w) {
    require(p >= 1.0, "weighted_lp: p < 1");
    require(!w.empty(), "weighted_lp: empty weights");
    for (double v : w) require(v > 0.0 && std::isfinite(v), "weighted_lp: weights must be positive finite");
    SpaceSpec s;
    s.kind = SpaceKind::WeightedLp;
    s.p = p;
    s.n = w.size();
    s.weights = std::move(w);
    return s;
  }
  static SpaceSpec lp(double p, std::size_t n) { return weighted_lp(p, Vec(n, 1.0)); }
  static SpaceSpec sup(std::size_t n) {
    require(n > 0, "sup: empty");
    SpaceSpec s;
    s.kind = SpaceKind::Sup;
    s.p = kInf;
    s.n = n;
    return s;
  }
  static SpaceSpec discretized_lp(double p, int level) {
    require(p >= 1.0, "discretized_lp: p < 1");
    require(level >= 0 && level <= 24, "discretized_lp: level out of range");
    SpaceSpec s;
    s.kind = SpaceKind::DiscretizedLp;
    s.p = p;
    s.level = level;
    s.n = std::size_t{1} << level;
    return s;
  }
};

inline double conjugate_exponent(double p) {
  require(p >= 1.0, "conjugate_exponent: p < 1");
  if (p == 1.0) return kInf;
  if (p == kInf) return 1.0;
  return p / (p - 1.0);
}

namespace detail {

// Summing in ascending order makes the result independent of input order,
// so norms commute bit-for-bit with permutations of equal-weight entries.
inline double sorted_sum(Vec& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

inline double p_power_sum(const Vec& x, const Vec* w, double p) {
  Vec terms(x.size());
  if (p == 1.0) {
    for (std::size_t k = 0; k < x.size(); ++k) terms[k] = (w ? (*w)[k] : 1.0) * std::abs(x[k]);
  } else if (p == 2.0) {
    for (std::size_t k = 0; k < x.size(); ++k) terms[k] = (w ? (*w)[k] : 1.0) * x[k] * x[k];
  } else {
    for (std::size_t k = 0; k < x.size(); ++k)
      terms[k] = (w ? (*w)[k] : 1.0) * std::pow(std::abs(x[k]), p);
  }
  return sorted_sum(terms);
}

}  // namespace detail

inline double norm(const SpaceSpec& s, const Vec& x) {
  require(x.size() == s.dim(), "norm: dimension mismatch");
  check_finite(x, "norm");
  switch (s.kind) {
    case SpaceKind::Sup:
      return max_abs(x);
    case SpaceKind::WeightedLp: {
      if (s.p == kInf) {
        double m = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, s.weights[k] * std::abs(x[k]));
        return m;
      }
      double sum = detail::p_power_sum(x, &s.weights, s.p);
      if (s.p == 1.0) return sum;
      if (s.p == 2.0) return std::sqrt(sum);
      return std::pow(sum, 1.0 / s.p);
    }
    case SpaceKind::DiscretizedLp: {
      if (s.p == kInf) return max_abs(x);
      const double cell = std::ldexp(1.0, -s.level);  // 2^-m
      double sum = cell * detail::p_power_sum(x, nullptr, s.p);
      if (s.p == 1.0) return sum;
      if (s.p == 2.0) return std::sqrt(sum);
      return std::pow(sum, 1.0 / s.p);
    }
  }
  throw std::logic_error("norm: bad kind");
}

// One subgradient of the norm at y (any element of the subdifferential).
inline Vec norm_subgradient(const SpaceSpec& s, const Vec& y) {
  const std::size_t n = s.dim();
  require(y.size() == n, "norm_subgradient: dimension mismatch");
  Vec g(n, 0.0);
  const double nv = norm(s, y);
  if (nv == 0.0) return g;
  auto weight_at = [&](std::size_t k) -> double {
    if (s.kind == SpaceKind::WeightedLp) return s.weights[k];
    if (s.kind == SpaceKind::DiscretizedLp) return std::ldexp(1.0, -s.level);
    return 1.0;
  };
  const double p = (s.kind == SpaceKind::Sup) ? kInf : s.p;
  if (p == kInf) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = (s.kind == SpaceKind::WeightedLp ? s.weights[k] : 1.0) * std::abs(y[k]);
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    g[arg] = (y[arg] > 0 ? 1.0 : (y[arg] < 0 ? -1.0 : 0.0)) *
             (s.kind == SpaceKind::WeightedLp ? s.weights[arg] : 1.0);
    return g;
  }
  if (p == 1.0) {
    for (std::size_t k = 0; k < n; ++k)
      g[k] = weight_at(k) * (y[k] > 0 ? 1.0 : (y[k] < 0 ? -1.0 : 0.0));
    return g;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (y[k] == 0.0) continue;
    g[k] = weight_at(k) * std::pow(std::abs(y[k]), p - 1.0) * (y[k] > 0 ? 1.0 : -1.0) /
           std::pow(nv, p - 1.0);
  }
  return g;
}

// ---- sum norm of a couple --------------------------------------------------
//
// ||x||_{X0+X1} = inf { ||x0||_0 + ||x1||_1 : x = x0 + x1 }, a convex problem
// solved by subgradient descent with diminishing steps.  The trivial
// splittings are always probed, so the result never exceeds
// min(||x||_0, ||x||_1).

struct SumNormResult {
  double value = 0.0;
  Vec x0;  // minimizing head; tail is x - x0
  int iterations = 0;
};

inline SumNormResult sum_norm(const SpaceSpec& X0, const SpaceSpec& X1, const Vec& x,
                              int budget = 4000) {
  require(X0.dim() == X1.dim(), "sum_norm: couple dimension mismatch");
  require(x.size() == X0.dim(), "sum_norm: vector dimension mismatch");
  check_finite(x, "sum_norm");
  auto objective = [&](const Vec& a) { return norm(X0, a) + norm(X1, sub(x, a)); };

  SumNormResult out;
  out.x0 = x;
  out.value = norm(X0, x);  // x0 = x
  {
    const double v0 = norm(X1, x);  // x0 = 0
    if (v0 < out.value) {
      out.value = v0;
      out.x0 = zeros(x.size());
    }
  }
  if (is_zero(x)) return out;

  Vec a = scale(0.5, x);
  {
    const double v = objective(a);
    if (v < out.value) {
      out.value = v;
      out.x0 = a;
    }
  }
  const double step0 = 0.5 * max_abs(x);
  for (int k = 0; k < budget; ++k) {
    Vec g0 = norm_subgradient(X0, a);
    Vec g1 = norm_subgradient(X1, sub(x, a));
    Vec g = sub(g0, g1);
    const double gn = std::sqrt(std::max(dot(g, g), 1e-30));
    const double step = step0 / (gn * std::sqrt(static_cast<double>(k + 1)));
    axpy(-step, g, a);
    const double v = objective(a);
    if (v < out.value) {
      out.value = v;
      out.x0 = a;
    }
    ++out.iterations;
  }
  return out;
}

}  // namespace twistlab
