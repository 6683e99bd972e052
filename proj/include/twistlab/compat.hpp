#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "twistlab/core.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/quasimaps.hpp"
#include "twistlab/spaces.hpp"

namespace twistlab {

using VecMap = std::function<Vec(const Vec&)>;

inline VecMap identity_op() {
  return [](const Vec& x) { return x; };
}
inline VecMap zero_op(std::size_t out_dim) {
  return [out_dim](const Vec&) { return zeros(out_dim); };
}
inline VecMap matrix_op(Mat m) {
  return [m = std::move(m)](const Vec& x) { return m.apply(x); };
}
inline VecMap diag_op(Vec d) {
  return [d = std::move(d)](const Vec& x) {
    require(x.size() == d.size(), "diag_op: size mismatch");
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
    return y;
  };
}

// One sampled (semi)group element with everything an extension of actions
// needs: u acts on the subspace side X, v on the quotient side Y, d is the
// derivation component Y -> X.  Empty std::functions stand for the zero map
// (d) and for "not supplied" (the inverses, which only averaging requires).
struct GroupElementMaps {
  VecMap u;
  VecMap u_inv;
  VecMap v;
  VecMap v_inv;
  VecMap d;
  std::string name;
};

inline Vec apply_d(const GroupElementMaps& g, const Vec& y, std::size_t out_dim) {
  if (!g.d) return zeros(out_dim);
  return g.d(y);
}

// [u, Omega, v] y = u(Omega y) - Omega(v y).  Omega is extended by 0 at the
// origin, so the commutator stays defined when v kills y: the result is then
// just u(Omega y).
inline Vec commutator(const VecMap& u, const HomogeneousMap& omega, const VecMap& v,
                      const Vec& y) {
  return sub(u(omega.apply0(y)), omega.apply0(v(y)));
}

// ---- operator-norm machinery ----------------------------------------------

enum class NormStrategy { ExactLinear, Sampling, SphereSearch };

struct SearchOptions {
  NormStrategy strategy = NormStrategy::SphereSearch;
  std::uint64_t seed = 42;
  std::size_t n_samples = 1000;  // sampled candidates before any ascent
  std::size_t restarts = 64;
  std::size_t steps = 200;
  double step0 = 0.1;
  std::vector<Vec> starts;  // extra caller-designed start vectors
};

// Search strategies return certified lower bounds: `value` was attained at
// `argmax`, so it can be replayed.  Exact strategies set `exact`.
struct NormEstimate {
  double value = 0.0;
  bool exact = false;
  std::uint64_t seed = 0;
  std::size_t n_evals = 0;
  Vec argmax;
};

namespace detail {

struct WeightedForm {
  double p;
  Vec w;
};

// Every SpaceSpec norm is a weighted p-norm: the dyadic grid contributes the
// uniform cell mass, and the two sup-type norms have unit multiplier weights.
inline WeightedForm as_weighted(const SpaceSpec& s) {
  switch (s.kind) {
    case SpaceKind::Sup:
      return {kInf, Vec(s.dim(), 1.0)};
    case SpaceKind::WeightedLp:
      return {s.p, s.weights};
    case SpaceKind::DiscretizedLp:
      if (s.p == kInf) return {kInf, Vec(s.dim(), 1.0)};
      return {s.p, Vec(s.dim(), std::ldexp(1.0, -s.level))};
  }
  throw std::logic_error("as_weighted: bad kind");
}

inline bool is_diagonal(const Mat& M) {
  if (M.rows != M.cols) return false;
  for (std::size_t i = 0; i < M.rows; ++i)
    for (std::size_t j = 0; j < M.cols; ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

// Scale-invariant maximization of num(y)/den(y) by multi-start ascent.
// `grad` may be empty; then proposals are random directions (still a valid
// lower-bound search, just derivative-free).  Deterministic under seed, and
// the restart merge is a plain max, so scheduling cannot change the result.
struct RatioProblem {
  std::function<double(const Vec&)> num;
  std::function<double(const Vec&)> den;
  std::function<Vec(const Vec&)> grad;  // ascent direction of num/den at y, optional
  std::size_t dim = 0;
};

inline NormEstimate ascend_ratio(const RatioProblem& prob, const SearchOptions& opt,
                                 const std::vector<Vec>& designed) {
  NormEstimate best;
  best.seed = opt.seed;
  auto ratio = [&](const Vec& y) -> double {
    const double dn = prob.den(y);
    if (!(dn > 1e-280)) return -1.0;
    ++best.n_evals;
    return prob.num(y) / dn;
  };
  auto consider = [&](const Vec& y) {
    const double r = ratio(y);
    if (r > best.value) {
      best.value = r;
      best.argmax = y;
    }
  };

  for (const Vec& y : designed)
    if (y.size() == prob.dim) consider(y);
  for (const Vec& y : opt.starts)
    if (y.size() == prob.dim) consider(y);

  Rng sampler(mix_seed(opt.seed, 1));
  for (std::size_t i = 0; i < opt.n_samples; ++i) {
    switch (i % 3) {
      case 0: consider(sampler.normal_vec(prob.dim)); break;
      case 1: consider(sampler.sign_vec(prob.dim)); break;
      default: consider(sampler.spread_vec(prob.dim)); break;
    }
  }

  for (std::size_t r = 0; r < opt.restarts; ++r) {
    Rng rng(mix_seed(opt.seed, 1000 + r));
    Vec y = (r == 0 && !best.argmax.empty()) ? best.argmax : rng.normal_vec(prob.dim);
    double dn = prob.den(y);
    if (!(dn > 1e-280)) continue;
    y = scale(1.0 / dn, y);
    double cur = ratio(y);
    if (cur < 0.0) continue;
    double step = opt.step0;
    for (std::size_t k = 0; k < opt.steps && step > 1e-8; ++k) {
      Vec dir = prob.grad ? prob.grad(y) : rng.normal_vec(prob.dim);
      const double dl = l2_norm(dir);
      if (dl == 0.0) break;
      Vec y2 = add(y, scale(step / dl, dir));
      const double dn2 = prob.den(y2);
      if (!(dn2 > 1e-280)) {
        step *= 0.5;
        continue;
      }
      y2 = scale(1.0 / dn2, y2);
      const double r2 = ratio(y2);
      if (r2 > cur) {
        y = y2;
        cur = r2;
        step = std::min(opt.step0, step * 1.5);
      } else {
        step *= 0.5;  // backtrack
      }
    }
    if (cur > best.value) {
      best.value = cur;
      best.argmax = y;
    }
  }
  return best;
}

}  // namespace detail

// Exact operator norm of a matrix between the supported space pairs.  The
// menu is deliberately small: domain p = 1 (extreme points are scaled basis
// vectors, any codomain), 2 -> 2 (singular value after diagonal conjugation),
// 2 -> sup and sup -> sup (row formulas), and diagonal maps between spaces of
// a common exponent.  Anything else throws rather than pretend.
inline NormEstimate exact_linear_norm(const Mat& M, const SpaceSpec& dom, const SpaceSpec& cod) {
  require(M.cols == dom.dim() && M.rows == cod.dim(), "exact_linear_norm: shape mismatch");
  const auto df = detail::as_weighted(dom);
  const auto cf = detail::as_weighted(cod);
  NormEstimate out;
  out.exact = true;

  if (detail::is_diagonal(M) && df.p == cf.p) {
    std::size_t kbest = 0;
    double vbest = 0.0;
    for (std::size_t k = 0; k < M.rows; ++k) {
      const double ratio = (df.p == kInf) ? cf.w[k] / df.w[k]
                                          : std::pow(cf.w[k] / df.w[k], 1.0 / df.p);
      const double v = std::abs(M(k, k)) * ratio;
      if (v > vbest) {
        vbest = v;
        kbest = k;
      }
    }
    out.value = vbest;
    out.argmax = basis_vector(M.cols, kbest);
    return out;
  }

  if (df.p == 1.0) {
    std::size_t jbest = 0;
    double vbest = 0.0;
    for (std::size_t j = 0; j < M.cols; ++j) {
      Vec col(M.rows);
      for (std::size_t i = 0; i < M.rows; ++i) col[i] = M(i, j);
      const double v = norm(cod, col) / df.w[j];
      if (v > vbest) {
        vbest = v;
        jbest = j;
      }
    }
    out.value = vbest;
    out.argmax = scale(1.0 / df.w[jbest], basis_vector(M.cols, jbest));
    return out;
  }

  if (df.p == 2.0 && cf.p == 2.0) {
    Mat scaled = M;
    for (std::size_t i = 0; i < M.rows; ++i)
      for (std::size_t j = 0; j < M.cols; ++j)
        scaled(i, j) = std::sqrt(cf.w[i]) * M(i, j) / std::sqrt(df.w[j]);
    out.value = spectral_norm(scaled);
    return out;
  }

  if (df.p == 2.0 && cf.p == kInf) {
    std::size_t ibest = 0;
    double vbest = 0.0;
    for (std::size_t i = 0; i < M.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < M.cols; ++j) s += M(i, j) * M(i, j) / df.w[j];
      const double v = cf.w[i] * std::sqrt(s);
      if (v > vbest) {
        vbest = v;
        ibest = i;
      }
    }
    out.value = vbest;
    Vec y(M.cols, 0.0);
    for (std::size_t j = 0; j < M.cols; ++j) y[j] = M(ibest, j) / df.w[j];
    out.argmax = y;
    return out;
  }

  if (df.p == kInf && cf.p == kInf) {
    std::size_t ibest = 0;
    double vbest = 0.0;
    for (std::size_t i = 0; i < M.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < M.cols; ++j) s += std::abs(M(i, j)) / df.w[j];
      const double v = cf.w[i] * s;
      if (v > vbest) {
        vbest = v;
        ibest = i;
      }
    }
    out.value = vbest;
    Vec y(M.cols, 0.0);
    for (std::size_t j = 0; j < M.cols; ++j)
      y[j] = (M(ibest, j) >= 0.0 ? 1.0 : -1.0) / df.w[j];
    out.argmax = y;
    return out;
  }

  require(false, "exact_linear_norm: unsupported exact operator norm case");
  return out;  // unreachable
}

// Multiplier norm of a diagonal map composed after a surjective isometry of a
// fixed-exponent space: the isometry drops out, leaving max_k |c_k|.
inline double diagonal_after_isometry_norm(const Vec& multiplier) {
  return max_abs(multiplier);
}

inline NormEstimate homogeneous_norm(const Mat& M, const SpaceSpec& dom, const SpaceSpec& cod,
                                     const SearchOptions& opt) {
  if (opt.strategy == NormStrategy::ExactLinear) return exact_linear_norm(M, dom, cod);

  detail::RatioProblem prob;
  prob.dim = dom.dim();
  prob.num = [&M, cod](const Vec& y) { return norm(cod, M.apply(y)); };
  prob.den = [dom](const Vec& y) { return norm(dom, y); };
  if (opt.strategy == NormStrategy::SphereSearch) {
    // subgradient of log(num/den): M^T s_cod / num - s_dom / den
    Mat Mt = M.transpose();
    prob.grad = [&M, Mt, dom, cod](const Vec& y) -> Vec {
      Vec my = M.apply(y);
      const double nu = norm(cod, my);
      const double de = norm(dom, y);
      if (nu <= 0.0 || de <= 0.0) return zeros(y.size());
      Vec g = Mt.apply(norm_subgradient(cod, my));
      axpy(-nu / de, norm_subgradient(dom, y), g);
      return g;
    };
  }
  std::vector<Vec> designed;
  designed.reserve(dom.dim());
  for (std::size_t k = 0; k < dom.dim(); ++k) designed.push_back(basis_vector(dom.dim(), k));
  SearchOptions o = opt;
  if (opt.strategy == NormStrategy::Sampling) {
    o.restarts = 0;
    o.steps = 0;
  }
  return detail::ascend_ratio(prob, o, designed);
}

// Closure variant.  ExactLinear materializes the matrix column by column and
// therefore requires the map to actually be linear; the search strategies are
// derivative-free here.
inline NormEstimate homogeneous_norm(const VecMap& f, const SpaceSpec& dom, const SpaceSpec& cod,
                                     const SearchOptions& opt) {
  if (opt.strategy == NormStrategy::ExactLinear) {
    std::vector<Vec> cols;
    cols.reserve(dom.dim());
    for (std::size_t j = 0; j < dom.dim(); ++j) cols.push_back(f(basis_vector(dom.dim(), j)));
    return exact_linear_norm(Mat::from_columns(cols), dom, cod);
  }
  detail::RatioProblem prob;
  prob.dim = dom.dim();
  prob.num = [&f, cod](const Vec& y) { return norm(cod, f(y)); };
  prob.den = [dom](const Vec& y) { return norm(dom, y); };
  std::vector<Vec> designed;
  designed.reserve(dom.dim());
  for (std::size_t k = 0; k < dom.dim(); ++k) designed.push_back(basis_vector(dom.dim(), k));
  SearchOptions o = opt;
  if (opt.strategy == NormStrategy::Sampling) {
    o.restarts = 0;
    o.steps = 0;
  }
  return detail::ascend_ratio(prob, o, designed);
}

inline NormEstimate homogeneous_norm(const HomogeneousMap& m, const SearchOptions& opt) {
  return homogeneous_norm([&m](const Vec& y) { return m.apply0(y); }, m.domain, m.codomain, opt);
}

// ---- families of elements ---------------------------------------------------

// Extension data (Omega, d): the quasi-linear map plus, per sampled group
// element, its derivation component.
struct TwistedPair {
  HomogeneousMap omega;
  std::vector<GroupElementMaps> elements;
};

struct FamilyBound {
  double value = 0.0;
  std::size_t argmax = 0;           // element index attaining the max
  std::vector<double> per_element;
  NormEstimate detail;              // estimate metadata of the argmax element
};

// sup_g || [u(g), Omega, v(g)] ||, over the sampled elements.  Zero certifies
// equivariance on the sample.
inline FamilyBound centralizer_constant(const std::vector<GroupElementMaps>& gs,
                                        const HomogeneousMap& omega, const SearchOptions& opt) {
  FamilyBound out;
  out.per_element.reserve(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = gs[i];
    VecMap f = [&g, &omega](const Vec& y) { return commutator(g.u, omega, g.v, y); };
    SearchOptions o = opt;
    o.seed = mix_seed(opt.seed, i);
    NormEstimate est = homogeneous_norm(f, omega.domain, omega.codomain, o);
    out.per_element.push_back(est.value);
    if (est.value >= out.value) {
      out.value = est.value;
      out.argmax = i;
      out.detail = est;
    }
  }
  return out;
}

// sup_g || [u(g), Omega, v(g)] + d(g) ||.  With d = 0 this is the centralizer
// constant; the closed-form extension families drive it to zero.
inline FamilyBound compatibility_defect(const TwistedPair& pair, const SearchOptions& opt) {
  FamilyBound out;
  const std::size_t nx = pair.omega.codomain.dim();
  out.per_element.reserve(pair.elements.size());
  for (std::size_t i = 0; i < pair.elements.size(); ++i) {
    const auto& g = pair.elements[i];
    VecMap f = [&g, &pair, nx](const Vec& y) {
      return add(commutator(g.u, pair.omega, g.v, y), apply_d(g, y, nx));
    };
    SearchOptions o = opt;
    o.seed = mix_seed(opt.seed, i);
    NormEstimate est = homogeneous_norm(f, pair.omega.domain, pair.omega.codomain, o);
    out.per_element.push_back(est.value);
    if (est.value >= out.value) {
      out.value = est.value;
      out.argmax = i;
      out.detail = est;
    }
  }
  return out;
}

// ---- triangular representations ---------------------------------------------

// lambda(g)(x, y) = (u(g) x + d(g) y, v(g) y) acting on X +_Omega Y.
struct TriangularRep {
  TwistedSum sum;
  std::vector<GroupElementMaps> elements;
};

inline std::pair<Vec, Vec> triangular_apply(const GroupElementMaps& g, const TwistedSum& sum,
                                            const Vec& x, const Vec& y) {
  Vec lx = add(g.u(x), apply_d(g, y, sum.X.dim()));
  return {lx, g.v(y)};
}

// Best found ratio of twisted quasi-norms under lambda(g).  When the
// compatibility defect of g vanishes and u(g), v(g) are isometries, the true
// supremum is 1 and the search confirms it to within the sampling tolerance;
// the designed starts include the commutator-probing pairs (Omega y, y) whose
// images expose any defect directly.
inline NormEstimate triangular_norm(const TriangularRep& rep, std::size_t index,
                                    const SearchOptions& opt) {
  require(index < rep.elements.size(), "triangular_norm: bad element index");
  const auto& g = rep.elements[index];
  const std::size_t nx = rep.sum.X.dim(), ny = rep.sum.Y.dim();

  detail::RatioProblem prob;
  prob.dim = nx + ny;
  auto split = [nx, ny](const Vec& z) {
    Vec x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx));
    Vec y(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end());
    (void)ny;
    return std::pair<Vec, Vec>(std::move(x), std::move(y));
  };
  prob.num = [&rep, &g, split](const Vec& z) {
    auto [x, y] = split(z);
    auto [lx, ly] = triangular_apply(g, rep.sum, x, y);
    return twisted_norm(rep.sum, lx, ly);
  };
  prob.den = [&rep, split](const Vec& z) {
    auto [x, y] = split(z);
    return twisted_norm(rep.sum, x, y);
  };

  auto joined = [nx, ny](const Vec& x, const Vec& y) {
    Vec z(nx + ny);
    for (std::size_t i = 0; i < nx; ++i) z[i] = x[i];
    for (std::size_t i = 0; i < ny; ++i) z[nx + i] = y[i];
    return z;
  };
  std::vector<Vec> designed;
  for (std::size_t k = 0; k < nx; ++k) designed.push_back(joined(basis_vector(nx, k), zeros(ny)));
  for (std::size_t k = 0; k < ny; ++k) {
    Vec ek = basis_vector(ny, k);
    designed.push_back(joined(zeros(nx), ek));
    designed.push_back(joined(rep.sum.omega.apply0(ek), ek));
  }
  Rng rng(mix_seed(opt.seed, 2));
  for (int i = 0; i < 16; ++i) {
    Vec y = rng.normal_vec(ny);
    designed.push_back(joined(rep.sum.omega.apply0(y), y));
  }
  return detail::ascend_ratio(prob, opt, designed);
}

// ---- averaging over a finite group ------------------------------------------

// omega_avg(y) = |G|^{-1} sum_g u(g)^{-1} Omega(v(g) y) is equivariant for the
// whole group (a change of summation variable, so it holds to rounding), and
// the correction B = omega_avg - Omega satisfies ||B|| <= the centralizer
// constant of Omega whenever the u(g) are isometries.
struct EquivariantAverage {
  HomogeneousMap omega_avg;
  HomogeneousMap correction;
};

inline EquivariantAverage average_to_equivariant(const std::vector<GroupElementMaps>& group,
                                                 const HomogeneousMap& omega) {
  require(!group.empty(), "average_to_equivariant: empty group sample");
  std::vector<std::pair<VecMap, VecMap>> uv;
  uv.reserve(group.size());
  for (const auto& g : group) {
    require(static_cast<bool>(g.u_inv), "average_to_equivariant: element lacks u_inv");
    require(static_cast<bool>(g.v), "average_to_equivariant: element lacks v");
    uv.emplace_back(g.u_inv, g.v);
  }
  const std::size_t nx = omega.codomain.dim();
  auto averaged = [uv, omega, nx](const Vec& y) {
    Vec acc = zeros(nx);
    for (const auto& [ui, v] : uv) acc = add(acc, ui(omega.apply0(v(y))));
    return scale(1.0 / static_cast<double>(uv.size()), acc);
  };
  EquivariantAverage out;
  out.omega_avg = omega;
  out.omega_avg.f = averaged;
  out.correction = omega;
  out.correction.f = [averaged, omega](const Vec& y) { return sub(averaged(y), omega.apply0(y)); };
  return out;
}

// ---- finite matrix groups ----------------------------------------------------

// A finite group given by matrix pairs (u_i, v_i) with its Cayley table
// reconstructed by product matching.  Construction fails loudly when the
// family is not closed under composition or inverses.
struct FiniteGroupRep {
  std::vector<Mat> u, v;
  std::vector<std::vector<std::size_t>> mult;  // mult[i][j] = index of g_i g_j
  std::vector<std::size_t> inv;
  std::size_t identity = 0;

  std::size_t size() const { return u.size(); }
};

inline FiniteGroupRep make_group_rep(std::vector<Mat> us, std::vector<Mat> vs,
                                     double match_tol = 1e-9) {
  require(!us.empty() && us.size() == vs.size(), "make_group_rep: bad family sizes");
  const std::size_t n = us.size();
  FiniteGroupRep G;
  G.u = std::move(us);
  G.v = std::move(vs);
  auto match = [&G, n, match_tol](const Mat& a, const Mat& b) -> std::size_t {
    for (std::size_t k = 0; k < n; ++k)
      if (mat_max_abs(mat_sub(G.u[k], a)) <= match_tol && mat_max_abs(mat_sub(G.v[k], b)) <= match_tol)
        return k;
    require(false, "make_group_rep: family not closed under composition");
    return 0;
  };
  G.identity = match(Mat::identity(G.u[0].rows), Mat::identity(G.v[0].rows));
  G.mult.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      G.mult[i][j] = match(matmul(G.u[i], G.u[j]), matmul(G.v[i], G.v[j]));
  G.inv.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < n; ++j)
      if (G.mult[i][j] == G.identity && G.mult[j][i] == G.identity) {
        G.inv[i] = j;
        found = true;
        break;
      }
    require(found, "make_group_rep: family not closed under inverses");
  }
  return G;
}

inline GroupElementMaps element_maps(const FiniteGroupRep& G, std::size_t i,
                                     const std::vector<Mat>* d = nullptr) {
  require(i < G.size(), "element_maps: bad index");
  GroupElementMaps g;
  g.u = matrix_op(G.u[i]);
  g.u_inv = matrix_op(G.u[G.inv[i]]);
  g.v = matrix_op(G.v[i]);
  g.v_inv = matrix_op(G.v[G.inv[i]]);
  if (d) g.d = matrix_op((*d)[i]);
  g.name = "g" + std::to_string(i);
  return g;
}

inline std::vector<GroupElementMaps> all_element_maps(const FiniteGroupRep& G,
                                                      const std::vector<Mat>* d = nullptr) {
  std::vector<GroupElementMaps> out;
  out.reserve(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) out.push_back(element_maps(G, i, d));
  return out;
}

// Averages a uniformly bounded family L_g, indexed by the whole group and
// normalized by L_e = 0 and L_{g^{-1}} = -u(g^{-1}) L_g v(g^{-1}), into a true
// derivation d(g) = |G|^{-1} sum_h (u(gh) L_{h^{-1}} + L_{gh} v(h^{-1})).
// The derivation identity for the output is an algebraic consequence of the
// two normalizations (change of summation variable), and is re-checked here.
inline std::vector<Mat> average_extension_family(const FiniteGroupRep& G,
                                                 const std::vector<Mat>& L) {
  const std::size_t n = G.size();
  require(L.size() == n, "average_extension_family: family must cover the group");
  double scale_bound = 1.0;
  for (const Mat& m : L) scale_bound = std::max(scale_bound, mat_max_abs(m));
  require(mat_max_abs(L[G.identity]) <= 1e-9 * scale_bound,
          "average_extension_family: L at the identity must vanish");
  for (std::size_t g = 0; g < n; ++g) {
    Mat lhs = L[G.inv[g]];
    Mat rhs = mat_scale(-1.0, matmul(G.u[G.inv[g]], matmul(L[g], G.v[G.inv[g]])));
    require(mat_max_abs(mat_sub(lhs, rhs)) <= 1e-9 * scale_bound,
            "average_extension_family: inverse normalization violated");
  }

  std::vector<Mat> d;
  d.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    Mat acc(L[0].rows, L[0].cols);
    for (std::size_t h = 0; h < n; ++h) {
      acc = mat_add(acc, matmul(G.u[G.mult[g][h]], L[G.inv[h]]));
      acc = mat_add(acc, matmul(L[G.mult[g][h]], G.v[G.inv[h]]));
    }
    d.push_back(mat_scale(1.0 / static_cast<double>(n), acc));
  }

  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) {
      Mat lhs = d[G.mult[g][h]];
      Mat rhs = mat_add(matmul(G.u[g], d[h]), matmul(d[g], G.v[h]));
      require(mat_max_abs(mat_sub(lhs, rhs)) <= 1e-9 * scale_bound * static_cast<double>(n),
              "average_extension_family: averaged family is not a derivation");
    }
  return d;
}

inline Mat triangular_block(const Mat& a, const Mat& corner, const Mat& b) {
  require(corner.rows == a.rows && corner.cols == b.cols, "triangular_block: shape mismatch");
  require(a.rows == a.cols && b.rows == b.cols, "triangular_block: diagonal blocks not square");
  Mat T(a.rows + b.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) T(i, j) = a(i, j);
  for (std::size_t i = 0; i < corner.rows; ++i)
    for (std::size_t j = 0; j < corner.cols; ++j) T(i, a.cols + j) = corner(i, j);
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) T(a.rows + i, a.cols + j) = b(i, j);
  return T;
}

// M = (L + u L v)/2 satisfies u M + M v = 0 when u, v square to -Id, so the
// triangular operator with corner M squares to -Id on the nose.
inline Mat symmetrize_complex(const Mat& u, const Mat& v, const Mat& L) {
  require(u.rows == u.cols && v.rows == v.cols, "symmetrize_complex: not square");
  require(L.rows == u.rows && L.cols == v.rows, "symmetrize_complex: corner shape mismatch");
  const double su = mat_max_abs(mat_add(matmul(u, u), Mat::identity(u.rows)));
  const double sv = mat_max_abs(mat_add(matmul(v, v), Mat::identity(v.rows)));
  require(su <= 1e-12 && sv <= 1e-12, "symmetrize_complex: u or v is not a complex structure");
  return mat_scale(0.5, mat_add(L, matmul(u, matmul(L, v))));
}

inline double triangular_square_defect(const Mat& u, const Mat& v, const Mat& corner) {
  Mat T = triangular_block(u, corner, v);
  return mat_max_abs(mat_add(matmul(T, T), Mat::identity(T.rows)));
}

// ---- equivalence and splitting checkers --------------------------------------

struct WitnessReport {
  NormEstimate linear_diff;         // bound certificate for the Omega difference
  double derivation_defect = 0.0;   // max over elements of the commutator matching defect
  std::size_t argmax_element = 0;
  std::vector<double> per_element;
  bool witnessed = false;
  double tol = 1e-9;
};

// Witness check for equivalence of the pairs (Omega_1, d_1) and (Omega_2, d_2)
// over shared actions: L must satisfy d_1(g) - d_2(g) = -[u(g), L, v(g)] on
// every sampled element and differ from Omega_1 - Omega_2 by a bounded map.
inline WitnessReport check_equivalence(const TwistedPair& a, const TwistedPair& b, const Mat& L,
                                       const SearchOptions& opt, double tol = 1e-9) {
  require(a.elements.size() == b.elements.size(), "check_equivalence: element count mismatch");
  const std::size_t nx = a.omega.codomain.dim(), ny = a.omega.domain.dim();
  require(L.rows == nx && L.cols == ny, "check_equivalence: witness shape mismatch");

  WitnessReport rep;
  rep.tol = tol;
  VecMap diff = [&a, &b, &L](const Vec& y) {
    return sub(sub(a.omega.apply0(y), b.omega.apply0(y)), L.apply(y));
  };
  rep.linear_diff = homogeneous_norm(diff, a.omega.domain, a.omega.codomain, opt);

  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    const auto& g1 = a.elements[i];
    const auto& g2 = b.elements[i];
    VecMap f = [&g1, &g2, &L, nx](const Vec& y) {
      Vec lhs = sub(apply_d(g1, y, nx), apply_d(g2, y, nx));
      Vec br = sub(g1.u(L.apply(y)), L.apply(g1.v(y)));
      return add(lhs, br);
    };
    SearchOptions o = opt;
    o.seed = mix_seed(opt.seed, 40 + i);
    NormEstimate est = homogeneous_norm(f, a.omega.domain, a.omega.codomain, o);
    rep.per_element.push_back(est.value);
    if (est.value >= rep.derivation_defect) {
      rep.derivation_defect = est.value;
      rep.argmax_element = i;
    }
  }
  rep.witnessed = rep.derivation_defect <= tol && std::isfinite(rep.linear_diff.value);
  return rep;
}

// Witness check for splitting: ell must satisfy d(g) = -[u(g), ell, v(g)] on
// every sampled element, with Omega - ell bounded.
inline WitnessReport check_splitting(const TwistedPair& p, const Mat& ell,
                                     const SearchOptions& opt, double tol = 1e-9) {
  const std::size_t nx = p.omega.codomain.dim(), ny = p.omega.domain.dim();
  require(ell.rows == nx && ell.cols == ny, "check_splitting: witness shape mismatch");

  WitnessReport rep;
  rep.tol = tol;
  VecMap diff = [&p, &ell](const Vec& y) { return sub(p.omega.apply0(y), ell.apply(y)); };
  rep.linear_diff = homogeneous_norm(diff, p.omega.domain, p.omega.codomain, opt);

  for (std::size_t i = 0; i < p.elements.size(); ++i) {
    const auto& g = p.elements[i];
    VecMap f = [&g, &ell, nx](const Vec& y) {
      Vec br = sub(g.u(ell.apply(y)), ell.apply(g.v(y)));
      return add(apply_d(g, y, nx), br);
    };
    SearchOptions o = opt;
    o.seed = mix_seed(opt.seed, 40 + i);
    NormEstimate est = homogeneous_norm(f, p.omega.domain, p.omega.codomain, o);
    rep.per_element.push_back(est.value);
    if (est.value >= rep.derivation_defect) {
      rep.derivation_defect = est.value;
      rep.argmax_element = i;
    }
  }
  rep.witnessed = rep.derivation_defect <= tol && std::isfinite(rep.linear_diff.value);
  return rep;
}

struct WitnessSolve {
  Mat L;
  double residual = 0.0;
  double min_pivot = 0.0;
  bool unique = false;
};

// Solves the stacked linear system rhs_g = -[u_g, L, v_g] = L v_g - u_g L for
// a single matrix L.  The pivot floor of the normal equations certifies
// uniqueness of the affine solution set.
inline WitnessSolve solve_inner_witness(const std::vector<Mat>& us, const std::vector<Mat>& vs,
                                        const std::vector<Mat>& rhs) {
  require(!us.empty() && us.size() == vs.size() && us.size() == rhs.size(),
          "solve_inner_witness: family sizes disagree");
  const std::size_t nx = us[0].rows, ny = vs[0].rows;
  const std::size_t unknowns = nx * ny;
  Mat A(us.size() * unknowns, unknowns);
  Vec b(us.size() * unknowns, 0.0);
  for (std::size_t g = 0; g < us.size(); ++g) {
    Mat K = kron_constraint(us[g], vs[g]);
    Vec r = mat_vec_flatten(rhs[g]);
    for (std::size_t i = 0; i < unknowns; ++i) {
      for (std::size_t j = 0; j < unknowns; ++j) A(g * unknowns + i, j) = K(i, j);
      b[g * unknowns + i] = r[i];
    }
  }
  LstsqResult ls = lstsq(A, b);
  WitnessSolve out;
  out.L = mat_unflatten(ls.x, nx, ny);
  out.residual = ls.residual;
  out.min_pivot = ls.min_pivot;
  out.unique = ls.unique;
  return out;
}

// ---- intertwiner averaging ---------------------------------------------------

// Unitriangular matrix family lambda(g) = [[u(g), d(g)], [0, v(g)]] with its
// group table, for intertwiner averaging.
struct TriangularFamily {
  std::vector<Mat> lambda;
  std::vector<std::vector<std::size_t>> mult;
  std::vector<std::size_t> inv;
  std::size_t identity = 0;
  std::size_t nx = 0, ny = 0;

  std::size_t size() const { return lambda.size(); }
};

inline TriangularFamily make_triangular_family(const FiniteGroupRep& G,
                                               const std::vector<Mat>& d) {
  require(d.size() == G.size(), "make_triangular_family: derivation family must cover the group");
  TriangularFamily F;
  F.mult = G.mult;
  F.inv = G.inv;
  F.identity = G.identity;
  F.nx = G.u[0].rows;
  F.ny = G.v[0].rows;
  F.lambda.reserve(G.size());
  for (std::size_t i = 0; i < G.size(); ++i)
    F.lambda.push_back(triangular_block(G.u[i], d[i], G.v[i]));
  return F;
}

// R = |G|^{-1} sum_h lambda_2(h^{-1}) T lambda_1(h).  For families sharing the
// group table and diagonal blocks, R lambda_1(g) = lambda_2(g) R holds exactly
// (reindex h -> h g^{-1}); the caller asserts the defect.
inline Mat average_intertwiner(const TriangularFamily& r1, const TriangularFamily& r2,
                               const Mat& T) {
  require(r1.size() == r2.size() && r1.size() > 0, "average_intertwiner: family size mismatch");
  require(r1.nx == r2.nx && r1.ny == r2.ny, "average_intertwiner: block shape mismatch");
  require(T.rows == r1.nx + r1.ny && T.cols == T.rows, "average_intertwiner: T shape mismatch");
  for (std::size_t i = 0; i < T.rows; ++i)
    for (std::size_t j = 0; j < T.cols; ++j) {
      const bool diag_block = (i < r1.nx && j < r1.nx && i == j) ||
                              (i >= r1.nx && j >= r1.nx && i == j);
      const bool corner = i < r1.nx && j >= r1.nx;
      const double expect = diag_block ? 1.0 : 0.0;
      if (!corner)
        require(std::abs(T(i, j) - expect) <= 1e-12,
                "average_intertwiner: T is not of the commuting-diagram form");
    }
  Mat acc(T.rows, T.cols);
  for (std::size_t h = 0; h < r1.size(); ++h)
    acc = mat_add(acc, matmul(r2.lambda[r2.inv[h]], matmul(T, r1.lambda[h])));
  return mat_scale(1.0 / static_cast<double>(r1.size()), acc);
}

// ---- convex combinations of units -------------------------------------------

// || Omega(sum_i c_i v(g_i) y) - sum_i c_i u(g_i) Omega(y) || / ||y|| for a
// combination with sum |c_i| = 1.  The quotient action sits inside Omega and
// the subspace action outside, matching the commutator orientation
// u Omega - Omega v.
inline double convex_combination_bound(const HomogeneousMap& omega,
                                       const std::vector<GroupElementMaps>& gs, const Vec& coeff,
                                       const Vec& y) {
  require(gs.size() == coeff.size(), "convex_combination_bound: family/coefficient mismatch");
  double s = 0.0;
  for (double c : coeff) s += std::abs(c);
  require(std::abs(s - 1.0) <= 1e-12, "convex_combination_bound: need sum |c_i| = 1");
  const double dn = norm(omega.domain, y);
  if (dn == 0.0) return 0.0;
  Vec oy = omega.apply0(y);
  Vec inside = zeros(omega.domain.dim());
  Vec outside = zeros(omega.codomain.dim());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    axpy(coeff[i], gs[i].v(y), inside);
    axpy(coeff[i], gs[i].u(oy), outside);
  }
  return norm(omega.codomain, sub(omega.apply0(inside), outside)) / dn;
}

}  // namespace twistlab
