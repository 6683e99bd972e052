#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "twistlab/linalg.hpp"
#include "twistlab/quasimaps.hpp"

namespace twistlab {

// ---- structured isometries of coordinate spaces ---------------------------

struct SignElement {
  Vec eps;  // entries in {-1, +1}
  explicit SignElement(Vec e) : eps(std::move(e)) {
    for (double v : eps) require(v == 1.0 || v == -1.0, "SignElement: entries must be +-1");
  }
  Vec apply(const Vec& x) const {
    require(x.size() == eps.size(), "SignElement: dimension mismatch");
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = eps[i] * x[i];
    return y;
  }
};

struct PermElement {
  std::vector<std::size_t> map;  // (P x)_i = x[map[i]]
  explicit PermElement(std::vector<std::size_t> m) : map(std::move(m)) {
    std::vector<bool> seen(map.size(), false);
    for (std::size_t j : map) {
      require(j < map.size() && !seen[j], "PermElement: not a permutation");
      seen[j] = true;
    }
  }
  Vec apply(const Vec& x) const {
    require(x.size() == map.size(), "PermElement: dimension mismatch");
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[map[i]];
    return y;
  }
};

// unit = signs composed with a permutation: x -> eps .* (x o map)
struct UnitElement {
  Vec eps;
  std::vector<std::size_t> map;

  UnitElement(Vec e, std::vector<std::size_t> m) : eps(std::move(e)), map(std::move(m)) {
    require(eps.size() == map.size(), "UnitElement: size mismatch");
    SignElement check_s(eps);
    PermElement check_p(map);
  }
  static UnitElement identity(std::size_t n) {
    std::vector<std::size_t> id(n);
    for (std::size_t i = 0; i < n; ++i) id[i] = i;
    return UnitElement(Vec(n, 1.0), id);
  }
  Vec apply(const Vec& x) const {
    require(x.size() == map.size(), "UnitElement: dimension mismatch");
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = eps[i] * x[map[i]];
    return y;
  }
  UnitElement compose(const UnitElement& other) const {  // this o other
    const std::size_t n = map.size();
    require(other.map.size() == n, "UnitElement::compose: size mismatch");
    Vec e(n);
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = eps[i] * other.eps[map[i]];
      m[i] = other.map[map[i]];
    }
    return UnitElement(std::move(e), std::move(m));
  }
  UnitElement inverse() const {
    const std::size_t n = map.size();
    Vec e(n);
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) {
      m[map[i]] = i;
      e[map[i]] = eps[i];
    }
    return UnitElement(std::move(e), std::move(m));
  }
};

// ---- dyadic rationals ------------------------------------------------------
//
// num * 2^-lev with num >= 0; kept normalized (odd num unless zero).  All
// Lamperti bookkeeping happens here so grids, images and weights are exact.

struct Dyadic {
  long long num = 0;
  int lev = 0;  // may go negative for values > 1 (weights)

  Dyadic() = default;
  Dyadic(long long n, int l) : num(n), lev(l) {
    require(n >= 0, "Dyadic: negative");
    normalize();
  }
  void normalize() {
    if (num == 0) {
      lev = 0;
      return;
    }
    while ((num & 1LL) == 0 && lev > -62) {
      num >>= 1;
      --lev;
    }
    require(lev <= 62 && lev >= -62, "Dyadic: level overflow");
  }
  double value() const { return std::ldexp(static_cast<double>(num), -lev); }

  friend Dyadic operator+(Dyadic a, Dyadic b) {
    int l = std::max(a.lev, b.lev);
    long long na = a.num << (l - a.lev), nb = b.num << (l - b.lev);
    return Dyadic(na + nb, l);
  }
  friend Dyadic operator-(Dyadic a, Dyadic b) {
    int l = std::max(a.lev, b.lev);
    long long na = a.num << (l - a.lev), nb = b.num << (l - b.lev);
    require(na >= nb, "Dyadic: negative difference");
    return Dyadic(na - nb, l);
  }
  friend Dyadic operator*(Dyadic a, Dyadic b) {
    require(a.num == 0 || b.num == 0 ||
                (a.num <= (1LL << 31) && b.num <= (1LL << 31)),
            "Dyadic: product overflow");
    return Dyadic(a.num * b.num, a.lev + b.lev);
  }
  friend bool operator==(Dyadic a, Dyadic b) { return a.num == b.num && a.lev == b.lev; }
  friend bool operator<(Dyadic a, Dyadic b) {
    int l = std::max(a.lev, b.lev);
    return (a.num << (l - a.lev)) < (b.num << (l - b.lev));
  }
  friend bool operator<=(Dyadic a, Dyadic b) { return a == b || a < b; }

  bool is_pow2() const { return num == 1; }
  // floor(value * 2^m)
  long long floor_scaled(int m) const {
    if (lev <= m) return num << (m - lev);
    return num >> (lev - m);
  }
  // ceil(value * 2^m)
  long long ceil_scaled(int m) const {
    if (lev <= m) return num << (m - lev);
    const long long q = num >> (lev - m);
    return q + ((num & ((1LL << (lev - m)) - 1)) != 0 ? 1 : 0);
  }
};

struct DyadicInterval {
  Dyadic a, b;  // [a, b)
  Dyadic length() const { return b - a; }
  bool is_dyadic_cell() const {
    // length 2^-k and start aligned to it
    Dyadic len = length();
    if (!len.is_pow2()) return false;
    return a.lev <= len.lev;  // a is a multiple of 2^-len.lev
  }
};

// thrown when a Lamperti image is not representable on the requested grid
struct GridRefinementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- dyadic Lamperti isometries -------------------------------------------
//
// T f = sign . w^{1/p} . (f o phi) with phi affine from each source piece
// onto its target piece and w = |target| / |source| piecewise.  Source pieces
// must be dyadic cells; targets may be arbitrary intervals tiling [0,1), but
// composition and inversion additionally need power-of-two weights and dyadic
// targets (regular elements).
struct LampertiElement {
  std::vector<DyadicInterval> src, dst;  // piece j: phi(src[j]) = dst[j]
  std::vector<double> sgn;               // +-1 per piece
  double p = 2.0;

  std::size_t pieces() const { return src.size(); }

  Dyadic weight_dy(std::size_t j) const {
    // |dst_j| / |src_j|; exact because source lengths are powers of two
    Dyadic ls = src[j].length(), ld = dst[j].length();
    require(ls.is_pow2(), "LampertiElement: source piece not dyadic");
    return Dyadic(ld.num, ld.lev - ls.lev);
  }
  double weight(std::size_t j) const { return weight_dy(j).value(); }

  bool is_regular() const {
    for (std::size_t j = 0; j < pieces(); ++j)
      if (!weight_dy(j).is_pow2() || !dst[j].is_dyadic_cell()) return false;
    return true;
  }
  double max_abs_log_weight() const {
    double m = 0.0;
    for (std::size_t j = 0; j < pieces(); ++j) m = std::max(m, std::abs(std::log(weight(j))));
    return m;
  }
  int min_grid_level() const {
    int m = 0;
    for (const auto& iv : src) m = std::max({m, iv.a.lev, iv.b.lev});
    for (const auto& iv : dst) m = std::max({m, iv.a.lev, iv.b.lev});
    return m;
  }
};

namespace detail {

inline void check_partition(std::vector<DyadicInterval> pieces, const char* who) {
  require(!pieces.empty(), std::string(who) + ": empty partition");
  std::sort(pieces.begin(), pieces.end(),
            [](const DyadicInterval& x, const DyadicInterval& y) { return x.a < y.a; });
  require(pieces.front().a == Dyadic(0, 0), std::string(who) + ": must start at 0");
  for (std::size_t j = 0; j + 1 < pieces.size(); ++j)
    require(pieces[j].b == pieces[j + 1].a, std::string(who) + ": gap or overlap");
  require(pieces.back().b == Dyadic(1, 0), std::string(who) + ": must end at 1");
  for (const auto& iv : pieces) require(iv.a < iv.b, std::string(who) + ": empty piece");
}

}  // namespace detail

inline LampertiElement make_lamperti(std::vector<DyadicInterval> src,
                                     std::vector<DyadicInterval> dst, std::vector<double> sgn,
                                     double p) {
  require(src.size() == dst.size() && src.size() == sgn.size(), "make_lamperti: ragged pieces");
  require(p >= 1.0, "make_lamperti: p < 1");
  for (double s : sgn) require(s == 1.0 || s == -1.0, "make_lamperti: signs must be +-1");
  for (const auto& iv : src)
    require(iv.is_dyadic_cell(), "make_lamperti: source pieces must be dyadic cells");
  detail::check_partition(src, "make_lamperti source");
  detail::check_partition(dst, "make_lamperti target");
  LampertiElement e;
  // keep pieces sorted by source start; carry dst/sgn along
  std::vector<std::size_t> order(src.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return src[i].a < src[j].a; });
  for (std::size_t i : order) {
    e.src.push_back(src[i]);
    e.dst.push_back(dst[i]);
    e.sgn.push_back(sgn[i]);
  }
  e.p = p;
  return e;
}

inline LampertiElement lamperti_identity(double p) {
  return make_lamperti({{Dyadic(0, 0), Dyadic(1, 0)}}, {{Dyadic(0, 0), Dyadic(1, 0)}}, {1.0}, p);
}

// weight as a step vector on the level-m grid
inline Vec lamperti_weight(const LampertiElement& e, int m) {
  require(m >= e.min_grid_level(), "lamperti_weight: grid too coarse for this element");
  const std::size_t n = std::size_t{1} << m;
  Vec w(n, 0.0);
  for (std::size_t j = 0; j < e.pieces(); ++j) {
    const long long c0 = e.src[j].a.floor_scaled(m), c1 = e.src[j].b.floor_scaled(m);
    const double wj = e.weight(j);
    for (long long c = c0; c < c1; ++c) w[static_cast<std::size_t>(c)] = wj;
  }
  return w;
}

// Exact application on the level-m grid.  Refuses ("grid too coarse") when
// f o phi fails to be constant on some cell, i.e. the image of the cell meets
// target cells carrying different values.
inline Vec lamperti_apply(const LampertiElement& e, const Vec& f, int m) {
  require(m >= e.min_grid_level(), "lamperti_apply: grid must refine both partitions");
  const std::size_t n = std::size_t{1} << m;
  require(f.size() == n, "lamperti_apply: dimension mismatch");
  Vec out(n, 0.0);
  for (std::size_t j = 0; j < e.pieces(); ++j) {
    const long long c0 = e.src[j].a.floor_scaled(m), c1 = e.src[j].b.floor_scaled(m);
    const Dyadic wj = e.weight_dy(j);
    const double amp =
        e.sgn[j] * (e.p == kInf ? 1.0 : std::pow(wj.value(), 1.0 / e.p));
    for (long long c = c0; c < c1; ++c) {
      const Dyadic cell_a(c, m);
      const Dyadic t0 = e.dst[j].a + wj * (cell_a - e.src[j].a);
      const Dyadic t1 = t0 + Dyadic(wj.num, wj.lev + m);  // + w * 2^-m
      const long long k0 = t0.floor_scaled(m);
      const long long k1 = t1.ceil_scaled(m);
      const double v = f[static_cast<std::size_t>(k0)];
      for (long long k = k0 + 1; k < k1; ++k) {
        if (f[static_cast<std::size_t>(k)] != v)
          throw GridRefinementError(
              "lamperti_apply: grid too coarse, image cell straddles distinct values; "
              "refine the grid or coarsen the input");
      }
      out[static_cast<std::size_t>(c)] = amp * v;
    }
  }
  return out;
}

// composition: apply(compose(a, b), f) == apply(a, apply(b, f))
inline LampertiElement lamperti_compose(const LampertiElement& a, const LampertiElement& b) {
  require(a.p == b.p, "lamperti_compose: exponent mismatch");
  require(a.is_regular() && b.is_regular(),
          "lamperti_compose: requires regular elements (power-of-two weights, dyadic targets)");
  // breakpoints in a's source coordinates: a's own, plus preimages of b's
  std::vector<Dyadic> cuts;
  for (const auto& iv : a.src) {
    cuts.push_back(iv.a);
    cuts.push_back(iv.b);
  }
  for (std::size_t j = 0; j < a.pieces(); ++j) {
    const Dyadic wj = a.weight_dy(j);
    for (const auto& ivb : b.src) {
      for (const Dyadic& q : {ivb.a, ivb.b}) {
        if (a.dst[j].a < q && q < a.dst[j].b) {
          // phi_a^{-1}(q) = src_a + (q - dst_a) / w_j,  w_j = 2^k so division is exact
          Dyadic diff = q - a.dst[j].a;
          Dyadic pre = a.src[j].a + Dyadic(diff.num, diff.lev + (-wj.lev));
          cuts.push_back(pre);
        }
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto piece_of = [](const LampertiElement& e, const Dyadic& s) -> std::size_t {
    for (std::size_t j = 0; j < e.pieces(); ++j)
      if (e.src[j].a <= s && s < e.src[j].b) return j;
    throw std::logic_error("lamperti_compose: point outside partition");
  };

  std::vector<DyadicInterval> src, dst;
  std::vector<double> sgn;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Dyadic s0 = cuts[i], s1 = cuts[i + 1];
    const std::size_t ja = piece_of(a, s0);
    const Dyadic wa = a.weight_dy(ja);
    const Dyadic t0 = a.dst[ja].a + wa * (s0 - a.src[ja].a);
    const Dyadic t1 = a.dst[ja].a + wa * (s1 - a.src[ja].a);
    const std::size_t jb = piece_of(b, t0);
    require(t1 <= b.src[jb].b, "lamperti_compose: refinement failed to separate pieces");
    const Dyadic wb = b.weight_dy(jb);
    const Dyadic u0 = b.dst[jb].a + wb * (t0 - b.src[jb].a);
    const Dyadic u1 = b.dst[jb].a + wb * (t1 - b.src[jb].a);
    src.push_back({s0, s1});
    dst.push_back({u0, u1});
    sgn.push_back(a.sgn[ja] * b.sgn[jb]);
  }
  return make_lamperti(std::move(src), std::move(dst), std::move(sgn), a.p);
}

inline LampertiElement lamperti_inverse(const LampertiElement& e) {
  require(e.is_regular(), "lamperti_inverse: requires a regular element");
  std::vector<std::size_t> order(e.pieces());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return e.dst[i].a < e.dst[j].a; });
  std::vector<DyadicInterval> src, dst;
  std::vector<double> sgn;
  for (std::size_t i : order) {
    src.push_back(e.dst[i]);
    dst.push_back(e.src[i]);
    sgn.push_back(e.sgn[i]);
  }
  return make_lamperti(std::move(src), std::move(dst), std::move(sgn), e.p);
}

// closed form of the derivation attached to a Lamperti isometry:
// f -> (1/p) log(w) . (T f)
inline Vec lamperti_derivation_apply(const LampertiElement& e, const Vec& f, int m) {
  require(e.p < kInf, "lamperti_derivation: needs p < inf");
  Vec tf = lamperti_apply(e, f, m);
  Vec w = lamperti_weight(e, m);
  for (std::size_t i = 0; i < tf.size(); ++i) tf[i] *= std::log(w[i]) / e.p;
  return tf;
}

// level-c step functions embedded at level m (constant on 2^(m-c) blocks);
// the natural inputs for which expanding Lamperti images stay representable
inline Vec coarse_step_vector(int m, int c, Rng& rng, double lo = 0.1, double hi = 2.0) {
  require(c <= m, "coarse_step_vector: c > m");
  const std::size_t blocks = std::size_t{1} << c, rep = std::size_t{1} << (m - c);
  Vec f;
  f.reserve(blocks * rep);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double v = rng.sign() * rng.uniform(lo, hi);
    for (std::size_t r = 0; r < rep; ++r) f.push_back(v);
  }
  return f;
}

// staircase element with weights 2^-(r-1), ..., 2^(r-1) on matched dyadic
// pieces; max |log w| = (r-1) log 2
inline LampertiElement lamperti_staircase(int r, double p) {
  require(r >= 1 && r <= 20, "lamperti_staircase: r out of range");
  std::vector<Dyadic> lens;  // source piece lengths 2^-1 ... 2^-r, 2^-r
  for (int j = 1; j <= r; ++j) lens.push_back(Dyadic(1, j));
  lens.push_back(Dyadic(1, r));
  std::vector<Dyadic> rev(lens.rbegin(), lens.rend());
  std::vector<DyadicInterval> src, dst;
  Dyadic s(0, 0), t(0, 0);
  for (std::size_t j = 0; j < lens.size(); ++j) {
    src.push_back({s, s + lens[j]});
    dst.push_back({t, t + rev[j]});
    s = s + lens[j];
    t = t + rev[j];
  }
  return make_lamperti(std::move(src), std::move(dst), std::vector<double>(lens.size(), 1.0), p);
}

// ---- block contractions (right module action of disjoint unit blocks) -----

struct BlockContraction {
  std::size_t in_dim = 0, out_dim = 0;
  double p = 2.0;
  std::vector<Vec> columns;  // dense out_dim columns, disjoint supports, unit norm

  Vec apply(const Vec& x) const {
    require(x.size() == in_dim, "BlockContraction: dimension mismatch");
    Vec y(out_dim, 0.0);
    for (std::size_t n = 0; n < in_dim; ++n)
      if (x[n] != 0.0) axpy(x[n], columns[n], y);
    return y;
  }
};

inline BlockContraction make_block_contraction(std::vector<Vec> columns, double p) {
  require(!columns.empty(), "make_block_contraction: no columns");
  require(p >= 1.0 && p < kInf, "make_block_contraction: p out of range");
  BlockContraction b;
  b.in_dim = columns.size();
  b.out_dim = columns[0].size();
  b.p = p;
  const SpaceSpec out_space = SpaceSpec::lp(p, b.out_dim);
  std::vector<bool> used(b.out_dim, false);
  for (const Vec& col : columns) {
    require(col.size() == b.out_dim, "make_block_contraction: ragged columns");
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (col[k] == 0.0) continue;
      require(!used[k], "make_block_contraction: supports must be disjoint");
      used[k] = true;
    }
    require(std::abs(norm(out_space, col) - 1.0) <= 1e-12,
            "make_block_contraction: columns must be unit vectors");
  }
  b.columns = std::move(columns);
  return b;
}

// d(T_u) x = sum_n x_n K(u_n), the linear corner attached to the block map
inline Mat block_derivation(const BlockContraction& b) {
  const SpaceSpec out_space = SpaceSpec::lp(b.p, b.out_dim);
  std::vector<Vec> cols;
  cols.reserve(b.in_dim);
  for (const Vec& u : b.columns) cols.push_back(kalton_peck(out_space, u));
  return Mat::from_columns(cols);
}

inline BlockContraction block_compose(const BlockContraction& a, const BlockContraction& b) {
  require(a.in_dim == b.out_dim, "block_compose: shape mismatch");
  std::vector<Vec> cols;
  cols.reserve(b.in_dim);
  for (const Vec& col : b.columns) cols.push_back(a.apply(col));
  return make_block_contraction(std::move(cols), a.p);
}

inline BlockContraction random_block_contraction(std::size_t in_dim, std::size_t block_len,
                                                 double p, Rng& rng) {
  std::vector<Vec> cols;
  const std::size_t out_dim = in_dim * block_len;
  const SpaceSpec out_space = SpaceSpec::lp(p, out_dim);
  for (std::size_t n = 0; n < in_dim; ++n) {
    Vec col(out_dim, 0.0);
    for (std::size_t j = 0; j < block_len; ++j)
      col[n * block_len + j] = rng.sign() * rng.uniform(0.2, 1.0);
    const double nv = norm(out_space, col);
    for (auto& v : col) v /= nv;
    cols.push_back(std::move(col));
  }
  return make_block_contraction(std::move(cols), p);
}

// ---- finite-section c0 example --------------------------------------------
//
// Sign group {+-1}^n acting on the sup-normed head, trivially on a scalar
// tail; the derivation marks flipped coordinates and has the constant-slope
// corner A = -(1/2) 1 as its canonical bounded companion.
struct C0Example {
  std::size_t n = 0;
  SpaceSpec X;  // sup norm on R^n

  explicit C0Example(std::size_t n_) : n(n_), X(SpaceSpec::sup(n_)) {}

  Vec d_of(const Vec& alpha) const {  // d(g)(1) as a column
    require(alpha.size() == n, "C0Example: dimension mismatch");
    Vec d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = alpha[i] == -1.0 ? 1.0 : 0.0;
    return d;
  }
  Vec A() const { return Vec(n, -0.5); }
};

// ---- derivation identity --------------------------------------------------

struct DerivationCheckCase {
  std::function<Vec(const Vec&)> d_g, d_h, d_gh;  // Y -> X
  std::function<Vec(const Vec&)> u_g;             // X -> X
  std::function<Vec(const Vec&)> v_h;             // Y -> Y
};

// sup over samples of ||d(gh) y - u(g) d(h) y - d(g) v(h) y|| / ||y||
inline double derivation_identity_defect(const SpaceSpec& X, const SpaceSpec& Y,
                                         const std::vector<DerivationCheckCase>& cases,
                                         const std::vector<Vec>& samples) {
  double worst = 0.0;
  for (const auto& cs : cases) {
    for (const Vec& y : samples) {
      const double ny = norm(Y, y);
      if (ny == 0.0) continue;
      Vec lhs = cs.d_gh(y);
      Vec rhs = add(cs.u_g(cs.d_h(y)), cs.d_g(cs.v_h(y)));
      worst = std::max(worst, norm(X, sub(lhs, rhs)) / ny);
    }
  }
  return worst;
}

}  // namespace twistlab
