#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "twistlab/actions.hpp"
#include "twistlab/compat.hpp"
#include "twistlab/config.hpp"
#include "twistlab/core.hpp"
#include "twistlab/freetree.hpp"
#include "twistlab/interp.hpp"
#include "twistlab/nabla.hpp"
#include "twistlab/quasimaps.hpp"
#include "twistlab/report.hpp"
#include "twistlab/spaces.hpp"

namespace twistlab {

namespace detail {

inline std::string cell(double v) { return format_number(v); }

inline Vec positive_vec(Rng& rng, std::size_t n, double lo = 0.2, double hi = 3.0) {
  Vec v(n);
  for (auto& t : v) t = rng.uniform(lo, hi);
  return v;
}

inline std::string word_label(const TreeWord& w) {
  if (w.letters.empty()) return "e";
  std::string out;
  for (int a : w.letters) {
    if (!out.empty()) out += '.';
    out += 'a';
    out += std::to_string(std::abs(a));
    if (a < 0) out += "^-1";
  }
  return out;
}

inline std::string sign_label(const Vec& eps) {
  std::string out;
  for (double s : eps) out += s > 0 ? '+' : '-';
  return out;
}

// the full sign group on n coordinates, acting diagonally on both factors
inline std::vector<GroupElementMaps> sign_group(std::size_t n) {
  std::vector<GroupElementMaps> out;
  for_each_sign_pattern(n, [&](const Vec& eps) {
    GroupElementMaps g;
    VecMap m = diag_op(eps);
    g.u = m;
    g.u_inv = m;  // involution
    g.v = m;
    g.v_inv = m;
    g.name = sign_label(eps);
    out.push_back(std::move(g));
  });
  return out;
}

// diagonal character matrices for {+-1}^q: entry i of element g is the parity
// character cut out by masks[i]
inline std::vector<Mat> character_family(int q, const std::vector<unsigned>& masks) {
  std::vector<Mat> mats;
  const std::size_t order = std::size_t{1} << q;
  for (std::size_t g = 0; g < order; ++g) {
    Vec diag(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i)
      diag[i] = (__builtin_popcountll(g & masks[i]) & 1) ? -1.0 : 1.0;
    mats.push_back(Mat::diag(diag));
  }
  return mats;
}

// canonical complex structure conjugated by a random rotation; stays a
// complex structure to rounding because the conjugation is orthogonal
inline Mat random_complex_structure(std::size_t n, Rng& rng) {
  require(n % 2 == 0, "random_complex_structure: dimension must be even");
  Mat J(n, n);
  const std::size_t h = n / 2;
  for (std::size_t i = 0; i < h; ++i) {
    J(i, h + i) = -1.0;
    J(h + i, i) = 1.0;
  }
  Mat Q = random_orthogonal(n, rng);
  return matmul(Q, matmul(J, Q.transpose()));
}

inline Mat random_mat(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

// level-c step coefficients embedded on the level-m grid
inline Vec embed_blocks(const Vec& coarse, int m, int c) {
  const std::size_t rep = std::size_t{1} << (m - c);
  Vec out;
  out.reserve(coarse.size() * rep);
  for (double v : coarse)
    for (std::size_t r = 0; r < rep; ++r) out.push_back(v);
  return out;
}

// indicator of destination piece j of a Lamperti element on the level-m grid;
// its pullback is supported on source piece j, so the composition sees exactly
// one weight and the commutator ratio is |log w_j| / p on the nose
inline Vec dest_indicator(const LampertiElement& e, std::size_t j, int m) {
  const std::size_t n = std::size_t{1} << m;
  Vec f(n, 0.0);
  const long long c0 = e.dst[j].a.floor_scaled(m), c1 = e.dst[j].b.floor_scaled(m);
  for (long long i = c0; i < c1; ++i) f[static_cast<std::size_t>(i)] = 1.0;
  return f;
}

struct C0Setup {
  C0Example ex;
  SpaceSpec Y;
  std::vector<Mat> us, vs, rhs;  // per sign pattern: action, trivial tail, corner column
  std::vector<GroupElementMaps> elements;
  TwistedPair pair;  // Omega = 0 with the marked-coordinate derivation
};

inline C0Setup build_c0(std::size_t n) {
  C0Setup s{C0Example(n), SpaceSpec::sup(1), {}, {}, {}, {}, {}};
  for_each_sign_pattern(n, [&](const Vec& alpha) {
    Mat u = Mat::diag(alpha);
    Mat v = Mat::identity(1);
    Mat d(n, 1);
    Vec col = s.ex.d_of(alpha);
    for (std::size_t i = 0; i < n; ++i) d(i, 0) = col[i];
    GroupElementMaps g;
    g.u = matrix_op(u);
    g.u_inv = matrix_op(u);
    g.v = identity_op();
    g.v_inv = identity_op();
    g.d = matrix_op(d);
    g.name = sign_label(alpha);
    s.us.push_back(std::move(u));
    s.vs.push_back(std::move(v));
    s.rhs.push_back(std::move(d));
    s.elements.push_back(std::move(g));
  });
  HomogeneousMap omega = zero_map(s.Y, s.ex.X);
  s.pair = TwistedPair{std::move(omega), s.elements};
  return s;
}

inline Mat column_matrix(const Vec& col) {
  Mat m(col.size(), 1);
  for (std::size_t i = 0; i < col.size(); ++i) m(i, 0) = col[i];
  return m;
}

inline Mat left_shift_matrix(const TreeSpace& T) {
  std::vector<Vec> cols;
  cols.reserve(T.dim());
  for (std::size_t t = 0; t < T.dim(); ++t) cols.push_back(left_shift(T, basis_vector(T.dim(), t)));
  return Mat::from_columns(cols);
}

}  // namespace detail

// ---- nabla-growth -----------------------------------------------------------

inline Report exp_nabla_growth(const Config& cfg) {
  Report rep;
  rep.id = "nabla-growth";
  rep.config = cfg.echo();
  const std::vector<int> ms = cfg.int_list("m");
  const std::string mode = cfg.str("mode");
  if (mode != "auto" && mode != "exhaustive")
    throw ConfigError("mode must be 'auto' or 'exhaustive'");
  for (int m : ms) {
    if (m < 1 || m > 12) throw ConfigError("m values must lie in 1..12");
    if (mode == "exhaustive" && (std::size_t{1} << m) > 20)
      throw ConfigError("exhaustive mode requested for more than 20 vectors");
  }
  const auto rows = unitary_gap_experiment(ms, cfg.seed(), static_cast<int>(cfg.integer("mc_samples")));

  double worst_rel = 0.0, worst_spread = 0.0;
  for (const auto& r : rows) {
    worst_rel = std::max(worst_rel, std::abs(r.nabla_canonical - r.canonical_exact) / r.canonical_exact);
    worst_spread = std::max(worst_spread, r.canonical_spread);
  }
  rep.check_le("canonical sign-average matches closed form", worst_rel, 1e-9,
               "nabla over the unit basis equals (1/2) sqrt(n) log n");
  rep.check_le("canonical patterns identical", worst_spread, 1e-12,
               "every sign pattern contributes the identical value");
  if (mode == "exhaustive") {
    bool all_ex = true;
    for (const auto& r : rows) all_ex = all_ex && r.walsh_exhaustive;
    rep.check("all sign patterns enumerated", all_ex ? 1.0 : 0.0, 1.0, all_ex,
              "2^n pattern sums evaluated in full, no sampling");
  }

  // normalized rotated-family window, centered at the m = 3 value when present
  const auto q_of = [](const GapRow& r) { return r.nabla_walsh / std::sqrt(static_cast<double>(r.n)); };
  const GapRow* anchor_row = nullptr;
  for (const auto& r : rows)
    if (r.m == 3) anchor_row = &r;
  if (anchor_row) {
    double lo = kInf, hi = 0.0;
    for (const auto& r : rows) {
      lo = std::min(lo, q_of(r) / q_of(*anchor_row));
      hi = std::max(hi, q_of(r) / q_of(*anchor_row));
    }
    rep.check_le("rotated family stays within factor 1.5 of mid-sweep", hi, 1.5,
                 "the rotated sign-average grows at most like a bounded multiple of sqrt(n)");
    rep.check("rotated family ratio floor (reported)", lo, 0.0, lo > 0.0,
              "smallest normalized value across the sweep, for the record");
  }

  double min_gap_step = kInf;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].m >= 2 && rows[i + 1].m == rows[i].m + 1)
      min_gap_step = std::min(min_gap_step, rows[i + 1].gap_over_sqrt_n - rows[i].gap_over_sqrt_n);
  if (min_gap_step < kInf)
    rep.check("normalized gap strictly increasing from m = 2", min_gap_step, 0.0,
              min_gap_step > 0.0, "the basis/rotated gap over sqrt(n) keeps growing");

  rep.table_header = {"n", "nabla_canonical", "nabla_walsh", "gap", "stderr"};
  for (const auto& r : rows)
    rep.table_rows.push_back({detail::cell(static_cast<double>(r.n)), detail::cell(r.nabla_canonical),
                              detail::cell(r.nabla_walsh), detail::cell(r.gap_over_sqrt_n),
                              detail::cell(r.walsh_stderr)});
  return rep;
}

// ---- tree-commutator --------------------------------------------------------

inline Report exp_tree_commutator(const Config& cfg) {
  Report rep;
  rep.id = "tree-commutator";
  rep.config = cfg.echo();
  const int k = static_cast<int>(cfg.integer("k"));
  const int D = static_cast<int>(cfg.integer("D"));
  const int maxlen = static_cast<int>(cfg.integer("maxlen"));
  if (maxlen >= D) throw ConfigError("maxlen must be smaller than D");
  const TreeSpace T = make_tree(k, D);
  const auto basis = admissible_basis(T, static_cast<std::size_t>(D - maxlen - 1));
  const SpaceSpec dom = SpaceSpec::lp(2.0, basis.size());
  const SpaceSpec cod = T.space();

  SearchOptions opt;
  opt.n_samples = static_cast<std::size_t>(cfg.integer("samples"));
  opt.restarts = static_cast<std::size_t>(cfg.integer("restarts"));

  rep.table_header = {"g", "bound_estimate"};
  double worst = 0.0;
  auto words = enumerate_words(k, maxlen);
  std::size_t widx = 0;
  for (const auto& g : words) {
    if (g.letters.empty()) continue;
    Mat M = tree_commutator_matrix(T, g, basis);
    SearchOptions o = opt;
    o.seed = mix_seed(cfg.seed(), widx++);
    const double est = homogeneous_norm(M, dom, cod, o).value;
    worst = std::max(worst, est);
    rep.table_rows.push_back({detail::word_label(g), detail::cell(est)});
  }
  rep.check_le("translated-shift commutator bound", worst, 2.0 + 1e-9,
               "[u(g), R] has norm at most 2");

  // the exact root identity for the first generator
  TreeWord a1{{1}};
  Vec e0 = basis_vector(T.dim(), 0);
  Vec lhs = sub(translate(T, a1, right_shift(T, e0).x).x, right_shift(T, translate(T, a1, e0).x).x);
  rep.check_le("root witness reproduced", max_abs(sub(lhs, e0)), 0.0,
               "[u(a1), R] e_root = e_root");
  return rep;
}

// ---- tree-growth ------------------------------------------------------------

inline Report exp_tree_growth(const Config& cfg) {
  Report rep;
  rep.id = "tree-growth";
  rep.config = cfg.echo();
  const int k = static_cast<int>(cfg.integer("k"));
  const int D = static_cast<int>(cfg.integer("D"));
  const int nmax = static_cast<int>(cfg.integer("nmax"));
  if (nmax < 1 || nmax > 2 * k) throw ConfigError("nmax must lie in 1..2k");
  const TreeSpace T = make_tree(k, D);

  rep.table_header = {"n", "ratio"};
  double worst = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    Vec x = zeros(T.dim());
    for (int i = 0; i < n; ++i) x[T.children[0][static_cast<std::size_t>(i)]] = 1.0;
    const double ratio = l2_norm(left_shift(T, x)) / l2_norm(x);
    worst = std::max(worst, std::abs(ratio - std::sqrt(static_cast<double>(n))));
    rep.table_rows.push_back({detail::cell(static_cast<double>(n)), detail::cell(ratio)});
  }
  rep.check_le("collapse ratio equals sqrt n", worst, 1e-12,
               "n siblings collapse to n e_root while their sum has norm sqrt n");
  return rep;
}

// ---- interp-differential ----------------------------------------------------

inline Report exp_interp_differential(const Config& cfg) {
  Report rep;
  rep.id = "interp-differential";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  const auto thetas = cfg.double_list("thetas");
  const std::size_t nx = static_cast<std::size_t>(cfg.integer("nx"));
  const double h = cfg.number("fd_h");

  // exact scale anchor: the (sup, l1) couple reproduces the entrywise log map
  const InterpCouple anchor = unweighted_couple(kInf, 1.0, n);
  double anchor_worst = 0.0;
  Rng rng(mix_seed(cfg.seed(), 1));
  for (double theta : thetas) {
    const InterpParams pr = interp_params(anchor, theta);
    const SpaceSpec st = theta_space(anchor, theta);
    double worst = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      Vec x = rng.normal_vec(n);
      Vec om = differential(anchor, theta, x);
      Vec kp = kalton_peck(st, x);
      worst = std::max(worst, norm(st, sub(om, scale(pr.p_theta, kp))) / norm(st, x));
    }
    anchor_worst = std::max(anchor_worst, worst);
    rep.table_rows.push_back({detail::cell(theta), "anchor_rel_dev", detail::cell(worst)});
  }
  rep.check_le("differential matches the entrywise log map", anchor_worst, 1e-9,
               "Omega_theta = p_theta K on the (sup, l1) scale");

  // extremality sweep over the exponent menu with random weights
  const std::vector<double> pset = {1.0, 4.0 / 3.0, 2.0, 4.0, kInf};
  double boundary_worst = 0.0, fd_worst = 0.0, modulus_worst = 0.0;
  std::size_t couple_idx = 0;
  for (double p0 : pset)
    for (double p1 : pset) {
      if (p0 == kInf && p1 == kInf) continue;
      Rng wr(mix_seed(cfg.seed(), 100 + couple_idx++));
      const InterpCouple c =
          make_couple(p0, detail::positive_vec(wr, n), p1, detail::positive_vec(wr, n));
      for (double theta : {0.35, 0.65}) {
        Vec x = wr.normal_vec(n);
        x[n / 2] = 0.0;  // keep a vanishing coordinate in the sweep
        const double nrm = theta_norm(c, theta, x);
        MinimalFunction mf = minimal_function(c, theta, x);
        for (double t : {0.0, -0.7, 1.3}) {
          const double b0 = norm(endpoint_space(c, 0), modulus(mf.eval(Cplx(0.0, t))));
          const double b1 = norm(endpoint_space(c, 1), modulus(mf.eval(Cplx(1.0, t))));
          boundary_worst = std::max({boundary_worst, std::abs(b0 - nrm) / nrm, std::abs(b1 - nrm) / nrm});
          const CVec F = mf.eval(Cplx(theta, t));
          for (std::size_t kk = 0; kk < n; ++kk)
            modulus_worst =
                std::max(modulus_worst, std::abs(std::abs(F[kk]) - std::abs(x[kk])) / nrm);
        }
        Vec om = differential(c, theta, x);
        Vec fd = fd_differential(c, theta, x, h);
        fd_worst = std::max(fd_worst, max_abs(sub(om, fd)) / max_abs(om));
      }
    }
  rep.check_le("boundary norms equal the interpolated norm", boundary_worst, 1e-10,
               "the extremal function is flat on both boundary lines");
  rep.check_le("finite differences match the closed form", fd_worst, 1e-6,
               "d/dz of the extremal family at theta is the differential");
  rep.check_le("coordinate moduli constant on the critical line", modulus_worst, 1e-10,
               "|M(theta + it)_k| = |x_k|");

  rep.table_header = {"theta", "quantity", "value"};
  rep.table_rows.push_back({"all", "boundary_rel_dev_max", detail::cell(boundary_worst)});
  rep.table_rows.push_back({"all", "fd_rel_dev_max", detail::cell(fd_worst)});
  rep.table_rows.push_back({"all", "modulus_rel_dev_max", detail::cell(modulus_worst)});
  return rep;
}

// ---- interp-flow ------------------------------------------------------------

inline Report exp_interp_flow(const Config& cfg) {
  Report rep;
  rep.id = "interp-flow";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  const double p0 = cfg.number("p0"), p1 = cfg.number("p1");
  const double theta = cfg.number("theta");
  const auto ts = cfg.double_list("ts");
  const std::string w_mode = cfg.str("w_mode");
  if (w_mode != "unit" && w_mode != "random") throw ConfigError("w_mode must be unit or random");

  Rng rng(mix_seed(cfg.seed(), 3));
  Vec w0(n, 1.0), w1(n, 1.0);
  if (w_mode == "random") {
    w0 = detail::positive_vec(rng, n);
    w1 = detail::positive_vec(rng, n);
  }
  const InterpCouple c = make_couple(p0, w0, p1, w1);

  double res_worst = 0.0, drift_worst = 0.0, explicit_worst = 0.0;
  const long long trials = cfg.integer("trials");
  for (long long i = 0; i < trials; ++i) {
    Vec x = rng.normal_vec(n);
    if (i % 2 == 1) x[0] = 0.0;
    FlowReport fr = flow_check(c, theta, x, ts);
    res_worst = std::max(res_worst, fr.max_residual);
    drift_worst = std::max(drift_worst, fr.max_norm_drift);
    if (p0 == p1 && p0 < kInf) {
      MinimalFunction mf = minimal_function(c, theta, x);
      for (double t : ts) {
        CVec F = mf.eval(Cplx(theta, t));
        for (std::size_t kk = 0; kk < n; ++kk) {
          const Cplx expect =
              x[kk] * std::exp(Cplx(0.0, t / p0 * std::log(w0[kk] / w1[kk])));
          explicit_worst = std::max(explicit_worst, std::abs(F[kk] - expect));
        }
      }
    }
  }
  rep.check_le("flow residual", res_worst, 1e-8, "F'(t) = i Omega_theta(F(t))");
  rep.check_le("flow norm constancy", drift_worst, 1e-10,
               "||F(t)||_theta is constant along the vertical line");
  if (p0 == p1 && p0 < kInf)
    rep.check_le("equal-exponent explicit solution", explicit_worst, 1e-12,
                 "x exp(i t log(w0/w1)/p) solves the flow");

  rep.table_header = {"theta", "quantity", "value"};
  rep.table_rows.push_back({detail::cell(theta), "flow_residual_max", detail::cell(res_worst)});
  rep.table_rows.push_back({detail::cell(theta), "norm_drift_max", detail::cell(drift_worst)});
  return rep;
}

// ---- riesz-thorin -----------------------------------------------------------

inline Report exp_riesz_thorin(const Config& cfg) {
  Report rep;
  rep.id = "riesz-thorin";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  const double theta = cfg.number("theta");
  const InterpCouple c = unweighted_couple(cfg.number("p0"), cfg.number("p1"), n);
  const long long trials = cfg.integer("trials");

  SearchOptions opt;
  Rng rng(mix_seed(cfg.seed(), 4));
  double worst_ratio = 0.0;
  bool all_exact = true;
  rep.table_header = {"trial", "bound0", "bound1", "bound_theta", "rhs"};
  for (long long i = 0; i < trials; ++i) {
    Mat T = detail::random_mat(n, n, rng);
    opt.seed = mix_seed(cfg.seed(), 1000 + static_cast<std::uint64_t>(i));
    RieszThorinReport rt = riesz_thorin_check(c, theta, T, opt);
    worst_ratio = std::max(worst_ratio, rt.bound_theta / (rt.rhs * rt.slack));
    all_exact = all_exact && rt.exact0 && rt.exact1 && rt.exact_theta;
    rep.table_rows.push_back({detail::cell(static_cast<double>(i)), detail::cell(rt.bound0),
                              detail::cell(rt.bound1), detail::cell(rt.bound_theta),
                              detail::cell(rt.rhs)});
  }
  rep.check_le("interpolated operator norm below the geometric mean", worst_ratio, 1.0,
               "||T||_theta <= ||T||_0^(1-theta) ||T||_1^theta");
  rep.check("endpoint and midpoint norms computed exactly", all_exact ? 1.0 : 0.0, 1.0,
            all_exact, "exponent 1, 2, inf norms admit closed forms");
  return rep;
}

// ---- lamperti-extension -----------------------------------------------------

inline Report exp_lamperti_extension(const Config& cfg) {
  Report rep;
  rep.id = "lamperti-extension";
  rep.config = cfg.echo();
  const double p = cfg.number("p");
  if (!(p >= 1.0 && p < kInf)) throw ConfigError("p must be finite and >= 1");
  const auto rs = cfg.int_list("r");
  const int c = static_cast<int>(cfg.integer("c"));
  const long long nfun = cfg.integer("nfun");
  const long long npairs = cfg.integer("npairs");

  rep.table_header = {"max_log_w", "quantity", "value"};
  double corner_worst = 0.0, iso_worst = 0.0;
  std::size_t site = 0;
  for (int r : rs) {
    if (r < 1 || r > 12) throw ConfigError("staircase size r must lie in 1..12");
    const int m = r + 2;
    if (c > m - (r - 1)) throw ConfigError("block level c too fine for the requested staircases");
    const SpaceSpec S = SpaceSpec::discretized_lp(p, m);
    const HomogeneousMap K = kalton_peck_map(S);
    const TwistedSum sum = twisted_sum(S, S, K);
    const LampertiElement stair = lamperti_staircase(r, p);
    for (const LampertiElement& e : {stair, lamperti_inverse(stair)}) {
      Rng rng(mix_seed(cfg.seed(), 10 + site++));
      // closed corner formula against the raw commutator
      double corner_dev = 0.0;
      const long long per = std::max<long long>(1, nfun / (2 * static_cast<long long>(rs.size())));
      for (long long i = 0; i < per; ++i) {
        Vec f = coarse_step_vector(m, c, rng);
        Vec direct = sub(kalton_peck(S, lamperti_apply(e, f, m)),
                         lamperti_apply(e, kalton_peck(S, f), m));
        Vec closed = lamperti_derivation_apply(e, f, m);
        corner_dev = std::max(corner_dev, norm(S, sub(direct, closed)) / norm(S, f));
      }
      corner_worst = std::max(corner_worst, corner_dev);

      // the triangular action preserves the twisted quasi-norm on
      // refinement-safe pairs
      double iso_dev = 0.0;
      const std::size_t nc = std::size_t{1} << c;
      auto ratio_of = [&](const Vec& x, const Vec& y) {
        const double den = twisted_norm(sum, x, y);
        if (den == 0.0) return 1.0;
        Vec lx = add(lamperti_apply(e, x, m), lamperti_derivation_apply(e, y, m));
        Vec ly = lamperti_apply(e, y, m);
        return twisted_norm(sum, lx, ly) / den;
      };
      for (std::size_t kk = 0; kk < nc; ++kk) {
        Vec b = detail::embed_blocks(basis_vector(nc, kk), m, c);
        iso_dev = std::max({iso_dev, std::abs(ratio_of(b, zeros(b.size())) - 1.0),
                            std::abs(ratio_of(zeros(b.size()), b) - 1.0)});
      }
      for (long long i = 0; i < npairs; ++i) {
        Vec x = detail::embed_blocks(rng.normal_vec(nc), m, c);
        Vec y = detail::embed_blocks(rng.normal_vec(nc), m, c);
        iso_dev = std::max(iso_dev, std::abs(ratio_of(x, y) - 1.0));
      }
      iso_worst = std::max(iso_worst, iso_dev);
      rep.table_rows.push_back(
          {detail::cell(e.max_abs_log_weight()), "corner_rel_dev", detail::cell(corner_dev)});
      rep.table_rows.push_back(
          {detail::cell(e.max_abs_log_weight()), "isometry_dev", detail::cell(iso_dev)});
    }
  }
  rep.check_le("corner closed form matches the commutator", corner_worst, 1e-9,
               "[K, T] f = (1/p) log(w) (T f)");
  rep.check_le("triangular action preserves the twisted quasi-norm", iso_worst, 1e-9,
               "the isometry extends isometrically to the twisted sum");
  return rep;
}

// ---- lamperti-centralizer-growth -------------------------------------------

inline Report exp_lamperti_centralizer_growth(const Config& cfg) {
  Report rep;
  rep.id = "lamperti-centralizer-growth";
  rep.config = cfg.echo();
  const double p = cfg.number("p");
  if (!(p > 1.0 && p < kInf)) throw ConfigError("p must be finite and > 1");
  const auto rs = cfg.int_list("r");
  const int c = static_cast<int>(cfg.integer("c"));
  const long long nsamp = cfg.integer("nsamp");

  std::vector<double> xs, ys;
  rep.table_header = {"max_log_w", "centralizer_estimate"};
  double exactness_worst = 0.0;
  for (int r : rs) {
    if (r < 2 || r > 12) throw ConfigError("staircase size r must lie in 2..12");
    const int m = r + 2;
    if (c > m - (r - 1)) throw ConfigError("block level c too fine for the requested staircases");
    const SpaceSpec S = SpaceSpec::discretized_lp(p, m);
    const LampertiElement e = lamperti_staircase(r, p);
    Rng rng(mix_seed(cfg.seed(), 20 + static_cast<std::uint64_t>(r)));
    double est = 0.0;
    for (std::size_t j = 0; j < e.pieces(); ++j) {
      Vec f = detail::dest_indicator(e, j, m);
      est = std::max(est, norm(S, lamperti_derivation_apply(e, f, m)) / norm(S, f));
    }
    for (long long i = 0; i < nsamp; ++i) {
      Vec f = coarse_step_vector(m, c, rng);
      est = std::max(est, norm(S, lamperti_derivation_apply(e, f, m)) / norm(S, f));
    }
    const double x = e.max_abs_log_weight();
    xs.push_back(x);
    ys.push_back(est);
    exactness_worst = std::max(exactness_worst, std::abs(est - x / p) / (x / p));
    rep.table_rows.push_back({detail::cell(x), detail::cell(est)});
  }
  require(xs.size() >= 2, "lamperti-centralizer-growth: need at least two staircase sizes");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double cov = 0, var = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = cov / var;
  rep.check_le("commutator growth slope matches 1/p", std::abs(slope * p - 1.0), 0.05,
               "sup over f of ||(1/p) log(w) T f|| grows like (1/p) max |log w|");
  rep.check_le("estimates sit on the exact line", exactness_worst, 1e-9,
               "the concentrated indicator attains (1/p) max |log w|");
  return rep;
}

// ---- averaging-rrr ----------------------------------------------------------

inline Report exp_averaging_rrr(const Config& cfg) {
  Report rep;
  rep.id = "averaging-rrr";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  if (n < 1 || n > 8) throw ConfigError("n must lie in 1..8 (the group has 2^n elements)");
  const long long nsamp = cfg.integer("nsamp");
  const SpaceSpec S = SpaceSpec::lp(2.0, n);

  Rng rng(mix_seed(cfg.seed(), 5));
  Vec cvec = rng.normal_vec(n);
  HomogeneousMap omega;
  omega.domain = S;
  omega.codomain = S;
  omega.tag = Linearity::Quasilinear;
  omega.f = [S, cvec](const Vec& y) { return add(kalton_peck(S, y), scale(norm(S, y), cvec)); };

  const auto group = detail::sign_group(n);
  const EquivariantAverage avg = average_to_equivariant(group, omega);

  double equiv_dev = 0.0;
  for (const auto& g : group) {
    for (long long i = 0; i < nsamp; ++i) {
      Vec y = rng.normal_vec(n);
      equiv_dev = std::max(equiv_dev,
                           norm(S, sub(avg.omega_avg.apply0(g.v(y)), g.u(avg.omega_avg.apply0(y)))) /
                               norm(S, y));
    }
  }
  rep.check_le("averaged map equivariant", equiv_dev, 1e-9,
               "the group average intertwines the action exactly");

  double closed_dev = 0.0;
  for (long long i = 0; i < nsamp; ++i) {
    Vec y = rng.normal_vec(n);
    closed_dev = std::max(
        closed_dev, norm(S, add(avg.correction.apply0(y), scale(norm(S, y), cvec))) / norm(S, y));
  }
  rep.check_le("correction matches its closed form", closed_dev, 1e-12,
               "B y = P integral of (u(g)^{-1} Omega v(g) y - Omega y)");

  SearchOptions light;
  light.n_samples = 100;
  light.restarts = 4;
  light.steps = 60;
  light.seed = mix_seed(cfg.seed(), 6);
  const double b_norm = homogeneous_norm(avg.correction, light).value;
  const double cent = centralizer_constant(group, omega, light).value;
  rep.check_le("correction bounded by the centralizer constant", b_norm, cent * (1.0 + 1e-9),
               "||B|| <= C whenever the action is isometric");

  rep.table_header = {"quantity", "value"};
  rep.table_rows.push_back({"equivariance_defect", detail::cell(equiv_dev)});
  rep.table_rows.push_back({"correction_norm", detail::cell(b_norm)});
  rep.table_rows.push_back({"centralizer_constant", detail::cell(cent)});
  rep.table_rows.push_back({"tail_norm", detail::cell(l2_norm(cvec))});
  return rep;
}

// ---- averaging-gsame --------------------------------------------------------

inline Report exp_averaging_gsame(const Config& cfg) {
  Report rep;
  rep.id = "averaging-gsame";
  rep.config = cfg.echo();
  const int q = 2;
  Rng rng(mix_seed(cfg.seed(), 7));
  const auto us = detail::character_family(q, {1u, 2u, 3u});
  const auto vs = detail::character_family(q, {2u, 3u, 1u});
  const FiniteGroupRep G = make_group_rep(us, vs);
  const std::size_t nx = 3, ny = 3;

  const Mat L0 = detail::random_mat(nx, ny, rng);
  const Mat C0 = detail::random_mat(nx, ny, rng);
  std::vector<Mat> d1, d2;
  for (std::size_t g = 0; g < G.size(); ++g) {
    d1.push_back(mat_sub(matmul(G.u[g], L0), matmul(L0, G.v[g])));
    d2.push_back(mat_add(d1[g], mat_sub(matmul(C0, G.v[g]), matmul(G.u[g], C0))));
  }
  const TriangularFamily r1 = make_triangular_family(G, d1);
  const TriangularFamily r2 = make_triangular_family(G, d2);

  // construction sanity: the two families really are conjugate by [[I, C0], [0, I]]
  const Mat Tc = triangular_block(Mat::identity(nx), C0, Mat::identity(ny));
  const Mat Tc_inv = triangular_block(Mat::identity(nx), mat_scale(-1.0, C0), Mat::identity(ny));
  double conj_dev = 0.0;
  for (std::size_t g = 0; g < G.size(); ++g)
    conj_dev = std::max(
        conj_dev, mat_max_abs(mat_sub(r2.lambda[g], matmul(Tc, matmul(r1.lambda[g], Tc_inv)))));
  rep.check_le("conjugate pair construction consistent", conj_dev, 1e-12,
               "lambda_2 = T lambda_1 T^{-1} with a unitriangular T");

  const Mat T2 = triangular_block(Mat::identity(nx), detail::random_mat(nx, ny, rng),
                                  Mat::identity(ny));
  const Mat R = average_intertwiner(r1, r2, T2);

  double defect = 0.0;
  rep.table_header = {"g", "defect"};
  for (std::size_t g = 0; g < G.size(); ++g) {
    const double d = mat_max_abs(mat_sub(matmul(R, r1.lambda[g]), matmul(r2.lambda[g], R)));
    defect = std::max(defect, d);
    rep.table_rows.push_back({"g" + std::to_string(g), detail::cell(d)});
  }
  rep.check_le("averaged intertwiner commutes with both actions", defect, 1e-12,
               "R lambda_1(g) = lambda_2(g) R after averaging over the group");

  double shape_dev = 0.0;
  for (std::size_t i = 0; i < R.rows; ++i)
    for (std::size_t j = 0; j < R.cols; ++j) {
      const bool corner = i < nx && j >= nx;
      if (corner) continue;
      const double expect = i == j ? 1.0 : 0.0;
      shape_dev = std::max(shape_dev, std::abs(R(i, j) - expect));
    }
  rep.check_le("intertwiner unitriangular, hence invertible", shape_dev, 1e-12,
               "the average preserves the commuting-diagram form");
  return rep;
}

// ---- complex-symmetrize -----------------------------------------------------

inline Report exp_complex_symmetrize(const Config& cfg) {
  Report rep;
  rep.id = "complex-symmetrize";
  rep.config = cfg.echo();
  const long long trials = cfg.integer("trials");
  double square_worst = 0.0, corner_worst = 0.0;
  rep.table_header = {"trial", "dim", "defect"};
  for (long long i = 0; i < trials; ++i) {
    Rng rng(mix_seed(cfg.seed(), 9000 + static_cast<std::uint64_t>(i)));
    const std::size_t n = 4 + 2 * static_cast<std::size_t>(i % 3);  // 4, 6, 8
    const Mat u = detail::random_complex_structure(n, rng);
    const Mat v = detail::random_complex_structure(n, rng);
    const Mat L = detail::random_mat(n, n, rng);
    const Mat M = symmetrize_complex(u, v, L);
    const double corner_eq = mat_max_abs(mat_add(matmul(u, M), matmul(M, v)));
    const double dsq = triangular_square_defect(u, v, M);
    corner_worst = std::max(corner_worst, corner_eq);
    square_worst = std::max(square_worst, dsq);
    rep.table_rows.push_back({detail::cell(static_cast<double>(i)),
                              detail::cell(static_cast<double>(n)), detail::cell(dsq)});
  }
  rep.check_le("symmetrized corner solves u M + M v = 0", corner_worst, 1e-12,
               "(L + u L v)/2 averages the two-element conjugation");
  rep.check_le("triangular operator squares to minus identity", square_worst, 1e-12,
               "the symmetrized corner makes the triangular map a complex structure");
  return rep;
}

// ---- c0-example -------------------------------------------------------------

inline Report exp_c0_example(const Config& cfg) {
  Report rep;
  rep.id = "c0-example";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  if (n < 1 || n > 8) throw ConfigError("n must lie in 1..8");
  detail::C0Setup s = detail::build_c0(n);
  const std::size_t order = s.elements.size();

  // derivation identity over every pair of group elements, in exact arithmetic
  double deriv_dev = 0.0;
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = 0; j < order; ++j) {
      Vec alpha(n), beta(n);
      for (std::size_t t = 0; t < n; ++t) {
        alpha[t] = s.us[i](t, t);
        beta[t] = s.us[j](t, t);
      }
      Vec prod(n);
      for (std::size_t t = 0; t < n; ++t) prod[t] = alpha[t] * beta[t];
      Vec lhs = s.ex.d_of(prod);
      Vec rhs = s.ex.d_of(alpha);
      Vec db = s.ex.d_of(beta);
      for (std::size_t t = 0; t < n; ++t) rhs[t] += alpha[t] * db[t];
      deriv_dev = std::max(deriv_dev, max_abs(sub(lhs, rhs)));
    }
  rep.check_le("derivation identity over all pairs", deriv_dev, 1e-12,
               "d(gh) = u(g) d(h) + d(g) v(h)");

  // the constant-slope column realizes every d(g) as an inner commutator
  double inner_dev = 0.0;
  const Vec A = s.ex.A();
  for (std::size_t i = 0; i < order; ++i) {
    Vec br(n);
    for (std::size_t t = 0; t < n; ++t) br[t] = s.us[i](t, t) * A[t] - A[t];
    inner_dev = std::max(inner_dev, max_abs(sub(br, s.rhs[i].apply(Vec{1.0}))));
  }
  rep.check_le("corner is the inner commutator of the slope column", inner_dev, 1e-12,
               "d(g) y = y, restricted to the flipped coordinates");

  // splitting witness: solve, certify uniqueness, pin the value
  const WitnessSolve ws = solve_inner_witness(s.us, s.vs, s.rhs);
  rep.check_ge("witness system has a unique solution", ws.min_pivot, 1e-9,
               "the stacked commutator equations are nondegenerate");
  rep.check_le("witness system residual", ws.residual, 1e-12,
               "the linear system is solved exactly");
  double pin_dev = 0.0;
  for (std::size_t t = 0; t < n; ++t) pin_dev = std::max(pin_dev, std::abs(ws.L(t, 0) - 0.5));
  rep.check_le("witness pinned at one half per coordinate", pin_dev, 1e-12,
               "only the reflected slope column solves the witness equations");

  SearchOptions light;
  light.n_samples = 60;
  light.restarts = 2;
  light.steps = 40;
  light.seed = mix_seed(cfg.seed(), 11);
  const WitnessReport pos = check_splitting(s.pair, ws.L, light);
  rep.check_le("splitting witnessed", pos.derivation_defect, 1e-9,
               "d(g) = -[u(g), ell, v(g)] for the solved ell");
  rep.check_le("witness distance to the twisted map", std::abs(pos.linear_diff.value - 0.5), 1e-9,
               "the bounded difference has norm one half");

  const WitnessReport neg = check_splitting(s.pair, detail::column_matrix(A), light);
  rep.check_ge("unreflected slope column rejected", neg.derivation_defect, 0.9,
               "the companion column fails the witness equations by a unit defect");

  rep.table_header = {"quantity", "value"};
  for (std::size_t t = 0; t < n; ++t)
    rep.table_rows.push_back({"witness_" + std::to_string(t), detail::cell(ws.L(t, 0))});
  rep.table_rows.push_back({"residual", detail::cell(ws.residual)});
  rep.table_rows.push_back({"min_pivot", detail::cell(ws.min_pivot)});
  rep.table_rows.push_back({"linear_distance", detail::cell(pos.linear_diff.value)});
  return rep;
}

// ---- block-semigroup --------------------------------------------------------

inline Report exp_block_semigroup(const Config& cfg) {
  Report rep;
  rep.id = "block-semigroup";
  rep.config = cfg.echo();
  const long long trials = cfg.integer("trials");
  const double p = cfg.number("p");
  if (!(p >= 1.0 && p < kInf)) throw ConfigError("p must be finite and >= 1");
  const long long nsamp = cfg.integer("nsamp");

  double defect_worst = 0.0, compose_worst = 0.0;
  rep.table_header = {"trial", "defect"};
  for (long long i = 0; i < trials; ++i) {
    Rng rng(mix_seed(cfg.seed(), 500 + static_cast<std::uint64_t>(i)));
    const std::size_t in_dim = 3 + static_cast<std::size_t>(i % 4);
    const std::size_t block_len = 2 + static_cast<std::size_t>(i % 3);
    const BlockContraction b = random_block_contraction(in_dim, block_len, p, rng);
    const SpaceSpec in_space = SpaceSpec::lp(p, b.in_dim);
    const SpaceSpec out_space = SpaceSpec::lp(p, b.out_dim);
    const Mat d = block_derivation(b);
    double defect = 0.0;
    for (long long s = 0; s < nsamp; ++s) {
      Vec x = rng.normal_vec(in_dim);
      Vec val = add(sub(b.apply(kalton_peck(in_space, x)), kalton_peck(out_space, b.apply(x))),
                    d.apply(x));
      defect = std::max(defect, norm(out_space, val) / norm(in_space, x));
    }
    defect_worst = std::max(defect_worst, defect);
    rep.table_rows.push_back({detail::cell(static_cast<double>(i)), detail::cell(defect)});

    if (i % 10 == 0) {
      const BlockContraction outer = random_block_contraction(b.out_dim, 2, p, rng);
      const BlockContraction both = block_compose(outer, b);
      const Mat lhs = block_derivation(both);
      Mat rhs(lhs.rows, lhs.cols);
      const Mat db = block_derivation(b);
      const Mat douter = block_derivation(outer);
      // d(ab) = a d(b) + d(a) b with the contraction acting columnwise
      Mat a_mat = Mat::from_columns(outer.columns);
      Mat b_mat = Mat::from_columns(b.columns);
      rhs = mat_add(matmul(a_mat, db), matmul(douter, b_mat));
      compose_worst = std::max(compose_worst, mat_max_abs(mat_sub(lhs, rhs)));
    }
  }
  rep.check_le("compatibility defect vanishes", defect_worst, 1e-9,
               "K(T_u x) = T_u K(x) + sum_n x_n K(u_n) for disjoint unit blocks");
  rep.check_le("corner composes as a derivation", compose_worst, 1e-12,
               "d(ab) = a d(b) + d(a) b");
  return rep;
}

// ---- rank1-derivation -------------------------------------------------------

inline Report exp_rank1_derivation(const Config& cfg) {
  Report rep;
  rep.id = "rank1-derivation";
  rep.config = cfg.echo();
  const std::size_t n = static_cast<std::size_t>(cfg.integer("n"));
  const double theta = cfg.number("theta");
  const long long trials = cfg.integer("trials");
  const long long cloud = cfg.integer("cloud");
  const std::string w_mode = cfg.str("w_mode");

  Rng rng(mix_seed(cfg.seed(), 13));
  Vec w0(n, 1.0), w1(n, 1.0);
  if (w_mode == "random") {
    w0 = detail::positive_vec(rng, n);
    w1 = detail::positive_vec(rng, n);
  } else if (w_mode != "unit") {
    throw ConfigError("w_mode must be unit or random");
  }
  const InterpCouple c = make_couple(cfg.number("p0"), w0, cfg.number("p1"), w1);
  const InterpCouple dc = dual_couple(c);
  const SpaceSpec sp = theta_space(c, theta);
  const SpaceSpec sd = theta_space(dc, theta);
  const HomogeneousMap omega = differential_map(c, theta);

  std::vector<Vec> ys;
  ys.reserve(static_cast<std::size_t>(cloud));
  for (long long i = 0; i < cloud; ++i)
    ys.push_back(i % 2 == 0 ? rng.normal_vec(n) : rng.spread_vec(n));

  double defect_worst = 0.0;
  std::vector<std::pair<Vec, Vec>> pairing_samples;
  pairing_samples.reserve(static_cast<std::size_t>(trials * cloud));
  rep.table_header = {"trial", "defect"};
  for (long long j = 0; j < trials; ++j) {
    Vec phi = rng.normal_vec(n);
    Vec x = rng.normal_vec(n);
    phi = scale(1.0 / norm(sd, phi), phi);
    x = scale(1.0 / norm(sp, x), x);
    const VecMap d = rank1_derivation(c, theta, phi, x);
    const VecMap g = rank1_map(phi, x);
    double defect = 0.0;
    for (const Vec& y : ys) {
      Vec val = add(d(y), sub(g(omega.apply0(y)), omega.apply0(g(y))));
      defect = std::max(defect, norm(sp, val) / norm(sp, y));
      pairing_samples.emplace_back(phi, y);
    }
    defect_worst = std::max(defect_worst, defect);
    rep.table_rows.push_back({detail::cell(static_cast<double>(j)), detail::cell(defect)});
  }
  const double dual_const = duality_defect(c, theta, pairing_samples).constant;
  rep.check_le("rank-one defect within the duality constant", defect_worst,
               dual_const * 1.05 + 1e-12,
               "d(phi (x) x) + [g, Omega, g] collapses to the duality pairing");
  return rep;
}

// ---- equivalence-check ------------------------------------------------------

inline Report exp_equivalence_check(const Config& cfg) {
  Report rep;
  rep.id = "equivalence-check";
  rep.config = cfg.echo();
  const std::size_t n = 4;
  Rng rng(mix_seed(cfg.seed(), 15));
  // disjoint character sets force a trivial commutant, hence a unique witness
  const auto us = detail::character_family(3, {1u, 2u, 4u, 3u});
  const auto vs = detail::character_family(3, {5u, 6u, 7u, 0u});
  const FiniteGroupRep G = make_group_rep(us, vs);

  const SpaceSpec S = SpaceSpec::lp(2.0, n);
  const HomogeneousMap omega1 = kalton_peck_map(S);
  const Mat L1 = detail::random_mat(n, n, rng);
  const Mat L0 = detail::random_mat(n, n, rng);

  std::vector<Mat> d1, d2;
  for (std::size_t g = 0; g < G.size(); ++g) {
    d1.push_back(mat_sub(matmul(G.u[g], L1), matmul(L1, G.v[g])));
    d2.push_back(mat_add(d1[g], mat_sub(matmul(G.u[g], L0), matmul(L0, G.v[g]))));
  }
  TwistedPair pa{omega1, all_element_maps(G, &d1)};
  HomogeneousMap omega2 = omega1;
  omega2.f = [S, L0](const Vec& y) { return sub(kalton_peck(S, y), L0.apply(y)); };
  TwistedPair pb{omega2, all_element_maps(G, &d2)};

  SearchOptions light;
  light.n_samples = 80;
  light.restarts = 2;
  light.steps = 50;
  light.seed = mix_seed(cfg.seed(), 16);

  const WitnessReport self = check_equivalence(pa, pa, Mat(n, n), light);
  rep.check_le("self equivalence witnessed by zero",
               std::max(self.derivation_defect, self.linear_diff.value), 1e-12,
               "a pair is equivalent to itself with L = 0");

  const WitnessReport shifted = check_equivalence(pa, pb, L0, light);
  rep.check_le("shifted pair witnessed", shifted.derivation_defect, 1e-9,
               "d_1(g) - d_2(g) = -[u(g), L, v(g)]");
  rep.check_le("witness bounds the map difference", shifted.linear_diff.value, 1e-9,
               "Omega_1 - Omega_2 - L is bounded (here zero)");

  std::vector<Mat> rhs;
  for (std::size_t g = 0; g < G.size(); ++g) rhs.push_back(mat_sub(d1[g], d2[g]));
  const WitnessSolve ws = solve_inner_witness(G.u, G.v, rhs);
  rep.check_ge("witness solver pivot", ws.min_pivot, 1e-9,
               "disjoint characters leave no commutant freedom");
  rep.check_le("witness recovered uniquely", mat_max_abs(mat_sub(ws.L, L0)), 1e-9,
               "the solved witness equals the planted shift");

  const WitnessReport wrong = check_equivalence(pa, pb, Mat(n, n), light);
  rep.check_ge("zero witness rejected for the shifted pair", wrong.derivation_defect, 1e-3,
               "omitting the shift leaves a visible commutator defect");

  rep.table_header = {"quantity", "value"};
  rep.table_rows.push_back({"self_defect", detail::cell(self.derivation_defect)});
  rep.table_rows.push_back({"shifted_defect", detail::cell(shifted.derivation_defect)});
  rep.table_rows.push_back({"witness_recovery_dev", detail::cell(mat_max_abs(mat_sub(ws.L, L0)))});
  rep.table_rows.push_back({"min_pivot", detail::cell(ws.min_pivot)});
  return rep;
}

// ---- splitting-check --------------------------------------------------------

inline Report exp_splitting_check(const Config& cfg) {
  Report rep;
  rep.id = "splitting-check";
  rep.config = cfg.echo();
  const std::string target = cfg.str("target");
  if (target != "both" && target != "c0" && target != "tree")
    throw ConfigError("target must be c0, tree, or both");
  rep.table_header = {"quantity", "value"};

  SearchOptions light;
  light.n_samples = 80;
  light.restarts = 2;
  light.steps = 50;
  light.seed = mix_seed(cfg.seed(), 17);

  if (target != "tree") {
    detail::C0Setup s = detail::build_c0(static_cast<std::size_t>(cfg.integer("n")));
    const WitnessSolve ws = solve_inner_witness(s.us, s.vs, s.rhs);
    const WitnessReport pos = check_splitting(s.pair, ws.L, light);
    rep.check_le("bounded witness found for the marked-coordinate pair",
                 std::max(ws.residual, pos.derivation_defect), 1e-9,
                 "d(g) = -[u(g), ell, v(g)] with ell bounded");
    const WitnessReport neg =
        check_splitting(s.pair, detail::column_matrix(s.ex.A()), light);
    rep.check_ge("candidate with the unreflected sign rejected", neg.derivation_defect, 0.9,
                 "the slope column itself is not a witness");
    rep.table_rows.push_back({"c0_residual", detail::cell(ws.residual)});
    rep.table_rows.push_back({"c0_defect", detail::cell(pos.derivation_defect)});
  }

  if (target != "c0") {
    const int k = static_cast<int>(cfg.integer("k"));
    const int D = static_cast<int>(cfg.integer("D"));
    const TreeSpace T = make_tree(k, D);
    const Mat L0 = detail::left_shift_matrix(T);
    const SpaceSpec S = T.space();

    std::vector<GroupElementMaps> elements;
    for (int a = -k; a <= k; ++a) {
      if (a == 0) continue;
      TreeWord g{{a}};
      TreeWord gi = word_inverse(g);
      GroupElementMaps e;
      e.u = [&T, g](const Vec& x) { return translate(T, g, x).x; };
      e.u_inv = [&T, gi](const Vec& x) { return translate(T, gi, x).x; };
      e.v = e.u;
      e.v_inv = e.u_inv;
      e.d = [&T, g, &L0](const Vec& y) {
        return sub(translate(T, g, L0.apply(y)).x, L0.apply(translate(T, g, y).x));
      };
      e.name = detail::word_label(g);
      elements.push_back(std::move(e));
    }
    TwistedPair pair{zero_map(S, S), elements};
    const Mat ell = mat_scale(-1.0, L0);
    const WitnessReport tr = check_splitting(pair, ell, light);
    rep.check_le("shift witness derivation-compatible", tr.derivation_defect, 1e-12,
                 "the inner corner cancels against the witness commutator identically");

    double worst = 0.0, min_step = kInf, prev = 0.0;
    const int nmax = std::min(4, 2 * k);
    for (int nn = 1; nn <= nmax; ++nn) {
      Vec x = zeros(T.dim());
      for (int i = 0; i < nn; ++i) x[T.children[0][static_cast<std::size_t>(i)]] = 1.0;
      const double ratio = l2_norm(ell.apply(x)) / l2_norm(x);
      worst = std::max(worst, std::abs(ratio - std::sqrt(static_cast<double>(nn))));
      if (nn > 1) min_step = std::min(min_step, ratio - prev);
      prev = ratio;
      rep.table_rows.push_back({"tree_ratio_" + std::to_string(nn), detail::cell(ratio)});
    }
    rep.check_le("witness growth equals sqrt n", worst, 1e-12,
                 "n e_root against sqrt n on sibling sums");
    rep.check("witness growth flagged as increasing", min_step, 0.0, min_step > 0.0,
              "no bounded equivariant witness at this scale: the only family grows");
  }
  return rep;
}

// ---- registry ---------------------------------------------------------------

struct ExperimentInfo {
  std::string id;
  std::string summary;
  std::vector<ParamDef> params;
  Report (*run)(const Config&);
};

inline const std::vector<ExperimentInfo>& experiment_table() {
  static const std::vector<ExperimentInfo> table = [] {
    std::vector<ExperimentInfo> t;
    auto add = [&t](std::string id, std::string summary, std::vector<ParamDef> params,
                    Report (*run)(const Config&)) {
      params.push_back({"seed", "u64", "42", "master random seed"});
      t.push_back({std::move(id), std::move(summary), std::move(params), run});
    };
    add("nabla-growth", "sign-average growth of the entrywise log map",
        {{"m", "ilist", "1,2,3,4", "dyadic sizes n = 2^m"},
         {"mode", "str", "auto", "auto | exhaustive"},
         {"mc_samples", "int", "20000", "Monte-Carlo patterns for n > 20"}},
        &exp_nabla_growth);
    add("tree-commutator", "translated shift commutators on the rooted tree",
        {{"k", "int", "2", "free generators"},
         {"D", "int", "6", "tree depth"},
         {"maxlen", "int", "2", "translation word length"},
         {"samples", "int", "1000", "search samples"},
         {"restarts", "int", "64", "ascent restarts"}},
        &exp_tree_commutator);
    add("tree-growth", "collapse growth of sibling sums under the parent shift",
        {{"k", "int", "2", "free generators"},
         {"D", "int", "4", "tree depth"},
         {"nmax", "int", "4", "largest sibling count"}},
        &exp_tree_growth);
    add("interp-differential", "scale differential: anchor identity and extremality",
        {{"n", "int", "8", "coordinate dimension"},
         {"thetas", "dlist", "0.25,0.5,0.75", "interior interpolation parameters"},
         {"nx", "int", "1000", "random vectors per theta"},
         {"fd_h", "double", "1e-5", "finite-difference step"}},
        &exp_interp_differential);
    add("interp-flow", "vertical-line flow of the extremal family",
        {{"n", "int", "8", "coordinate dimension"},
         {"p0", "double", "inf", "first endpoint exponent"},
         {"p1", "double", "1", "second endpoint exponent"},
         {"w_mode", "str", "unit", "unit | random endpoint weights"},
         {"theta", "double", "0.5", "interpolation parameter"},
         {"ts", "dlist", "0,0.1,-0.1,1,-1", "time grid"},
         {"trials", "int", "3", "random initial vectors"}},
        &exp_interp_flow);
    add("riesz-thorin", "operator norm interpolation with exact endpoints",
        {{"n", "int", "8", "matrix size"},
         {"p0", "double", "inf", "first endpoint exponent"},
         {"p1", "double", "1", "second endpoint exponent"},
         {"theta", "double", "0.5", "interpolation parameter"},
         {"trials", "int", "100", "random matrices"}},
        &exp_riesz_thorin);
    add("lamperti-extension", "isometric triangular extension of dyadic isometries",
        {{"p", "double", "3", "integrability exponent"},
         {"r", "ilist", "2,5,8,11", "staircase sizes"},
         {"c", "int", "3", "block level of sampled step functions"},
         {"nfun", "int", "1000", "corner-formula sample functions"},
         {"npairs", "int", "120", "twisted-ratio sample pairs per element"}},
        &exp_lamperti_extension);
    add("lamperti-centralizer-growth", "commutator growth without the corner correction",
        {{"p", "double", "3", "integrability exponent"},
         {"r", "ilist", "2,3,4,5,6,7,8,9,10,11", "staircase sizes"},
         {"c", "int", "3", "block level of sampled step functions"},
         {"nsamp", "int", "200", "random step functions per size"}},
        &exp_lamperti_centralizer_growth);
    add("averaging-rrr", "equivariant averaging over the sign group",
        {{"n", "int", "4", "coordinates (group order 2^n)"},
         {"nsamp", "int", "40", "sample vectors per element"}},
        &exp_averaging_rrr);
    add("averaging-gsame", "intertwiner averaging for conjugate triangular pairs", {},
        &exp_averaging_gsame);
    add("complex-symmetrize", "corner symmetrization for complex structures",
        {{"trials", "int", "100", "random instances over dims 4, 6, 8"}},
        &exp_complex_symmetrize);
    add("c0-example", "marked-coordinate derivation on the sup-normed head",
        {{"n", "int", "4", "coordinates (group order 2^n)"}},
        &exp_c0_example);
    add("block-semigroup", "disjoint unit blocks acting on the entrywise log map",
        {{"trials", "int", "100", "random block decompositions"},
         {"p", "double", "2", "integrability exponent"},
         {"nsamp", "int", "25", "sample vectors per decomposition"}},
        &exp_block_semigroup);
    add("rank1-derivation", "rank-one derivations on the interpolation scale",
        {{"n", "int", "8", "coordinate dimension"},
         {"p0", "double", "4", "first endpoint exponent"},
         {"p1", "double", "1.3333333333333333", "second endpoint exponent"},
         {"w_mode", "str", "random", "unit | random endpoint weights"},
         {"theta", "double", "0.5", "interpolation parameter"},
         {"trials", "int", "100", "random rank-one pairs"},
         {"cloud", "int", "200", "shared sample vectors"}},
        &exp_rank1_derivation);
    add("equivalence-check", "witnessed equivalence of planted triangular pairs", {},
        &exp_equivalence_check);
    add("splitting-check", "splitting witnesses: solved, pinned, or flagged as growing",
        {{"target", "str", "both", "c0 | tree | both"},
         {"n", "int", "4", "coordinates of the sup-normed head"},
         {"k", "int", "2", "free generators"},
         {"D", "int", "4", "tree depth"}},
        &exp_splitting_check);
    return t;
  }();
  return table;
}

inline const ExperimentInfo* find_experiment(const std::string& id) {
  for (const auto& e : experiment_table())
    if (e.id == id) return &e;
  return nullptr;
}

inline Report run_experiment(const ExperimentInfo& info,
                             const std::map<std::string, std::string>& overrides,
                             bool use_env = true) {
  const Config cfg = resolve_config(info.params, overrides, use_env);
  const auto t0 = std::chrono::steady_clock::now();
  Report rep = info.run(cfg);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// pinned runs used by the aggregate suite: explicit overrides, no environment
inline Report run_pinned(const std::string& id, std::map<std::string, std::string> overrides,
                         std::uint64_t seed) {
  const ExperimentInfo* info = find_experiment(id);
  require(info != nullptr, "run_pinned: unknown experiment " + id);
  overrides.emplace("seed", std::to_string(seed));
  return run_experiment(*info, overrides, false);
}

}  // namespace twistlab
