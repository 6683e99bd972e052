#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "twistlab/actions.hpp"

using namespace twistlab;
using Catch::Approx;

TEST_CASE("signs, permutations and units compose as expected") {
  SignElement s({1.0, -1.0, 1.0});
  PermElement p({2, 0, 1});
  Vec x = {1.0, 2.0, 3.0};
  CHECK(s.apply(x) == Vec{1.0, -2.0, 3.0});
  CHECK(p.apply(x) == Vec{3.0, 1.0, 2.0});

  UnitElement u({1.0, -1.0, 1.0}, {2, 0, 1});
  CHECK(u.apply(x) == Vec{3.0, -1.0, 2.0});
  UnitElement id = UnitElement::identity(3);
  // u composed with its inverse is the identity, elementwise
  UnitElement w = u.compose(u.inverse());
  CHECK(w.apply(x) == id.apply(x));
  CHECK(u.inverse().compose(u).apply(x) == x);

  CHECK_THROWS_AS(SignElement({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(PermElement({0, 0}), std::invalid_argument);
}

TEST_CASE("dyadic rationals stay exact") {
  CHECK(Dyadic(2, 2).num == 1);  // normalized to 1/2
  CHECK(Dyadic(2, 2).lev == 1);
  CHECK(Dyadic(3, 3).value() == Approx(0.375));
  CHECK((Dyadic(1, 1) + Dyadic(1, 2)).value() == Approx(0.75));
  CHECK((Dyadic(3, 2) - Dyadic(1, 2)).value() == Approx(0.5));
  CHECK((Dyadic(3, 1) * Dyadic(1, 2)).value() == Approx(0.375));
  CHECK(Dyadic(3, 3).floor_scaled(2) == 1);  // floor(0.375 * 4)
  CHECK(Dyadic(3, 3).ceil_scaled(2) == 2);
  CHECK(Dyadic(1, 0).floor_scaled(4) == 16);
  CHECK(Dyadic(0, 0).is_pow2() == false);
  CHECK(Dyadic(4, 2).is_pow2());  // 4/4 = 1 = 2^0
  CHECK_THROWS_AS(Dyadic(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Dyadic(1, 2) - Dyadic(1, 1), std::invalid_argument);

  DyadicInterval cell{Dyadic(1, 2), Dyadic(2, 2)};
  CHECK(cell.is_dyadic_cell());
  DyadicInterval skew{Dyadic(1, 2), Dyadic(1, 0)};  // [1/4, 1): length 3/4
  CHECK(!skew.is_dyadic_cell());
}

TEST_CASE("rescaling two halves onto unequal pieces, evaluated exactly") {
  // [0,1/2) -> [0,1/4) and [1/2,1) -> [1/4,1), p = 2; weights 1/2 and 3/2
  std::vector<DyadicInterval> src = {{Dyadic(0, 1), Dyadic(1, 1)}, {Dyadic(1, 1), Dyadic(2, 1)}};
  std::vector<DyadicInterval> dst = {{Dyadic(0, 2), Dyadic(1, 2)}, {Dyadic(1, 2), Dyadic(4, 2)}};
  LampertiElement e = make_lamperti(src, dst, {+1, +1}, 2.0);

  CHECK(e.pieces() == 2);
  CHECK(!e.is_regular());  // 3/2 is not a power of two
  CHECK(e.weight(0) == Approx(0.5));
  CHECK(e.weight(1) == Approx(1.5));

  const int m = 4;
  const std::size_t n = std::size_t{1} << m;

  // f = 1: T f = w^{1/2} on each source piece
  Vec ones(n, 1.0);
  Vec Tf = lamperti_apply(e, ones, m);
  CHECK(Tf.front() == Approx(std::sqrt(0.5)).margin(1e-15));
  CHECK(Tf.back() == Approx(std::sqrt(1.5)).margin(1e-15));

  // the derivation multiplies by (1/p) log w on each source piece
  Vec d = lamperti_derivation_apply(e, ones, m);
  CHECK(d.front() == Approx(0.5 * std::log(0.5) * std::sqrt(0.5)).margin(1e-15));
  CHECK(d.back() == Approx(0.5 * std::log(1.5) * std::sqrt(1.5)).margin(1e-15));
  CHECK(d.front() == Approx(-2.450645358671e-01).margin(1e-12));
  CHECK(d.back() == Approx(+2.482956558419e-01).margin(1e-12));

  // the composition evaluates f on the image: f must be constant there
  Vec bad(n, 1.0);
  for (std::size_t i = n / 2; i < n; ++i) bad[i] = 2.0;  // jump inside the image piece
  CHECK_THROWS_AS(lamperti_apply(e, bad, m), GridRefinementError);

  // measure-preservation makes T an L2 isometry on exactly representable f
  Vec f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) f[i] = (i < n / 4) ? 2.0 : -1.0;  // constant on dst pieces
  Vec Tf2 = lamperti_apply(e, f, m);
  auto L2 = SpaceSpec::discretized_lp(2.0, m);
  CHECK(norm(L2, Tf2) == Approx(norm(L2, f)).margin(1e-12));
}

TEST_CASE("staircase elements are regular and collapse under inversion") {
  const int r = 4;
  const double p = 3.0;
  LampertiElement st = lamperti_staircase(r, p);
  CHECK(st.pieces() == static_cast<std::size_t>(r + 1));
  CHECK(st.is_regular());

  double max_log_w = 0.0;
  for (std::size_t j = 0; j < st.pieces(); ++j)
    max_log_w = std::max(max_log_w, std::abs(std::log(st.weight(j))));
  CHECK(max_log_w == Approx((r - 1) * std::log(2.0)).margin(1e-12));

  const int m = r + 2;
  Rng rng(77);
  Vec f = coarse_step_vector(m, 3, rng);

  // T^{-1} T = identity; the two w^{1/p} amplitudes cancel to rounding
  LampertiElement inv = lamperti_inverse(st);
  Vec round_trip = lamperti_apply(inv, lamperti_apply(st, f, m), m);
  CHECK(max_abs(sub(round_trip, f)) <= 1e-12);

  // composition agrees with applying the factors in order
  LampertiElement both = lamperti_compose(inv, st);
  Vec composed = lamperti_apply(both, f, m);
  CHECK(max_abs(sub(composed, f)) == 0.0);

  // derivation = (1/p) log(w) . T f with the weight profile on source cells
  Vec Tf = lamperti_apply(st, f, m);
  Vec w = lamperti_weight(st, m);
  Vec d = lamperti_derivation_apply(st, f, m);
  for (std::size_t c = 0; c < f.size(); ++c)
    CHECK(d[c] == Approx(std::log(w[c]) / p * Tf[c]).margin(1e-12));

  // a generic fine vector is not representable through the expanding pieces
  Vec iota(std::size_t{1} << m, 0.0);
  for (std::size_t i = 0; i < iota.size(); ++i) iota[i] = static_cast<double>(i + 1);
  CHECK_THROWS_AS(lamperti_apply(st, iota, m), GridRefinementError);

  // too-coarse grids are refused outright
  CHECK_THROWS_AS(lamperti_apply(st, Vec(2, 1.0), 1), std::exception);
}

TEST_CASE("block contractions embed isometrically and carry a derivation") {
  Rng rng(5);
  const double p = 2.0;
  BlockContraction B = random_block_contraction(4, 3, p, rng);
  CHECK(B.in_dim == 4);
  CHECK(B.out_dim == 12);

  auto dom = SpaceSpec::lp(p, B.in_dim);
  auto cod = SpaceSpec::lp(p, B.out_dim);
  for (int i = 0; i < 40; ++i) {
    Vec x = rng.normal_vec(B.in_dim);
    CHECK(norm(cod, B.apply(x)) == Approx(norm(dom, x)).margin(1e-12));
  }

  // the attached corner columns are the log images of the blocks
  Mat D = block_derivation(B);
  for (std::size_t j = 0; j < B.in_dim; ++j) {
    Vec want = kalton_peck(cod, B.columns[j]);
    for (std::size_t i = 0; i < B.out_dim; ++i)
      CHECK(D(i, j) == Approx(want[i]).margin(1e-14));
  }

  // composition of block maps is again a block map acting consistently;
  // the partner's output dimension must match B's input dimension
  BlockContraction C = random_block_contraction(2, 2, p, rng);
  BlockContraction BC = block_compose(B, C);
  for (int i = 0; i < 10; ++i) {
    Vec x = rng.normal_vec(2);
    CHECK(max_abs(sub(BC.apply(x), B.apply(C.apply(x)))) <= 1e-14);
  }

  // malformed columns are rejected: overlap and non-unit length
  CHECK_THROWS_AS(make_block_contraction({{1.0, 0.0}, {1.0, 0.0}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_block_contraction({{0.5, 0.0}, {0.0, 1.0}}, 2.0), std::invalid_argument);
}

TEST_CASE("flip-marking corner on the sup-normed head") {
  C0Example ex(4);
  CHECK(ex.X.kind == SpaceKind::Sup);

  // d(g)(1) marks exactly the flipped coordinates
  Vec g = {1.0, -1.0, -1.0, 1.0};
  CHECK(ex.d_of(g) == Vec{0.0, 1.0, 1.0, 0.0});
  CHECK(is_zero(ex.d_of(Vec(4, 1.0))));
  CHECK(ex.A() == Vec(4, -0.5));

  // d(gh) = u(g) d(h) + d(g) v(h) over the whole sign group, exactly:
  // with u = v = multiplication by signs and d constant in y, the identity
  // reads  d(gh) = g .* d(h) + d(g)
  for (int a = 0; a < 16; ++a) {
    Vec ga(4), hb(4);
    for (int i = 0; i < 4; ++i) ga[static_cast<std::size_t>(i)] = (a >> i) & 1 ? -1.0 : 1.0;
    for (int b = 0; b < 16; ++b) {
      for (int i = 0; i < 4; ++i) hb[static_cast<std::size_t>(i)] = (b >> i) & 1 ? -1.0 : 1.0;
      Vec gh(4);
      for (int i = 0; i < 4; ++i) gh[static_cast<std::size_t>(i)] = ga[static_cast<std::size_t>(i)] * hb[static_cast<std::size_t>(i)];
      Vec lhs = ex.d_of(gh);
      Vec rhs = ex.d_of(ga);
      Vec dh = ex.d_of(hb);
      for (int i = 0; i < 4; ++i) rhs[static_cast<std::size_t>(i)] += ga[static_cast<std::size_t>(i)] * dh[static_cast<std::size_t>(i)];
      CHECK(max_abs(sub(lhs, rhs)) == 0.0);
    }
  }
}

TEST_CASE("derivation identity defect vanishes for genuine derivations") {
  // Jordan-type family on R^2: u = v = id, d(n) = n alpha E11 is a derivation
  // for the additive semigroup since d(n + m) = d(n) + d(m)
  auto E11 = [](double a) {
    return [a](const Vec& y) { return Vec{a * y[0], 0.0}; };
  };
  const double alpha = 0.7;
  auto idm = [](const Vec& y) { return y; };
  std::vector<DerivationCheckCase> cases;
  for (int n = 1; n <= 3; ++n) {
    DerivationCheckCase cs;
    cs.d_g = E11(alpha * n);
    cs.d_h = E11(alpha * 2);
    cs.d_gh = E11(alpha * (n + 2));
    cs.u_g = idm;
    cs.v_h = idm;
    cases.push_back(cs);
  }
  Rng rng(3);
  std::vector<Vec> samples;
  for (int i = 0; i < 25; ++i) samples.push_back(rng.normal_vec(2));
  auto s2 = SpaceSpec::lp(2.0, 2);
  CHECK(derivation_identity_defect(s2, s2, cases, samples) <= 1e-14);

  // breaking the additivity breaks the identity
  cases[0].d_gh = E11(alpha * 10);
  CHECK(derivation_identity_defect(s2, s2, cases, samples) > 0.1);
}
