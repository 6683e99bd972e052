#include <catch2/catch_amalgamated.hpp>
#include <bit>
#include <cmath>

#include "twistlab/actions.hpp"
#include "twistlab/compat.hpp"

using namespace twistlab;
using Catch::Approx;

namespace {

Mat random_square(Rng& rng, std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

GroupElementMaps sign_element(const Vec& eps) {
  GroupElementMaps g;
  g.u = diag_op(eps);
  g.u_inv = diag_op(eps);
  g.v = diag_op(eps);
  g.v_inv = diag_op(eps);
  return g;
}

SearchOptions light_search() {
  SearchOptions opt;
  opt.n_samples = 300;
  opt.restarts = 12;
  opt.steps = 60;
  return opt;
}

}  // namespace

TEST_CASE("exact linear norms match hand values") {
  Mat M(2, 2);
  M(0, 0) = 1; M(0, 1) = 2; M(1, 0) = 3; M(1, 1) = 4;
  auto s2 = SpaceSpec::lp(2.0, 2);

  auto inf_norm = exact_linear_norm(M, SpaceSpec::sup(2), SpaceSpec::sup(2));
  CHECK(inf_norm.exact);
  CHECK(inf_norm.value == Approx(7.0));  // max row sum

  auto one_norm = exact_linear_norm(M, SpaceSpec::lp(1.0, 2), SpaceSpec::lp(1.0, 2));
  CHECK(one_norm.value == Approx(6.0));  // max column sum

  auto two_norm = exact_linear_norm(M, s2, s2);
  CHECK(two_norm.value == Approx(5.464985704219).margin(1e-9));
  CHECK(two_norm.value == Approx(spectral_norm(M)).margin(1e-10));

  // diagonal matrices between weighted spaces have multiplier norms
  Mat D(2, 2);
  D(0, 0) = 3.0; D(1, 1) = -5.0;
  CHECK(exact_linear_norm(D, s2, s2).value == Approx(5.0).margin(1e-12));
}

TEST_CASE("search strategies certify lower bounds that reach the truth") {
  Mat M(2, 2);
  M(0, 0) = 1; M(0, 1) = 2; M(1, 0) = 3; M(1, 1) = 4;
  auto s2 = SpaceSpec::lp(2.0, 2);
  const double truth = spectral_norm(M);

  SearchOptions sample;
  sample.strategy = NormStrategy::Sampling;
  auto low = homogeneous_norm(M, s2, s2, sample);
  CHECK_FALSE(low.exact);
  CHECK(low.value <= truth + 1e-12);
  CHECK(low.value >= 0.9 * truth);  // random rays get close in 2 dimensions

  auto sphere = homogeneous_norm(M, s2, s2, SearchOptions{});
  CHECK(sphere.value == Approx(truth).margin(1e-9));
  CHECK(sphere.value <= truth + 1e-12);

  // the witnessing ray replays the reported value
  REQUIRE(!sphere.argmax.empty());
  const double ny = norm(s2, sphere.argmax);
  CHECK(norm(s2, M.apply(sphere.argmax)) / ny == Approx(sphere.value).margin(1e-12));
}

TEST_CASE("sign flips centralize the entrywise log map") {
  auto K = kalton_peck_map(SpaceSpec::lp(2.0, 4));
  std::vector<GroupElementMaps> gs = {
      sign_element({1, -1, 1, -1}),
      sign_element({-1, -1, -1, -1}),
      sign_element({1, 1, -1, 1}),
  };
  // |eps_k x_k| = |x_k| and the norm is sign-blind: the commutator vanishes
  // identically, so even the searched sup is exactly zero
  auto bound = centralizer_constant(gs, K, light_search());
  CHECK(bound.value == 0.0);
  CHECK(bound.per_element.size() == 3);

  // a coordinate permutation does NOT centralize K in general position
  GroupElementMaps perm;
  Mat P(4, 4);
  P(0, 1) = 1; P(1, 0) = 1; P(2, 2) = 1; P(3, 3) = 1;
  perm.u = matrix_op(P);
  perm.u_inv = matrix_op(P);
  perm.v = matrix_op(Mat::identity(4));
  perm.v_inv = matrix_op(Mat::identity(4));
  auto off = centralizer_constant({perm}, K, light_search());
  CHECK(off.value > 0.1);
}

TEST_CASE("compatibility defect vanishes exactly when the corner compensates") {
  auto K = kalton_peck_map(SpaceSpec::lp(2.0, 4));
  TwistedPair pair;
  pair.omega = K;
  pair.elements = {sign_element({1, -1, -1, 1})};
  // zero corner, commuting action: defect 0
  auto fb = compatibility_defect(pair, light_search());
  CHECK(fb.value == 0.0);

  // any nonzero linear corner breaks it by exactly its operator norm
  Mat D(4, 4);
  D(0, 0) = 0.25;
  pair.elements[0].d = matrix_op(D);
  auto fb2 = compatibility_defect(pair, light_search());
  CHECK(fb2.value == Approx(0.25).margin(1e-9));
}

TEST_CASE("triangular action of a rank-one corner grows linearly") {
  auto s2 = SpaceSpec::lp(2.0, 2);
  TriangularRep rep;
  rep.sum = twisted_sum(s2, s2, zero_map(s2, s2));
  const double alpha = 0.3;
  for (int n = 1; n <= 4; ++n) {
    Mat D(2, 2);
    D(0, 0) = alpha * n;
    GroupElementMaps g;
    g.u = identity_op();
    g.u_inv = identity_op();
    g.v = identity_op();
    g.v_inv = identity_op();
    g.d = matrix_op(D);
    rep.elements.push_back(g);
  }
  for (std::size_t i = 0; i < rep.elements.size(); ++i) {
    auto est = triangular_norm(rep, i, SearchOptions{});
    const double closed = 1.0 + alpha * static_cast<double>(i + 1);
    CHECK(est.value == Approx(closed).margin(1e-9));
    CHECK(est.value <= closed + 1e-9);  // the closed form is the true sup
  }
}

TEST_CASE("compatible isometries act as exact quasi-norm isometries") {
  auto s4 = SpaceSpec::lp(2.0, 4);
  TriangularRep rep;
  rep.sum = twisted_sum(s4, s4, kalton_peck_map(s4));
  rep.elements = {sign_element({-1, 1, -1, 1})};
  auto est = triangular_norm(rep, 0, light_search());
  CHECK(est.value == Approx(1.0).margin(1e-12));
}

TEST_CASE("group averaging restores equivariance") {
  auto s4 = SpaceSpec::lp(2.0, 4);
  auto K = kalton_peck_map(s4);

  // perturb the log map by a linear piece that is not sign-equivariant
  Mat L(4, 4);
  L(0, 1) = 0.4; L(2, 3) = -0.3;
  HomogeneousMap omega = K;
  omega.f = [K, L](const Vec& y) { return add(K.apply0(y), L.apply(y)); };

  // full sign group on 4 coordinates
  std::vector<GroupElementMaps> group;
  for (int mask = 0; mask < 16; ++mask) {
    Vec eps(4);
    for (int i = 0; i < 4; ++i) eps[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1.0 : 1.0;
    group.push_back(sign_element(eps));
  }

  auto avg = average_to_equivariant(group, omega);
  auto resid = centralizer_constant(group, avg.omega_avg, light_search());
  CHECK(resid.value <= 1e-9);

  // the correction is the linear part that averaging removed: at y = e2 the
  // average of eps .* L (eps .* y) over signs kills every off-diagonal entry
  Vec c = avg.correction.apply0(basis_vector(4, 1));
  CHECK(max_abs(add(c, L.apply(basis_vector(4, 1)))) <= 1e-12);
}

TEST_CASE("matrix families reconstruct their group table") {
  // characters of {+-1}^2 acting diagonally on l2^4
  std::vector<int> masks = {0, 1, 2, 3};
  std::vector<Mat> us, vs;
  for (int m : masks) {
    Vec d(4);
    for (int g = 0; g < 4; ++g)
      d[static_cast<std::size_t>(g)] = (std::popcount(static_cast<unsigned>(m & g)) % 2) ? -1.0 : 1.0;
    us.push_back(Mat::diag(d));
    vs.push_back(Mat::diag(d));
  }
  FiniteGroupRep G = make_group_rep(us, vs);
  CHECK(G.size() == 4);
  CHECK(G.identity == 0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(G.inv[i] == i);  // every character is an involution
    CHECK(G.mult[i][i] == G.identity);
  }
  auto gs = all_element_maps(G);
  REQUIRE(gs.size() == 4);
  Vec y = {1.0, 2.0, -1.0, 0.5};
  // u(g) u(h) = u(gh) pointwise
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Vec lhs = gs[i].u(gs[j].u(y));
      Vec rhs = gs[G.mult[i][j]].u(y);
      CHECK(max_abs(sub(lhs, rhs)) == 0.0);
    }

  // a family missing closure is refused
  CHECK_THROWS_AS(make_group_rep({us[1]}, {vs[1]}), std::invalid_argument);
}

TEST_CASE("bounded families average to genuine derivations") {
  std::vector<int> masks = {0, 1, 2, 3};
  std::vector<Mat> us, vs;
  for (int m : masks) {
    Vec d(4);
    for (int g = 0; g < 4; ++g)
      d[static_cast<std::size_t>(g)] = (std::popcount(static_cast<unsigned>(m & g)) % 2) ? -1.0 : 1.0;
    us.push_back(Mat::diag(d));
    vs.push_back(Mat::diag(d));
  }
  FiniteGroupRep G = make_group_rep(us, vs);

  // inner family L_g = L0 - u(g) L0 v(g) satisfies both normalizations
  Rng rng(6);
  Mat L0 = random_square(rng, 4);
  std::vector<Mat> L;
  for (std::size_t g = 0; g < 4; ++g)
    L.push_back(mat_sub(L0, matmul(G.u[g], matmul(L0, G.v[g]))));
  auto d = average_extension_family(G, L);  // re-checks the derivation identity

  // the identity element must carry d = 0
  CHECK(mat_max_abs(d[G.identity]) <= 1e-12);

  // families with L_e != 0 are rejected
  std::vector<Mat> badL = L;
  badL[G.identity] = L0;
  CHECK_THROWS_AS(average_extension_family(G, badL), std::invalid_argument);
}

TEST_CASE("complex structures symmetrize corners exactly") {
  // canonical J on R^4: J e1 = e2, J e2 = -e1, J e3 = e4, J e4 = -e3
  Mat J(4, 4);
  J(1, 0) = 1; J(0, 1) = -1; J(3, 2) = 1; J(2, 3) = -1;
  Rng rng(9);
  Mat L = random_square(rng, 4);

  Mat M = symmetrize_complex(J, J, L);
  CHECK(mat_max_abs(mat_add(matmul(J, M), matmul(M, J))) <= 1e-13);
  CHECK(triangular_square_defect(J, J, M) <= 1e-13);

  // the identity is not a complex structure
  CHECK_THROWS_AS(symmetrize_complex(Mat::identity(4), J, L), std::invalid_argument);
}

TEST_CASE("inner witnesses solve, certify uniqueness and validate") {
  // marked-coordinate system: signs on the sup head, trivial scalar tail,
  // so the unknown witness is a single column
  C0Example ex(3);
  std::vector<Mat> us, vs, rhs;
  for (int mask = 0; mask < 8; ++mask) {
    Vec eps(3);
    for (int i = 0; i < 3; ++i) eps[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1.0 : 1.0;
    us.push_back(Mat::diag(eps));
    vs.push_back(Mat::identity(1));
    Mat r(3, 1);
    Vec col = ex.d_of(eps);
    for (std::size_t i = 0; i < 3; ++i) r(i, 0) = col[i];
    rhs.push_back(r);
  }
  auto ws = solve_inner_witness(us, vs, rhs);
  CHECK(ws.unique);
  CHECK(ws.min_pivot >= 1e-9);
  CHECK(ws.residual <= 1e-12);
  // the witness is +1/2 per coordinate: the reflection of the corner A
  for (std::size_t i = 0; i < 3; ++i) CHECK(ws.L(i, 0) == Approx(0.5).margin(1e-12));

  // splitting check accepts the solved witness and rejects its negation
  TwistedPair pair;
  pair.omega = zero_map(SpaceSpec::sup(1), ex.X);
  for (int mask = 0; mask < 8; ++mask) {
    Vec eps(3);
    for (int i = 0; i < 3; ++i) eps[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1.0 : 1.0;
    GroupElementMaps g;
    g.u = diag_op(eps);
    g.u_inv = diag_op(eps);
    g.v = identity_op();
    g.v_inv = identity_op();
    Mat d(3, 1);
    Vec col = ex.d_of(eps);
    for (std::size_t i = 0; i < 3; ++i) d(i, 0) = col[i];
    g.d = matrix_op(d);
    pair.elements.push_back(g);
  }
  auto ok = check_splitting(pair, ws.L, light_search());
  CHECK(ok.witnessed);
  CHECK(ok.derivation_defect == 0.0);

  Mat bad = mat_scale(-1.0, ws.L);
  auto rejected = check_splitting(pair, bad, light_search());
  CHECK_FALSE(rejected.witnessed);
  CHECK(rejected.derivation_defect >= 0.9);
}

TEST_CASE("equivalence witnesses separate shifted pairs") {
  auto s4 = SpaceSpec::lp(2.0, 4);
  auto K = kalton_peck_map(s4);
  std::vector<GroupElementMaps> els = {sign_element({1, -1, 1, -1}),
                                       sign_element({-1, 1, 1, 1})};

  TwistedPair a;
  a.omega = K;
  a.elements = els;

  // a pair is equivalent to itself through the zero witness
  auto self_check = check_equivalence(a, a, Mat(4, 4), light_search());
  CHECK(self_check.witnessed);
  CHECK(self_check.derivation_defect == 0.0);
  CHECK(self_check.linear_diff.value == 0.0);

  // shift the map by L0 and compensate the derivations accordingly
  Rng rng(14);
  Mat L0 = random_square(rng, 4);
  TwistedPair b;
  b.omega = K;
  b.omega.f = [K, L0](const Vec& y) { return sub(K.apply0(y), L0.apply(y)); };
  b.elements = els;
  for (std::size_t i = 0; i < els.size(); ++i) {
    // d_2(g) = d_1(g) + [u, L0, v] keeps the pairs equivalent via L0
    Mat eps = Mat::identity(4);
    // recover the diagonal of the element action to build the commutator
    for (std::size_t k = 0; k < 4; ++k) eps(k, k) = els[i].u(basis_vector(4, k))[k];
    Mat br = mat_sub(matmul(eps, L0), matmul(L0, eps));
    b.elements[i].d = matrix_op(br);
  }
  auto sep = check_equivalence(a, b, L0, light_search());
  CHECK(sep.witnessed);
  CHECK(sep.derivation_defect <= 1e-12);
  // Omega_1 - Omega_2 - L0 = 0 identically
  CHECK(sep.linear_diff.value <= 1e-12);

  // the zero witness does not work for the shifted pair
  auto zero_w = check_equivalence(a, b, Mat(4, 4), light_search());
  CHECK_FALSE(zero_w.witnessed);
}

TEST_CASE("convex combinations stay bounded by design") {
  auto s4 = SpaceSpec::lp(2.0, 4);
  auto K = kalton_peck_map(s4);
  Rng rng(2);

  // the global flip with full weight: K is odd, the defect vanishes
  std::vector<GroupElementMaps> flip = {sign_element(Vec(4, -1.0))};
  for (int i = 0; i < 20; ++i) {
    Vec y = rng.normal_vec(4);
    CHECK(convex_combination_bound(K, flip, {1.0}, y) <= 1e-15);
  }

  // coefficients must sum to one in absolute value
  CHECK_THROWS_AS(convex_combination_bound(K, flip, {0.7}, rng.normal_vec(4)),
                  std::invalid_argument);
}
