#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "twistlab/interp.hpp"

using namespace twistlab;
using Catch::Approx;

namespace {

InterpCouple random_couple(double p0, double p1, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vec w0(n), w1(n);
  for (std::size_t k = 0; k < n; ++k) {
    w0[k] = rng.uniform(0.3, 2.5);
    w1[k] = rng.uniform(0.3, 2.5);
  }
  return make_couple(p0, std::move(w0), p1, std::move(w1));
}

}  // namespace

TEST_CASE("interpolation parameters take their closed forms") {
  // (sup, l1) at theta: 1/p_theta = theta, and only the finite endpoint
  // contributes weight
  auto c = random_couple(kInf, 1.0, 5, 31);
  auto par = interp_params(c, 0.5);
  CHECK(par.p_theta == Approx(2.0));
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(par.w_theta[k] == Approx(c.w1[k]).margin(1e-13));

  // equal exponents: geometric-mean weights at the same exponent
  auto ce = random_couple(1.5, 1.5, 5, 32);
  auto pare = interp_params(ce, 0.4);
  CHECK(pare.p_theta == Approx(1.5));
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(pare.w_theta[k] ==
          Approx(std::pow(ce.w0[k], 0.6) * std::pow(ce.w1[k], 0.4)).margin(1e-13));

  // the ends of the parameter interval reproduce the endpoints
  auto cg = random_couple(4.0, 4.0 / 3.0, 4, 33);
  Rng rng(1);
  Vec x = rng.normal_vec(4);
  CHECK(theta_norm(cg, 0.0, x) == Approx(norm(endpoint_space(cg, 0), x)).margin(1e-12));
  CHECK(theta_norm(cg, 1.0, x) == Approx(norm(endpoint_space(cg, 1), x)).margin(1e-12));
}

TEST_CASE("couple construction rejects malformed data") {
  CHECK_THROWS_AS(make_couple(0.5, {1.0}, 2.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_couple(2.0, {1.0, -1.0}, 2.0, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_couple(2.0, {1.0}, 2.0, {1.0, 1.0}), std::invalid_argument);
  auto c = random_couple(2.0, 4.0, 3, 34);
  CHECK_THROWS_AS(interp_params(c, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(interp_params(c, 1.1), std::invalid_argument);
}

TEST_CASE("minimal functions pass through the data and hug the sphere") {
  auto c = random_couple(kInf, 1.0, 6, 35);
  const double theta = 0.3;
  Rng rng(7);
  Vec x = rng.normal_vec(6);
  x[2] = 0.0;  // zero coordinates must stay zero along the strip
  MinimalFunction M = minimal_function(c, theta, x);

  // at z = theta the function returns the data exactly
  CVec at = M.eval(Cplx(theta, 0.0));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(at[k].real() == Approx(x[k]).margin(1e-12));
    CHECK(at[k].imag() == Approx(0.0).margin(1e-13));
  }

  // boundary values realize the interpolated norm at both endpoints
  const double target = theta_norm(c, theta, x);
  for (double t : {0.0, -0.8, 1.1}) {
    CHECK(norm(endpoint_space(c, 0), modulus(M.eval(Cplx(0.0, t)))) ==
          Approx(target).margin(1e-10));
    CHECK(norm(endpoint_space(c, 1), modulus(M.eval(Cplx(1.0, t)))) ==
          Approx(target).margin(1e-10));
  }

  // on the critical line the moduli do not move
  Vec m0 = modulus(M.eval(Cplx(theta, 0.0)));
  Vec m1 = modulus(M.eval(Cplx(theta, 2.3)));
  CHECK(max_abs(sub(m0, m1)) <= 1e-12);

  CHECK(M.eval(Cplx(theta, 0.0))[2] == Cplx(0.0, 0.0));
  CHECK_THROWS_AS(M.eval(Cplx(1.5, 0.0)), std::invalid_argument);
}

TEST_CASE("the differential matches scaled log maps and finite differences") {
  // unweighted (sup, l1): the differential is p_theta times the entrywise
  // log map in the interpolated space
  auto c = unweighted_couple(kInf, 1.0, 8);
  const double theta = 0.5;
  auto st = theta_space(c, theta);
  Vec ones(8, 1.0);
  Vec om = differential(c, theta, ones);
  for (std::size_t k = 0; k < 8; ++k)
    CHECK(om[k] == Approx(-std::log(8.0)).margin(1e-12));  // 2 * log(1/sqrt 8)

  Vec Kx = kalton_peck(st, ones);
  for (std::size_t k = 0; k < 8; ++k)
    CHECK(om[k] == Approx(2.0 * Kx[k]).margin(1e-12));

  // generic weighted couple: finite differences of the minimal function
  auto cw = random_couple(4.0, 4.0 / 3.0, 6, 36);
  Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x = rng.normal_vec(6);
    Vec closed = differential(cw, 0.35, x);
    Vec fd = fd_differential(cw, 0.35, x, 1e-5);
    CHECK(max_abs(sub(closed, fd)) <= 1e-6 * std::max(1.0, max_abs(closed)));
  }

  // degree-1 homogeneity and oddness
  Vec x = rng.normal_vec(6);
  Vec base = differential(cw, 0.35, x);
  Vec scaled = differential(cw, 0.35, scale(2.5, x));
  CHECK(max_abs(sub(scaled, scale(2.5, base))) <= 1e-12 * std::max(1.0, max_abs(base)));
  Vec negated = differential(cw, 0.35, scale(-1.0, x));
  CHECK(max_abs(add(negated, base)) <= 1e-12 * std::max(1.0, max_abs(base)));
}

TEST_CASE("the flow equation holds along the critical line") {
  auto c = random_couple(kInf, 1.0, 8, 37);
  Rng rng(23);
  Vec x = rng.normal_vec(8);
  auto rep = flow_check(c, 0.5, x, {0.0, 0.1, -0.1, 1.0, -1.0});
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-8);
  CHECK(rep.max_norm_drift <= 1e-10);
}

TEST_CASE("interpolated operator norms sit below the geometric mean") {
  auto c = unweighted_couple(kInf, 1.0, 4);
  SearchOptions opt;
  opt.n_samples = 300;
  opt.restarts = 12;
  opt.steps = 60;

  // diagonal operators give equality throughout the scale
  Vec d = {2.0, -1.0, 0.5, 3.0};
  auto diag_rep = riesz_thorin_check(c, 0.5, Mat::diag(d), opt);
  CHECK(diag_rep.pass);
  CHECK(diag_rep.exact0);
  CHECK(diag_rep.exact1);
  CHECK(diag_rep.exact_theta);
  CHECK(diag_rep.bound0 == Approx(3.0).margin(1e-12));
  CHECK(diag_rep.bound_theta == Approx(diag_rep.rhs).margin(1e-9));

  // random operators obey the strict inequality
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    Mat T(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) T(i, j) = rng.normal();
    auto rep = riesz_thorin_check(c, 0.5, T, opt);
    CHECK(rep.pass);
    CHECK(rep.bound_theta <= rep.rhs * (1.0 + 1e-9));
  }
}

TEST_CASE("dual couples realize the dual norm under the plain pairing") {
  auto c = random_couple(2.0, 4.0, 5, 9);
  auto cd = dual_couple(c);
  CHECK(cd.p0 == Approx(2.0));
  CHECK(cd.p1 == Approx(4.0 / 3.0));

  const double theta = 0.35;
  auto sp = theta_space(c, theta);
  auto sd = theta_space(cd, theta);
  Rng rng(9);
  for (int i = 0; i < 15; ++i) {
    Vec y = rng.normal_vec(5);
    Vec phi = norm_subgradient(sp, y);
    // the subgradient attains the norm and is dual-unit, measured in the
    // interpolated dual space
    CHECK(dot(phi, y) == Approx(theta_norm(c, theta, y)).margin(1e-10));
    CHECK(norm(sd, phi) == Approx(1.0).margin(1e-10));
  }

  CHECK_THROWS_AS(dual_couple(unweighted_couple(kInf, 1.0, 4)), std::invalid_argument);
}

TEST_CASE("derivative brackets pair into a bounded constant") {
  // equal exponents: the two brackets cancel against the pairing identically
  auto ce = random_couple(1.5, 1.5, 6, 43);
  auto repe = duality_defect(ce, 0.4, 64, 17);
  CHECK(repe.constant <= 1e-12);

  // generic couples: finite constant, reproduced under the same samples by
  // the rank-one compatibility defect
  auto c = random_couple(4.0, 4.0 / 3.0, 6, 44);
  Rng rng(3);
  Vec phi = rng.normal_vec(6), x0 = rng.normal_vec(6);
  const double theta = 0.5;
  auto sd = theta_space(dual_couple(c), theta);
  auto sp = theta_space(c, theta);
  Vec phin = scale(1.0 / norm(sd, phi), phi);
  Vec xn = scale(1.0 / norm(sp, x0), x0);
  auto rep = rank1_derivation_check(c, theta, phin, xn, 200, 42);
  CHECK(rep.pass);
  CHECK(rep.defect <= rep.duality_constant * 1.05 + 1e-12);
  CHECK(rep.duality_constant > 0.0);

  // equal exponents collapse the rank-one defect to rounding noise
  auto sde = theta_space(dual_couple(ce), 0.4);
  auto spe = theta_space(ce, 0.4);
  Vec phie = scale(1.0 / norm(sde, phi), phi);
  Vec xe = scale(1.0 / norm(spe, x0), x0);
  auto repz = rank1_derivation_check(ce, 0.4, phie, xe, 100, 42);
  CHECK(repz.defect <= 1e-10);
}
