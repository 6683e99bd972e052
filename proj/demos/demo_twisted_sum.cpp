// A short tour: the entrywise log map on l2^4, the twisted sum it generates,
// and what the sign action does to it.
#include <cstdio>

#include "twistlab/twistlab.hpp"

using namespace twistlab;

int main() {
  const SpaceSpec s = SpaceSpec::lp(2.0, 4);
  const HomogeneousMap K = kalton_peck_map(s);

  Vec x = {1.0, 1.0, 1.0, 1.0};
  Vec Kx = K.apply(x);
  std::printf("K(1,1,1,1) on l2^4:\n  (");
  for (std::size_t i = 0; i < Kx.size(); ++i) std::printf("%s%.6f", i ? ", " : "", Kx[i]);
  std::printf(")   each entry = log(1/2) = %.6f\n\n", std::log(0.5));

  // The map is homogeneous but not linear; its quasi-linearity constant is
  // what makes the twisted sum a genuinely new space.
  auto q = quasilinearity_constant(K, 500, 7);
  std::printf("quasi-linearity constant over 500 random pairs: %.6f\n", q.max_ratio);

  TwistedSum Z = twisted_sum(s, s, K);
  Vec zero4 = zeros(4);
  std::printf("twisted quasi-norm of ((0,0,0,0),(1,1,1,1)): %.6f\n",
              twisted_norm(Z, zero4, x));
  std::printf("  = ||K(x)||_2 + ||x||_2 = %.6f + %.6f\n\n", l2_norm(Kx), l2_norm(x));

  // Sign flips commute with K exactly: the twisted sum carries the sign
  // action with zero centralizer constant.
  std::vector<GroupElementMaps> signs;
  Vec eps = {1.0, -1.0, 1.0, -1.0};
  GroupElementMaps g;
  g.u = diag_op(eps);
  g.u_inv = diag_op(eps);
  g.v = diag_op(eps);
  g.v_inv = diag_op(eps);
  g.name = "eps";
  signs.push_back(g);
  SearchOptions opt;
  opt.n_samples = 200;
  opt.restarts = 8;
  opt.steps = 40;
  auto cent = centralizer_constant(signs, K, opt);
  std::printf("centralizer constant of the sign flip (+,-,+,-): %.2e\n\n", cent.value);

  // A rank-one corner with no compensating derivation makes the triangular
  // action grow linearly in the power: nothing averages it away.
  TwistedSum triv = twisted_sum(s, s, zero_map(s, s));
  TriangularRep rep;
  rep.sum = triv;
  for (int n = 1; n <= 4; ++n) {
    Mat D(4, 4);
    D(0, 0) = 0.3 * n;
    GroupElementMaps h;
    h.u = identity_op();
    h.u_inv = identity_op();
    h.v = identity_op();
    h.v_inv = identity_op();
    h.d = matrix_op(D);
    rep.elements.push_back(h);
  }
  std::printf("rank-one corner 0.3n E11, quasi-norm of the triangular action:\n");
  for (std::size_t i = 0; i < rep.elements.size(); ++i) {
    auto est = triangular_norm(rep, i, opt);
    std::printf("  n = %zu:  %.6f   (exact value 1 + 0.3 n = %.1f)\n", i + 1, est.value,
                1.0 + 0.3 * static_cast<double>(i + 1));
  }
  return 0;
}
