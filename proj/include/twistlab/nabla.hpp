#pragma once

#include "twistlab/quasimaps.hpp"

namespace twistlab {

// Sign-average defect of a homogeneous map over a finite family:
//   Ave over sign patterns of || Psi(sum_i e_i x_i) - sum_i e_i Psi(x_i) ||.
// Exhaustive up to 20 vectors, seeded Monte-Carlo beyond.

enum class NablaMode { Auto, Exhaustive, MonteCarlo };

struct SignAverageSpec {
  std::vector<Vec> family;
  HomogeneousMap map;
  NablaMode mode = NablaMode::Auto;
  int n_samples = 20000;  // Monte-Carlo only
  std::uint64_t seed = 42;
};

struct NablaResult {
  double value = 0.0;
  double stderr_est = 0.0;  // 0 for exhaustive
  bool exhaustive = true;
  int n_patterns = 0;
  double min_pattern = 0.0, max_pattern = 0.0;  // range over evaluated patterns
  std::uint64_t seed = 0;
};

inline NablaResult nabla(const SignAverageSpec& spec) {
  const std::size_t n = spec.family.size();
  require(n >= 1, "nabla: empty family");
  for (const Vec& x : spec.family)
    require(x.size() == spec.map.domain.dim(), "nabla: family dimension mismatch");

  std::vector<Vec> images;
  images.reserve(n);
  for (const Vec& x : spec.family) images.push_back(spec.map.apply0(x));

  auto pattern_value = [&](const Vec& eps) {
    Vec s = zeros(spec.map.domain.dim());
    Vec t = zeros(spec.map.codomain.dim());
    for (std::size_t i = 0; i < n; ++i) {
      axpy(eps[i], spec.family[i], s);
      axpy(eps[i], images[i], t);
    }
    return norm(spec.map.codomain, sub(spec.map.apply0(s), t));
  };

  NablaResult out;
  out.seed = spec.seed;
  const bool exhaustive =
      spec.mode == NablaMode::Exhaustive || (spec.mode == NablaMode::Auto && n <= 20);
  if (exhaustive) {
    require(n <= 20, "nabla: exhaustive mode refused for n > 20");
    double sum = 0.0, lo = kInf, hi = -kInf;
    int count = 0;
    for_each_sign_pattern(n, [&](const Vec& eps) {
      const double v = pattern_value(eps);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++count;
    });
    out.value = sum / count;
    out.exhaustive = true;
    out.n_patterns = count;
    out.min_pattern = lo;
    out.max_pattern = hi;
    return out;
  }
  Rng rng(spec.seed);
  double sum = 0.0, sumsq = 0.0, lo = kInf, hi = -kInf;
  for (int i = 0; i < spec.n_samples; ++i) {
    const double v = pattern_value(rng.sign_vec(n));
    sum += v;
    sumsq += v * v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / spec.n_samples;
  const double var = std::max(0.0, sumsq / spec.n_samples - mean * mean);
  out.value = mean;
  out.stderr_est = std::sqrt(var / spec.n_samples);
  out.exhaustive = false;
  out.n_patterns = spec.n_samples;
  out.min_pattern = lo;
  out.max_pattern = hi;
  return out;
}

// rows of the normalized 2^m x 2^m Hadamard matrix: an orthonormal basis of
// sign vectors scaled by 2^(-m/2)
inline std::vector<Vec> walsh_family(int m) {
  require(m >= 0 && m <= 12, "walsh_family: m out of range");
  const std::size_t nloc = std::size_t{1} << m;
  const double amp = std::pow(2.0, -0.5 * m);
  std::vector<Vec> rows(nloc, Vec(nloc));
  for (std::size_t i = 0; i < nloc; ++i)
    for (std::size_t k = 0; k < nloc; ++k)
      rows[i][k] = amp * ((__builtin_popcountll(i & k) & 1) ? -1.0 : 1.0);
  return rows;
}

inline std::vector<Vec> canonical_family(std::size_t n) {
  std::vector<Vec> fam;
  fam.reserve(n);
  for (std::size_t i = 0; i < n; ++i) fam.push_back(basis_vector(n, i));
  return fam;
}

struct GapRow {
  int m = 0;
  std::size_t n = 0;
  double nabla_canonical = 0.0;
  double canonical_exact = 0.0;  // (1/2) sqrt(n) log n
  double canonical_spread = 0.0; // max - min over patterns (0: all identical)
  double nabla_walsh = 0.0;
  double walsh_stderr = 0.0;
  bool walsh_exhaustive = true;
  double gap_over_sqrt_n = 0.0;
};

// Canonical basis vs Hadamard rows under the entrywise log map: the canonical
// value is pinned at (1/2) sqrt(n) log n while the rotated family stays at
// O(sqrt n), so the normalized gap grows like log n.
inline std::vector<GapRow> unitary_gap_experiment(const std::vector<int>& m_list,
                                                  std::uint64_t seed, int mc_samples = 20000) {
  std::vector<GapRow> rows;
  for (int m : m_list) {
    const std::size_t n = std::size_t{1} << m;
    const SpaceSpec space = SpaceSpec::lp(2.0, n);
    const HomogeneousMap K = kalton_peck_map(space);

    GapRow row;
    row.m = m;
    row.n = n;
    row.canonical_exact = 0.5 * std::sqrt(static_cast<double>(n)) * std::log(static_cast<double>(n));

    SignAverageSpec canon;
    canon.family = canonical_family(n);
    canon.map = K;
    canon.seed = mix_seed(seed, 2 * m);
    canon.n_samples = mc_samples;
    NablaResult rc = nabla(canon);
    row.nabla_canonical = rc.value;
    row.canonical_spread = rc.max_pattern - rc.min_pattern;

    SignAverageSpec wal;
    wal.family = walsh_family(m);
    wal.map = K;
    wal.seed = mix_seed(seed, 2 * m + 1);
    wal.n_samples = mc_samples;
    NablaResult rw = nabla(wal);
    row.nabla_walsh = rw.value;
    row.walsh_stderr = rw.stderr_est;
    row.walsh_exhaustive = rw.exhaustive;

    row.gap_over_sqrt_n = (row.nabla_canonical - row.nabla_walsh) / std::sqrt(static_cast<double>(n));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace twistlab
