#pragma once

#include <algorithm>
#include <cstddef>

#include "twistlab/core.hpp"

namespace twistlab {

// Dense row-major matrix.  Small sizes only; everything here is O(n^3) at
// worst and sized for desk-scale checks.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Mat from_columns(const std::vector<Vec>& cols_) {
    require(!cols_.empty(), "from_columns: empty");
    Mat m(cols_[0].size(), cols_.size());
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      require(cols_[j].size() == m.rows, "from_columns: ragged");
      for (std::size_t i = 0; i < m.rows; ++i) m(i, j) = cols_[j][i];
    }
    return m;
  }

  Vec apply(const Vec& x) const {
    require(x.size() == cols, "Mat::apply: size mismatch");
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * x[j];
      y[i] = s;
    }
    return y;
  }

  Mat transpose() const {
    Mat t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
};

inline Mat matmul(const Mat& A, const Mat& B) {
  require(A.cols == B.rows, "matmul: size mismatch");
  Mat C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

inline Mat mat_add(const Mat& A, const Mat& B) {
  require(A.rows == B.rows && A.cols == B.cols, "mat_add: size mismatch");
  Mat C = A;
  for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
  return C;
}

inline Mat mat_sub(const Mat& A, const Mat& B) {
  require(A.rows == B.rows && A.cols == B.cols, "mat_sub: size mismatch");
  Mat C = A;
  for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
  return C;
}

inline Mat mat_scale(double c, const Mat& A) {
  Mat C = A;
  for (auto& v : C.a) v *= c;
  return C;
}

inline double mat_max_abs(const Mat& A) {
  double m = 0.0;
  for (double v : A.a) m = std::max(m, std::abs(v));
  return m;
}

// Gaussian elimination with partial pivoting.
inline Mat inverse(const Mat& A) {
  require(A.rows == A.cols, "inverse: not square");
  const std::size_t n = A.rows;
  Mat M = A, I = Mat::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(M(r, col)) > std::abs(M(piv, col))) piv = r;
    require(std::abs(M(piv, col)) > 1e-13, "inverse: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(M(piv, j), M(col, j));
        std::swap(I(piv, j), I(col, j));
      }
    }
    const double d = M(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      M(col, j) /= d;
      I(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = M(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        M(r, j) -= f * M(col, j);
        I(r, j) -= f * I(col, j);
      }
    }
  }
  return I;
}

struct LstsqResult {
  Vec x;
  double residual = 0.0;   // ||A x - b||_2
  double min_pivot = 0.0;  // smallest pivot of A^T A; > tol means unique solution
  bool unique = false;
};

// Least squares via normal equations; adequate for the small well-scaled
// systems used here.  Uniqueness is certified by the pivot floor.
inline LstsqResult lstsq(const Mat& A, const Vec& b, double pivot_tol = 1e-9) {
  require(A.rows == b.size(), "lstsq: size mismatch");
  const std::size_t n = A.cols;
  Mat At = A.transpose();
  Mat G = matmul(At, A);
  Vec rhs = At.apply(b);
  // elimination on G, tracking the smallest pivot
  double min_piv = kInf;
  Mat M = G;
  Vec y = rhs;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(M(r, col)) > std::abs(M(piv, col))) piv = r;
    min_piv = std::min(min_piv, std::abs(M(piv, col)));
    if (std::abs(M(piv, col)) < 1e-300) {
      LstsqResult out;
      out.x = Vec(n, 0.0);
      out.min_pivot = 0.0;
      out.unique = false;
      out.residual = std::sqrt(std::max(0.0, dot(b, b)));
      return out;
    }
    if (piv != col)
      for (std::size_t j = 0; j < n; ++j) std::swap(M(piv, j), M(col, j));
    if (piv != col) std::swap(y[piv], y[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = M(r, col) / M(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) M(r, j) -= f * M(col, j);
      y[r] -= f * y[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= M(ii, j) * x[j];
    x[ii] = s / M(ii, ii);
  }
  LstsqResult out;
  out.x = x;
  Vec r = sub(A.apply(x), b);
  out.residual = std::sqrt(std::max(0.0, dot(r, r)));
  out.min_pivot = min_piv;
  out.unique = min_piv > pivot_tol;
  return out;
}

inline double l2_norm(const Vec& x) { return std::sqrt(std::max(0.0, dot(x, x))); }

// Largest singular value by power iteration on A^T A.  Rayleigh quotients are
// lower bounds, so the returned value never overshoots the true norm by more
// than the convergence tolerance.
inline double spectral_norm(const Mat& A, std::uint64_t seed = 1234567,
                            int max_iter = 2000, double tol = 1e-14) {
  if (A.rows == 0 || A.cols == 0) return 0.0;
  Mat At = A.transpose();
  double best = 0.0;
  for (int restart = 0; restart < 3; ++restart) {
    Vec v(A.cols);
    if (restart == 0) {
      for (auto& t : v) t = 1.0;
      v[0] += 0.5;  // break symmetric deadlocks
    } else {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(restart)));
      v = rng.normal_vec(A.cols);
    }
    double nv = l2_norm(v);
    if (nv == 0.0) continue;
    for (auto& t : v) t /= nv;
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      Vec w = At.apply(A.apply(v));
      double lam = dot(v, w);  // Rayleigh quotient of A^T A
      double nw = l2_norm(w);
      if (nw == 0.0) break;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
      if (std::abs(lam - prev) <= tol * std::max(1.0, std::abs(lam))) {
        prev = lam;
        break;
      }
      prev = lam;
    }
    best = std::max(best, std::sqrt(std::max(0.0, prev)));
  }
  return best;
}

// Haar-ish random orthogonal matrix: modified Gram-Schmidt on a Gaussian
// matrix, with one re-orthogonalization pass so Q^T Q - I stays at rounding
// level.  Used to conjugate canonical structures without losing exactness.
inline Mat random_orthogonal(std::size_t n, Rng& rng) {
  Mat Q(n, n);
  for (auto& v : Q.a) v = rng.normal();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < j; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += Q(i, k) * Q(i, j);
        for (std::size_t i = 0; i < n; ++i) Q(i, j) -= s * Q(i, k);
      }
      double nj = 0.0;
      for (std::size_t i = 0; i < n; ++i) nj += Q(i, j) * Q(i, j);
      nj = std::sqrt(nj);
      require(nj > 1e-12, "random_orthogonal: degenerate draw");
      for (std::size_t i = 0; i < n; ++i) Q(i, j) /= nj;
    }
  }
  return Q;
}

// vec(L) in column-major order; builds the constraint matrix of
// L v - u L = d for stacked group elements (used by splitting solvers).
inline Mat kron_constraint(const Mat& u, const Mat& v) {
  // maps vec(L) -> vec(L v - u L), L of shape u.rows x v.rows
  const std::size_t nx = u.rows, ny = v.rows;
  Mat K(nx * ny, nx * ny);
  // vec index: (i, j) -> j * nx + i
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t col = j * nx + i;
      // L v term: (L v)(r, c) = sum_j L(r, j) v(j, c): contributes v(j, c) at (r=i, c)
      for (std::size_t c = 0; c < ny; ++c) K(c * nx + i, col) += v(j, c);
      // -u L term: (u L)(r, c) = sum_i u(r, i) L(i, c): c = j
      for (std::size_t r = 0; r < nx; ++r) K(j * nx + r, col) -= u(r, i);
    }
  return K;
}

inline Vec mat_vec_flatten(const Mat& L) {  // column-major
  Vec v(L.rows * L.cols);
  for (std::size_t j = 0; j < L.cols; ++j)
    for (std::size_t i = 0; i < L.rows; ++i) v[j * L.rows + i] = L(i, j);
  return v;
}

inline Mat mat_unflatten(const Vec& v, std::size_t rows, std::size_t cols) {
  require(v.size() == rows * cols, "mat_unflatten: size mismatch");
  Mat L(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) L(i, j) = v[j * rows + i];
  return L;
}

}  // namespace twistlab
