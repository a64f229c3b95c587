#include "sprelax/sparse.hpp"

#include "sprelax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sprelax {

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rows; ++i) {
    double acc = 0.0;
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      acc += vals[k] * x[cols[k]];
    y[i] = acc;
  }
}

void SparseMatrix::multiply(std::span<const cplx> x, std::span<cplx> y) const {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rows; ++i) {
    cplx acc = 0.0;
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      acc += vals[k] * x[cols[k]];
    y[i] = acc;
  }
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n_rows);
  multiply(std::span<const double>(x), std::span<double>(y));
  return y;
}

std::vector<cplx> SparseMatrix::multiply(const std::vector<cplx>& x) const {
  std::vector<cplx> y(n_rows);
  multiply(std::span<const cplx>(x), std::span<cplx>(y));
  return y;
}

double SparseMatrix::diagonal(int i) const {
  for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
    if (cols[k] == i) return vals[k];
  return 0.0;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix a;
  a.n_rows = a.n_cols = n;
  a.row_offsets.resize(n + 1);
  a.cols.resize(n);
  a.vals.assign(n, 1.0);
  for (int i = 0; i <= n; ++i) a.row_offsets[i] = i;
  for (int i = 0; i < n; ++i) a.cols[i] = i;
  return a;
}

SparseMatrix csr_combine(double a, const SparseMatrix& A, double b, const SparseMatrix& B) {
  if (A.n_rows != B.n_rows || A.n_cols != B.n_cols ||
      A.row_offsets != B.row_offsets || A.cols != B.cols)
    throw ConfigurationError("csr_combine: sparsity patterns differ");
  SparseMatrix c = A;
  for (std::size_t k = 0; k < c.vals.size(); ++k) c.vals[k] = a * A.vals[k] + b * B.vals[k];
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(std::span<const cplx> a) {
  double s = 0.0;
  for (const cplx& v : a) s += std::norm(v);
  return std::sqrt(s);
}

SolveReport cg_solve(const SparseMatrix& A, std::span<const double> b, double tol,
                     int max_iter, std::span<double> x) {
  const int n = A.n_rows;
  SolveReport rep;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }

  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = A.diagonal(i);
    inv_diag[i] = (d != 0.0) ? 1.0 / d : 1.0;
  }

  // The recurrence residual drifts from the true one near roundoff, so the
  // inner loop targets a fraction of the tolerance and the outer loop
  // re-verifies against b - A x, restarting if the true residual missed.
  const double target = 0.25 * tol * bnorm;
  std::vector<double> r(n), z(n), p(n), q(n);
  int it = 0;
  double true_rnorm = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    A.multiply(x, std::span<double>(r));
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    true_rnorm = norm2(r);
    if (true_rnorm <= tol * bnorm || it >= max_iter) break;

    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rnorm = true_rnorm;
    while (rnorm > target && it < max_iter) {
      A.multiply(p, std::span<double>(q));
      const double pq = dot(p, q);
      if (pq <= 0.0) break; // loss of positive-definiteness in finite precision
      const double alpha = rz / pq;
      for (int i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = norm2(r);
      ++it;
    }
  }

  rep.iterations = it;
  rep.rel_residual = true_rnorm / bnorm;
  rep.converged = rep.rel_residual <= tol;
  return rep;
}

std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& A,
                                                     const std::vector<double>& b,
                                                     double tol, int max_iter) {
  std::vector<double> x(A.n_rows, 0.0);
  SolveReport rep = cg_solve(A, std::span<const double>(b), tol, max_iter, std::span<double>(x));
  return {std::move(x), rep};
}

namespace {

// y = (M + iS) x
void apply_cn(const SparseMatrix& M, const SparseMatrix& S, std::span<const cplx> x,
              std::vector<cplx>& tmp, std::span<cplx> y) {
  M.multiply(x, y);
  S.multiply(x, std::span<cplx>(tmp));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += cplx(0.0, 1.0) * tmp[i];
}

// Left-preconditioned restarted GMRES on (M + iS). Used only as a fallback
// when BiCGStab breaks down; convergence is judged on the true residual.
SolveReport gmres_cn(const SparseMatrix& M, const SparseMatrix& S, std::span<const cplx> rhs,
                     const std::vector<double>& inv_diag, double tol, int max_iter,
                     std::span<cplx> x) {
  const int n = M.n_rows;
  const int restart = std::min(50, n);
  const double bnorm = norm2(rhs);
  SolveReport rep;
  std::vector<cplx> tmp(n), r(n), w(n);
  int total_it = 0;

  apply_cn(M, S, x, tmp, std::span<cplx>(r));
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  rep.rel_residual = norm2(std::span<const cplx>(r)) / bnorm;
  if (rep.rel_residual <= tol) {
    rep.converged = true;
    return rep;
  }

  while (total_it < max_iter) {
    apply_cn(M, S, x, tmp, std::span<cplx>(r));
    for (int i = 0; i < n; ++i) r[i] = inv_diag[i] * (rhs[i] - r[i]);
    const double beta = norm2(std::span<const cplx>(r));
    if (beta == 0.0) break;

    std::vector<std::vector<cplx>> V;
    V.emplace_back(n);
    for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::vector<std::vector<cplx>> H(restart); // column j: entries 0..j+1
    std::vector<cplx> cs(restart), sn(restart), g(restart + 1, 0.0);
    g[0] = beta;

    int j = 0;
    bool stagnated = false;
    while (j < restart && total_it < max_iter) {
      apply_cn(M, S, V[j], tmp, std::span<cplx>(w));
      for (int i = 0; i < n; ++i) w[i] *= inv_diag[i];
      auto& h = H[j];
      h.assign(j + 2, cplx(0.0));
      for (int k = 0; k <= j; ++k) { // modified Gram-Schmidt
        h[k] = dotc(V[k], std::span<const cplx>(w));
        for (int i = 0; i < n; ++i) w[i] -= h[k] * V[k][i];
      }
      const double wn = norm2(std::span<const cplx>(w));
      h[j + 1] = wn;
      for (int k = 0; k < j; ++k) {
        const cplx t = std::conj(cs[k]) * h[k] + std::conj(sn[k]) * h[k + 1];
        h[k + 1] = -sn[k] * h[k] + cs[k] * h[k + 1];
        h[k] = t;
      }
      const double denom = std::sqrt(std::norm(h[j]) + std::norm(h[j + 1]));
      if (denom == 0.0) {
        stagnated = true;
        break;
      }
      cs[j] = h[j] / denom;
      sn[j] = h[j + 1] / denom;
      h[j] = denom;
      h[j + 1] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      ++j;
      ++total_it;
      if (wn == 0.0) break; // happy breakdown: solution lies in the current space
      V.emplace_back(n);
      for (int i = 0; i < n; ++i) V[j][i] = w[i] / wn;
      if (std::abs(g[j]) <= 0.1 * tol * bnorm) break;
    }

    std::vector<cplx> y(j, 0.0);
    for (int k = j - 1; k >= 0; --k) {
      cplx acc = g[k];
      for (int m = k + 1; m < j; ++m) acc -= H[m][k] * y[m];
      y[k] = acc / H[k][k];
    }
    for (int k = 0; k < j; ++k)
      for (int i = 0; i < n; ++i) x[i] += y[k] * V[k][i];

    apply_cn(M, S, x, tmp, std::span<cplx>(r));
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    rep.rel_residual = norm2(std::span<const cplx>(r)) / bnorm;
    rep.iterations = total_it;
    if (rep.rel_residual <= tol) {
      rep.converged = true;
      return rep;
    }
    if (j == 0 || stagnated) break;
  }
  rep.iterations = total_it;
  rep.converged = rep.rel_residual <= tol;
  return rep;
}

} // namespace

SolveReport complex_cn_solve(const SparseMatrix& M, const SparseMatrix& S,
                             std::span<const cplx> rhs, double tol, int max_iter,
                             std::span<cplx> x) {
  const int n = M.n_rows;
  SolveReport rep;
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), cplx(0.0));
    rep.converged = true;
    return rep;
  }

  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = M.diagonal(i);
    inv_diag[i] = (d != 0.0) ? 1.0 / d : 1.0;
  }

  // BiCGStab with outer true-residual verification; the recurrence targets a
  // fraction of the tolerance, a miss restarts from the current iterate.
  const double target = 0.25 * tol * bnorm;
  std::vector<cplx> tmp(n), r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  bool breakdown = false;
  int it = 0;
  double true_rnorm = 0.0;

  for (int attempt = 0; attempt < 4 && !breakdown; ++attempt) {
    apply_cn(M, S, x, tmp, std::span<cplx>(r));
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    true_rnorm = norm2(std::span<const cplx>(r));
    if (true_rnorm <= tol * bnorm || it >= max_iter) break;

    rhat = r;
    cplx rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = true_rnorm;
    bool first = true;
    while (rnorm > target && it < max_iter) {
      const cplx rho_new = dotc(rhat, r);
      if (std::abs(rho_new) < 1e-300 || (!first && std::abs(omega) < 1e-300)) {
        breakdown = true;
        break;
      }
      if (first) {
        p = r;
        first = false;
      } else {
        const cplx beta = (rho_new / rho) * (alpha / omega);
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      }
      rho = rho_new;
      for (int i = 0; i < n; ++i) phat[i] = inv_diag[i] * p[i];
      apply_cn(M, S, phat, tmp, std::span<cplx>(v));
      const cplx rv = dotc(rhat, v);
      if (std::abs(rv) < 1e-300) {
        breakdown = true;
        break;
      }
      alpha = rho / rv;
      for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
      if (norm2(std::span<const cplx>(s)) <= target) {
        for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
        r = s;
        rnorm = norm2(std::span<const cplx>(r));
        ++it;
        break;
      }
      for (int i = 0; i < n; ++i) shat[i] = inv_diag[i] * s[i];
      apply_cn(M, S, shat, tmp, std::span<cplx>(t));
      const double tt = std::real(dotc(t, t));
      if (tt == 0.0) {
        breakdown = true;
        break;
      }
      omega = dotc(t, s) / tt;
      for (int i = 0; i < n; ++i) {
        x[i] += alpha * phat[i] + omega * shat[i];
        r[i] = s[i] - omega * t[i];
      }
      rnorm = norm2(std::span<const cplx>(r));
      ++it;
      if (!std::isfinite(rnorm)) {
        breakdown = true;
        break;
      }
    }
  }

  apply_cn(M, S, x, tmp, std::span<cplx>(r));
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  rep.iterations = it;
  rep.rel_residual = norm2(std::span<const cplx>(r)) / bnorm;
  rep.converged = rep.rel_residual <= tol;

  if (!rep.converged) {
    SolveReport g = gmres_cn(M, S, rhs, inv_diag, tol, max_iter, x);
    g.iterations += rep.iterations;
    return g;
  }
  return rep;
}

std::pair<std::vector<cplx>, SolveReport> complex_cn_solve(const SparseMatrix& M,
                                                           const SparseMatrix& S,
                                                           const std::vector<cplx>& rhs,
                                                           double tol, int max_iter) {
  std::vector<cplx> x(M.n_rows, cplx(0.0));
  SolveReport rep =
      complex_cn_solve(M, S, std::span<const cplx>(rhs), tol, max_iter, std::span<cplx>(x));
  return {std::move(x), rep};
}

SolveReport cg_solve_meanzero(const SparseMatrix& L, const SparseMatrix& M,
                              std::span<const double> b, double tol, int max_iter,
                              std::span<double> x) {
  const int n = L.n_rows;
  std::vector<double> ones(n, 1.0);
  std::vector<double> m1 = M.multiply(ones);
  const double denom = dot(m1, ones); // 1'M1 = |Omega|
  double s = 0.0;
  for (const double v : b) s += v;
  std::vector<double> b_proj(n);
  const double c = s / denom;
  for (int i = 0; i < n; ++i) b_proj[i] = b[i] - c * m1[i];

  SolveReport rep = cg_solve(L, std::span<const double>(b_proj), tol, max_iter, x);

  const double mean = dot(std::span<const double>(m1), std::span<const double>(x)) / denom;
  for (int i = 0; i < n; ++i) x[i] -= mean;
  return rep;
}

} // namespace sprelax
