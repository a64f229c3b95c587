#ifndef SPRELAX_SPARSE_HPP
#define SPRELAX_SPARSE_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace sprelax {

using cplx = std::complex<double>;

/// Compressed sparse row matrix with real entries. Column indices are
/// strictly increasing within each row; construction is deterministic, so
/// equal inputs produce bitwise-equal arrays.
struct SparseMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::int64_t> row_offsets; // size n_rows + 1
  std::vector<int> cols;
  std::vector<double> vals;

  std::int64_t nnz() const { return static_cast<std::int64_t>(cols.size()); }

  /// y = A x. Row-parallel and bitwise deterministic: every output row is a
  /// sequential dot product in column order.
  void multiply(std::span<const double> x, std::span<double> y) const;
  void multiply(std::span<const cplx> x, std::span<cplx> y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  std::vector<cplx> multiply(const std::vector<cplx>& x) const;

  double diagonal(int i) const;

  /// Identity matrix in CSR form (handy for tests and reductions).
  static SparseMatrix identity(int n);
};

/// c = a*A + b*B for matrices with identical sparsity patterns.
SparseMatrix csr_combine(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

/// Outcome of an iterative solve. `converged` implies the final relative
/// residual met the requested tolerance.
struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. `x` is the
/// initial guess on entry (warm starts are supported) and the solution on
/// exit. Convergence criterion: ||b - A x|| <= tol * ||b||; b = 0 returns
/// x = 0 after zero iterations.
SolveReport cg_solve(const SparseMatrix& A, std::span<const double> b, double tol,
                     int max_iter, std::span<double> x);

/// Convenience overload starting from x = 0.
std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& A,
                                                     const std::vector<double>& b,
                                                     double tol, int max_iter);

/// Solve (M + iS) x = rhs with M SPD and S symmetric real, both sharing a
/// sparsity pattern is not required. The operator is complex-symmetric, so
/// CG does not apply; we run BiCGStab in complex arithmetic with a Jacobi
/// preconditioner built from diag(M), and fall back to restarted GMRES on
/// breakdown. The final report always reflects the true residual.
SolveReport complex_cn_solve(const SparseMatrix& M, const SparseMatrix& S,
                             std::span<const cplx> rhs, double tol, int max_iter,
                             std::span<cplx> x);

std::pair<std::vector<cplx>, SolveReport> complex_cn_solve(const SparseMatrix& M,
                                                           const SparseMatrix& S,
                                                           const std::vector<cplx>& rhs,
                                                           double tol, int max_iter);

/// Solve the singular periodic Poisson system L x = b where L has the
/// constants in its kernel. The incompatible component is deflated from the
/// right-hand side, b_proj = b - (1'b / 1'M1) M1, CG solves the consistent
/// system, and the result is shifted to weighted mean zero: 1'Mx = 0.
/// The reported residual is measured against b_proj.
SolveReport cg_solve_meanzero(const SparseMatrix& L, const SparseMatrix& M,
                              std::span<const double> b, double tol, int max_iter,
                              std::span<double> x);

// Small dense helpers shared by the Krylov kernels.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
cplx dotc(std::span<const cplx> a, std::span<const cplx> b); // conj(a)'b
double norm2(std::span<const cplx> a);

} // namespace sprelax

#endif
