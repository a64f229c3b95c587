#ifndef SPRELAX_ASSEMBLY_HPP
#define SPRELAX_ASSEMBLY_HPP

#include "sprelax/grid.hpp"
#include "sprelax/quadrature.hpp"
#include "sprelax/sparse.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace sprelax {

/// Coefficient vector of a finite element function on a Grid. Complex fields
/// are pairs of real coefficient sets under the hood of the solvers; here we
/// store them as std::complex for convenience.
template <class Scalar>
struct FeField {
  const Grid* grid = nullptr;
  std::vector<Scalar> coeffs;

  FeField() = default;
  explicit FeField(const Grid& g) : grid(&g), coeffs(g.n_dofs, Scalar{}) {}
  FeField(const Grid& g, std::vector<Scalar> c) : grid(&g), coeffs(std::move(c)) {}
};

using RealField = FeField<double>;
using ComplexField = FeField<cplx>;

/// Precomputed quadrature rule and basis tables for one grid. All assembly
/// and quadrature-evaluation routines run through a Workspace so that the
/// tables are built once. Immutable and shareable.
class Workspace {
public:
  explicit Workspace(const Grid& grid);
  Workspace(const Grid& grid, int nq_axis);

  const Grid& grid() const { return *grid_; }
  int nq_axis() const { return nq_axis_; }
  int nq_cell() const { return nq_axis_ * nq_axis_; }
  const Quadrature1D& rule() const { return rule_; }
  const LagrangeTable& table() const { return table_; }

  /// Physical coordinates of quadrature point q (= qy*nq_axis+qx) in cell c.
  std::array<double, 2> quad_point(int cell, int q) const;
  /// Physical quadrature weight (uniform mesh: independent of the cell).
  double quad_weight(int q) const { return weights_[q]; }

  /// Local coefficients of a field on one cell; eliminated boundary nodes
  /// read as zero.
  template <class S>
  void gather(const FeField<S>& f, int cell, std::span<S> local) const;

  /// Values of a local coefficient set at all quadrature points of a cell.
  template <class S>
  void eval_values(std::span<const S> local, std::span<S> out) const;

  /// Physical-gradient components at all quadrature points.
  template <class S>
  void eval_gradients(std::span<const S> local, std::span<S> gx, std::span<S> gy) const;

private:
  const Grid* grid_;
  int nq_axis_;
  Quadrature1D rule_;
  LagrangeTable table_;
  std::vector<double> weights_; // physical 2D weights, nq_cell entries
};

/// CSR sparsity pattern of all (i,j) pairs sharing a cell.
SparseMatrix build_pattern(const Grid& grid);

/// M_ij = (phi_i, phi_j). Symmetric positive-definite; assembly is
/// deterministic and the result bitwise symmetric.
SparseMatrix assemble_mass(const Workspace& ws);

/// L_ij = (grad phi_i, grad phi_j). Positive-semidefinite; definite under
/// homogeneous Dirichlet conditions.
SparseMatrix assemble_laplace(const Workspace& ws);

/// P_ij = (w phi_i, phi_j) for a real FE weight w on the same grid.
SparseMatrix assemble_weighted_mass(const Workspace& ws, const RealField& w);

namespace detail {
std::vector<double> assemble_load_real(const Workspace& ws,
                                       const std::function<double(double, double)>& f);
std::vector<cplx> assemble_load_cplx(const Workspace& ws,
                                     const std::function<cplx(double, double)>& f);
RealField l2_project_real(const Workspace& ws, const SparseMatrix& M,
                          const std::function<double(double, double)>& f, double tol,
                          int max_iter);
ComplexField l2_project_cplx(const Workspace& ws, const SparseMatrix& M,
                             const std::function<cplx(double, double)>& f, double tol,
                             int max_iter);
} // namespace detail

/// Load vector b_j = (f, phi_j) for a pointwise function (real- or
/// complex-valued, picked from the callable's return type) or an FE field.
template <class F>
  requires std::is_invocable_v<F, double, double>
auto assemble_load(const Workspace& ws, F&& f) {
  if constexpr (std::is_same_v<std::invoke_result_t<F, double, double>, cplx>)
    return detail::assemble_load_cplx(ws, std::forward<F>(f));
  else
    return detail::assemble_load_real(ws, std::forward<F>(f));
}
std::vector<double> assemble_load(const Workspace& ws, const RealField& f);
std::vector<cplx> assemble_load(const Workspace& ws, const ComplexField& f);

/// b_j = (|U|^2, phi_j); optionally adds (g, phi_j) for a pointwise g.
std::vector<double> assemble_density_load(const Workspace& ws, const ComplexField& U);

/// Reference-cell local matrices (identical for every cell of the uniform
/// mesh), row-major with local index a + (r+1)*b.
std::vector<double> local_mass_matrix(const Workspace& ws);
std::vector<double> local_laplace_matrix(const Workspace& ws);

/// L2-projection: solves M x = (f, phi) by CG to `tol`.
template <class F>
  requires std::is_invocable_v<F, double, double>
auto l2_project(const Workspace& ws, const SparseMatrix& M, F&& f, double tol = 1e-13,
                int max_iter = 50000) {
  if constexpr (std::is_same_v<std::invoke_result_t<F, double, double>, cplx>)
    return detail::l2_project_cplx(ws, M, std::forward<F>(f), tol, max_iter);
  else
    return detail::l2_project_real(ws, M, std::forward<F>(f), tol, max_iter);
}
RealField l2_project_load(const Workspace& ws, const SparseMatrix& M,
                          std::vector<double> load, double tol = 1e-13, int max_iter = 50000);
ComplexField l2_project_load(const Workspace& ws, const SparseMatrix& M,
                             std::vector<cplx> load, double tol = 1e-13, int max_iter = 50000);

/// Discrete Laplacian: returns w with M w = -L v, i.e. w ~ Laplacian of v in
/// the weak sense.
RealField discrete_laplacian_apply(const Workspace& ws, const SparseMatrix& M,
                                   const SparseMatrix& L, const RealField& v,
                                   double tol = 1e-13, int max_iter = 50000);
ComplexField discrete_laplacian_apply(const Workspace& ws, const SparseMatrix& M,
                                      const SparseMatrix& L, const ComplexField& v,
                                      double tol = 1e-13, int max_iter = 50000);

/// Plain quadrature of a pointwise function over the domain.
double integrate(const Workspace& ws, const std::function<double(double, double)>& f);

/// Quadrature of |U|^2 for an FE field (independent of the mass matrix).
double integrate_density(const Workspace& ws, const ComplexField& U);

} // namespace sprelax

#endif
