#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sprelax/assembly.hpp"
#include "sprelax/grid.hpp"
#include "sprelax/sparse.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace sprelax;

namespace {

SparseMatrix dense_to_csr(const Eigen::MatrixXd& a) {
  SparseMatrix m;
  m.n_rows = static_cast<int>(a.rows());
  m.n_cols = static_cast<int>(a.cols());
  m.row_offsets.assign(m.n_rows + 1, 0);
  for (int i = 0; i < m.n_rows; ++i) {
    for (int j = 0; j < m.n_cols; ++j)
      if (a(i, j) != 0.0) {
        m.cols.push_back(j);
        m.vals.push_back(a(i, j));
      }
    m.row_offsets[i + 1] = static_cast<std::int64_t>(m.cols.size());
  }
  return m;
}

Eigen::MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = dist(gen);
  return b.transpose() * b + n * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_symmetric(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = dist(gen);
  return 0.5 * (b + b.transpose());
}

} // namespace

TEST_CASE("cg: identity system converges immediately") {
  const SparseMatrix I = SparseMatrix::identity(5);
  const std::vector<double> b{1.0, -2.0, 3.0, 0.5, -0.25};
  const auto [x, rep] = cg_solve(I, b, 1e-14, 100);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  for (int i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("cg: hand-solved 2x2 system") {
  Eigen::MatrixXd a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  const SparseMatrix A = dense_to_csr(a);
  const auto [x, rep] = cg_solve(A, {1.0, 2.0}, 1e-14, 100);
  CHECK(rep.converged);
  CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("cg: zero right-hand side returns zero after zero iterations") {
  const SparseMatrix A = dense_to_csr(random_spd(8, 1));
  const auto [x, rep] = cg_solve(A, std::vector<double>(8, 0.0), 1e-12, 100);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("cg: converges within 3n iterations on random spd systems") {
  for (int n : {5, 20, 50, 100}) {
    const SparseMatrix A = dense_to_csr(random_spd(n, 100 + n));
    std::mt19937 gen(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> b(n);
    for (double& v : b) v = dist(gen);
    const auto [x, rep] = cg_solve(A, b, 1e-12, 3 * n);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 3 * n);
  }
}

TEST_CASE("cg solves are deterministic") {
  const SparseMatrix A = dense_to_csr(random_spd(30, 5));
  std::mt19937 gen(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> b(30);
  for (double& v : b) v = dist(gen);
  const auto [x1, r1] = cg_solve(A, b, 1e-13, 500);
  const auto [x2, r2] = cg_solve(A, b, 1e-13, 500);
  CHECK(x1 == x2); // bitwise
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("complex solve: zero imaginary block reduces to a mass solve") {
  const int n = 12;
  const Eigen::MatrixXd m = random_spd(n, 2);
  const SparseMatrix M = dense_to_csr(m);
  SparseMatrix S = dense_to_csr(Eigen::MatrixXd::Zero(n, n));
  S.n_rows = S.n_cols = n;
  S.row_offsets.assign(n + 1, 0); // empty pattern is fine, multiply yields zero
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cplx> rhs(n);
  for (auto& v : rhs) v = cplx(dist(gen), dist(gen));
  const auto [x, rep] = complex_cn_solve(M, S, rhs, 1e-12, 1000);
  CHECK(rep.converged);

  Eigen::VectorXd br(n), bi(n);
  for (int i = 0; i < n; ++i) {
    br(i) = rhs[i].real();
    bi(i) = rhs[i].imag();
  }
  const Eigen::VectorXd xr = m.ldlt().solve(br), xi = m.ldlt().solve(bi);
  for (int i = 0; i < n; ++i) {
    CHECK(x[i].real() == doctest::Approx(xr(i)).epsilon(1e-10));
    CHECK(x[i].imag() == doctest::Approx(xi(i)).epsilon(1e-10));
  }
}

TEST_CASE("complex solve: M = S = I gives x = rhs / (1+i)") {
  const int n = 6;
  const SparseMatrix I = SparseMatrix::identity(n);
  std::vector<cplx> rhs(n, cplx(0.0));
  rhs[3] = cplx(1.0, 1.0);
  const auto [x, rep] = complex_cn_solve(I, I, rhs, 1e-13, 100);
  CHECK(rep.converged);
  for (int i = 0; i < n; ++i) {
    const double expect = (i == 3) ? 1.0 : 0.0;
    CHECK(std::abs(x[i] - expect) < 1e-12);
  }
}

TEST_CASE("complex solve agrees with dense complex lu on random systems") {
  for (int n : {6, 15, 30, 50}) {
    const Eigen::MatrixXd m = random_spd(n, 40 + n);
    const Eigen::MatrixXd s = random_symmetric(n, 80 + n);
    const SparseMatrix M = dense_to_csr(m);
    const SparseMatrix S = dense_to_csr(s);
    std::mt19937 gen(7 * n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<cplx> rhs(n);
    for (auto& v : rhs) v = cplx(dist(gen), dist(gen));

    const auto [x, rep] = complex_cn_solve(M, S, rhs, 1e-13, 4000);
    CHECK(rep.converged);

    Eigen::MatrixXcd a = m.cast<cplx>() + cplx(0.0, 1.0) * s.cast<cplx>();
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) b(i) = rhs[i];
    const Eigen::VectorXcd ref = a.partialPivLu().solve(b);
    for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - ref(i)) < 1e-10 * ref.norm());
  }
}

TEST_CASE("complex solve is deterministic") {
  const int n = 25;
  const SparseMatrix M = dense_to_csr(random_spd(n, 3));
  const SparseMatrix S = dense_to_csr(random_symmetric(n, 4));
  std::vector<cplx> rhs(n);
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : rhs) v = cplx(dist(gen), dist(gen));
  const auto [x1, r1] = complex_cn_solve(M, S, rhs, 1e-12, 1000);
  const auto [x2, r2] = complex_cn_solve(M, S, rhs, 1e-12, 1000);
  CHECK(x1 == x2);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("mean-zero poisson solve on a periodic grid") {
  const Grid g = build_grid({-0.5, 0.5, -0.5, 0.5}, 6, 6, 1, BcKind::Periodic);
  const Workspace ws(g);
  const SparseMatrix M = assemble_mass(ws);
  const SparseMatrix L = assemble_laplace(ws);
  const int n = g.n_dofs;
  const std::vector<double> ones(n, 1.0);
  const std::vector<double> m1 = M.multiply(ones);

  SUBCASE("pure incompatible rhs deflates to zero") {
    std::vector<double> x(n, 0.0);
    const SolveReport rep = cg_solve_meanzero(L, M, m1, 1e-12, 5000, x);
    CHECK(rep.converged);
    for (double v : x) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("compatible rhs is untouched by deflation and solves to mean zero") {
    std::mt19937 gen(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> b(n);
    for (double& v : b) v = dist(gen);
    double s = 0.0;
    for (double v : b) s += v;
    for (double& v : b) v -= s / n; // 1'b = 0 => b_proj = b
    std::vector<double> x(n, 0.0);
    const SolveReport rep = cg_solve_meanzero(L, M, b, 1e-12, 20000, x);
    CHECK(rep.converged);
    const std::vector<double> lx = L.multiply(x);
    double bn = 0.0, rn = 0.0;
    for (int i = 0; i < n; ++i) {
      bn += b[i] * b[i];
      rn += (lx[i] - b[i]) * (lx[i] - b[i]);
    }
    CHECK(std::sqrt(rn) <= 2e-12 * std::sqrt(bn));
    // weighted mean exactly deflated
    double mean = 0.0, denom = 0.0;
    for (int i = 0; i < n; ++i) {
      mean += m1[i] * x[i];
      denom += m1[i];
    }
    CHECK(std::abs(mean / denom) < 1e-12);
  }
}
