#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "cqed/liouville.hpp"
#include "cqed/observables.hpp"

using namespace cqed;

namespace {

Matrix random_matrix(int d, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

Matrix unvec(const Vector& v, int d) { return Eigen::Map<const Matrix>(v.data(), d, d); }

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

SystemParams small_params(int n) {
  SystemParams p;
  p.n_a_max = p.n_b_max = n;
  return p;
}

}  // namespace

TEST_CASE("column stacking identity") {
  std::mt19937 rng(1);
  const Matrix a = random_matrix(3, rng), x = random_matrix(3, rng), b = random_matrix(3, rng);
  const Matrix kron = Eigen::kroneckerProduct(Matrix(b.transpose()), a);
  CHECK((kron * vec(x) - vec(a * x * b)).norm() < 1e-12);
}

TEST_CASE("single decaying mode") {
  const HilbertSpace s(1, 1);
  const Operator a = mode_a_annihilation(s);
  const Superoperator l = build_liouvillian(zero(s), {{2.5, a}});
  const int one = s.index(QdLevel::G, 1, 0), vac = s.index(QdLevel::G, 0, 0);
  Matrix rho = Matrix::Zero(s.dim(), s.dim());
  rho(one, one) = 1.0;
  Matrix expected = Matrix::Zero(s.dim(), s.dim());
  expected(vac, vac) = 2.5;
  expected(one, one) = -2.5;
  CHECK((l.apply(rho) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((unvec(l.assemble() * vec(rho), s.dim()) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("assembled matrix agrees with the matrix-free map") {
  SystemParams p = small_params(1);
  p.delta = 20;
  p.e_b = 4;
  p.delta_a = 3;
  const Superoperator l = build_liouvillian(p);
  const int d = l.dim();
  const Matrix full = Matrix(l.assemble());
  // Column k of the assembled matrix is L applied to the k-th basis matrix.
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      const Vector col = vec(l.apply(e));
      CHECK((full.col(j * d + i) - col).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("trace and Hermiticity preservation") {
  SystemParams p = small_params(3);
  p.delta = -40;
  p.e_b = 9.5;
  const Superoperator l = build_liouvillian(p);
  const auto full = l.assemble();
  std::mt19937 rng(7);
  for (int k = 0; k < 5; ++k) {
    const Matrix rho = random_matrix(l.dim(), rng);
    const Matrix out = l.apply(rho);
    CHECK(std::abs(out.trace()) < 1e-10 * rho.norm());
    CHECK(std::abs(unvec(full * vec(rho), l.dim()).trace()) < 1e-10 * rho.norm());
    const Matrix herm = rho + rho.adjoint();
    const Matrix lh = l.apply(herm);
    CHECK((lh - lh.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((l.apply_hermitian(herm) - lh).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectrum on the smallest space") {
  SystemParams p = small_params(1);
  p.delta = 13;
  p.delta_a = 2;
  p.e_b = 3;
  const Superoperator l = build_liouvillian(p);
  Eigen::ComplexEigenSolver<Matrix> es(Matrix(l.assemble()), false);
  int zeros = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1e-10) {
      ++zeros;
    } else {
      CHECK(lambda.real() < 0);
    }
  }
  CHECK(zeros == 1);
}

TEST_CASE("undriven system relaxes to the vacuum") {
  SystemParams p = small_params(2);
  p.e_a = p.e_b = 0;
  const Superoperator l = build_liouvillian(p);
  for (auto method : {SteadyStateMethod::direct, SteadyStateMethod::krylov}) {
    SteadyStateOptions o;
    o.method = method;
    const DensityMatrix rho = solve_steady_state(l, o).rho;
    const Matrix vac = DensityMatrix::vacuum(l.space()).matrix();
    CHECK((rho.matrix() - vac).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("driven empty cavity matches the coherent-state solution") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    SystemParams p;
    p.g = 0;
    p.e_b = 0;
    p.n_a_max = 10;
    p.n_b_max = 1;
    p.e_a = 0.5 + 2 * u(rng);
    p.kappa = 10 + 20 * u(rng);
    p.delta = -30 + 60 * u(rng);
    p.delta_a = -10 + 20 * u(rng);
    const double expected = p.e_a * p.e_a / (std::pow(p.delta + p.delta_a, 2) + p.kappa * p.kappa / 4);
    const DensityMatrix rho = steady_state(build_liouvillian(p));
    CHECK(population_moments(Mode::a, rho).n == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("direct and iterative solutions agree") {
  SystemParams p = small_params(3);
  p.delta = 20;
  p.e_b = 9.5;
  const Superoperator l = build_liouvillian(p);
  SteadyStateOptions direct;
  direct.method = SteadyStateMethod::direct;
  SteadyStateOptions krylov;
  krylov.method = SteadyStateMethod::krylov;
  const auto a = solve_steady_state(l, direct);
  const auto b = solve_steady_state(l, krylov);
  CHECK((a.rho.matrix() - b.rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.residual < 1e-10);
  CHECK(b.residual < 1e-10);
  CHECK(b.iterations > 0);

  // Reusing the preconditioner from a neighbouring point and warm starting
  // from the neighbour's state reach the same solution.
  SystemParams q = p;
  q.e_b = 9.6;
  const Superoperator lq = build_liouvillian(q);
  SteadyStateOptions warm = krylov;
  warm.preconditioner = b.preconditioner;
  warm.initial_guess = &b.rho.matrix();
  const auto c = solve_steady_state(lq, warm);
  const auto ref = solve_steady_state(lq, direct);
  CHECK((c.rho.matrix() - ref.rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("steady state on the full space satisfies the density-matrix invariants") {
  for (double delta : {20.0, 200.0}) {
    SystemParams p;
    p.delta = delta;
    p.e_b = delta == 200.0 ? 19.6 : 9.5;
    const Superoperator l = build_liouvillian(p);
    const auto sol = solve_steady_state(l);
    CHECK(sol.residual < 1e-10);
    CHECK(residual_inf(l, sol.rho.matrix()) < 1e-10);
    const InvariantReport inv = check_invariants(sol.rho, true);
    CHECK(inv.hermiticity < 1e-10);
    CHECK(inv.trace < 1e-10);
    CHECK(*inv.min_eigenvalue > -1e-8);
    CHECK(inv.ok());
  }
}

TEST_CASE("steady state needs dissipation") {
  SystemParams p = small_params(1);
  const HilbertSpace s = p.space();
  auto channels = collapse_channels(p, s);
  for (auto& c : channels) c.rate = 0;
  CHECK_THROWS_AS(steady_state(build_liouvillian(hamiltonian(p, s), channels)), SteadyStateError);
}

TEST_CASE("evolve: trivial and analytic cases") {
  const HilbertSpace s(3, 1);
  const Operator a = mode_a_annihilation(s);
  const double kappa = 4.0;
  const Superoperator l = build_liouvillian(zero(s), {{kappa, a}});
  const DensityMatrix one = DensityMatrix::basis_state(s, {QdLevel::G, 1, 0});

  const DensityMatrix same = evolve(one, l, 0.0, 1e-3);
  CHECK((same.matrix() - one.matrix()).norm() == 0.0);

  for (double t : {0.1, 0.5}) {
    const DensityMatrix rho = evolve(one, l, t, 1e-3);
    CHECK(population_moments(Mode::a, rho).n == doctest::Approx(std::exp(-kappa * t)).epsilon(1e-9));
  }

  const double limit = rk4_step_limit / norm_inf(l);
  CHECK_THROWS_AS(evolve(one, l, 1.0, 1.01 * limit), StepSizeError);
  CHECK_THROWS_AS(evolve(one, l, 1.0, -1.0), StepSizeError);
}

TEST_CASE("evolve and steady state agree at randomized points") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    SystemParams p = small_params(2);
    p.delta = -40 + 80 * u(rng);
    p.delta_a = -10 + 20 * u(rng);
    p.e_a = 0.5 + 2 * u(rng);
    p.e_b = 2 + 8 * u(rng);
    p.gamma = 2.0 + 3 * u(rng);
    p.chi = 100;
    p.delta_b = -50;
    const Superoperator l = build_liouvillian(p);
    const DensityMatrix ss = steady_state(l);
    const double dt = 0.9 * rk4_step_limit / norm_inf(l);
    const DensityMatrix late = evolve(DensityMatrix::vacuum(l.space()), l, 50.0 / p.gamma, dt);
    const ObservableSet a = evaluate(ss, p);
    const ObservableSet b = evaluate(late, p);
    CHECK(std::abs(a.n_a - b.n_a) < 1e-6);
    CHECK(std::abs(a.n_b - b.n_b) < 1e-6);
    CHECK(std::abs(*a.g2_a - *b.g2_a) < 1e-6);
    CHECK(std::abs(*a.g2_b - *b.g2_b) < 1e-6);
  }
}
