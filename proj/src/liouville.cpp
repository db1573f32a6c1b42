#include "cqed/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

namespace cqed {

namespace {

ColSparseMatrix sparse_identity(int n) {
  ColSparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

std::string format_residual(const char* prefix, double residual) {
  std::ostringstream os;
  os << prefix << " (residual " << residual << ")";
  return os.str();
}

Eigen::Map<Vector> as_vector(Matrix& m) { return {m.data(), m.size()}; }

}  // namespace

DensityMatrix::DensityMatrix(const HilbertSpace& space, Matrix entries) : space_(space), entries_(std::move(entries)) {
  if (entries_.rows() != space_.dim() || entries_.cols() != space_.dim()) {
    throw std::invalid_argument("DensityMatrix: matrix dimension does not match the Hilbert space");
  }
}

DensityMatrix DensityMatrix::basis_state(const HilbertSpace& space, const BasisState& s) {
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  const int i = space.index(s);
  m(i, i) = 1.0;
  return {space, std::move(m)};
}

double DensityMatrix::hermiticity_error() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

InvariantReport check_invariants(const DensityMatrix& rho, bool with_spectrum) {
  InvariantReport r;
  r.hermiticity = rho.hermiticity_error();
  r.trace = rho.trace_error();
  if (with_spectrum) r.min_eigenvalue = rho.min_eigenvalue();
  return r;
}

Superoperator::Superoperator(Operator h, std::vector<CollapseChannel> channels)
    : h_(std::move(h)), channels_(std::move(channels)) {
  SparseMatrix decay(h_.dim(), h_.dim());
  for (const auto& ch : channels_) {
    if (!(ch.op.space() == h_.space())) {
      throw std::invalid_argument("build_liouvillian: collapse operator lives on a different Hilbert space");
    }
    if (!(ch.rate >= 0)) throw std::invalid_argument("build_liouvillian: negative channel rate");
    if (ch.rate == 0) continue;
    const SparseMatrix cd = ch.op.matrix().adjoint();
    decay += (0.5 * ch.rate) * SparseMatrix(cd * ch.op.matrix());
    jumps_.push_back(ch.op.matrix());
    jumps_adj_.push_back(cd);
    rates_.push_back(ch.rate);
  }
  k_ = Complex(0, -1) * h_.matrix() - decay;
  k_.prune(Complex(0.0), 0.0);
  k_.makeCompressed();
}

Matrix Superoperator::apply(const Matrix& rho) const {
  Matrix out(rho.rows(), rho.cols());
  out.noalias() = k_ * rho;
  out.noalias() += rho * k_.adjoint();
  add_jumps(rho, out);
  return out;
}

Matrix Superoperator::apply_hermitian(const Matrix& rho) const {
  Matrix x(rho.rows(), rho.cols());
  x.noalias() = k_ * rho;
  Matrix out = x + x.adjoint();
  add_jumps(rho, out);
  return out;
}

void Superoperator::add_jumps(const Matrix& rho, Matrix& out) const {
  Matrix t(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    t.noalias() = jumps_[k] * rho;
    out.noalias() += rates_[k] * (t * jumps_adj_[k]);
  }
}

ColSparseMatrix Superoperator::assemble() const {
  const int d = dim();
  const ColSparseMatrix id = sparse_identity(d);
  const ColSparseMatrix h = h_.matrix();
  const ColSparseMatrix ht = h.transpose();
  ColSparseMatrix l = Complex(0, -1) * (ColSparseMatrix(Eigen::kroneckerProduct(id, h)) -
                                        ColSparseMatrix(Eigen::kroneckerProduct(ht, id)));
  for (const auto& ch : channels_) {
    if (ch.rate == 0) continue;
    const ColSparseMatrix c = ch.op.matrix();
    const ColSparseMatrix cc = c.conjugate();
    const ColSparseMatrix cdc = c.adjoint() * c;
    const ColSparseMatrix cdct = cdc.transpose();
    l += (0.5 * ch.rate) * (2.0 * ColSparseMatrix(Eigen::kroneckerProduct(cc, c)) -
                            ColSparseMatrix(Eigen::kroneckerProduct(id, cdc)) -
                            ColSparseMatrix(Eigen::kroneckerProduct(cdct, id)));
  }
  l.prune(Complex(0.0), 0.0);
  l.makeCompressed();
  return l;
}

Superoperator build_liouvillian(const Operator& h, const std::vector<CollapseChannel>& channels) {
  return {h, channels};
}

Superoperator build_liouvillian(const SystemParams& p) {
  p.validate();
  const HilbertSpace space = p.space();
  return {hamiltonian(p, space), collapse_channels(p, space)};
}

double norm_inf(const ColSparseMatrix& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (ColSparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

double norm_inf(const Superoperator& l) { return norm_inf(l.assemble()); }

double residual_inf(const Superoperator& l, const Matrix& rho) { return l.apply(rho).cwiseAbs().maxCoeff(); }

LyapunovSolver::LyapunovSolver(const SparseMatrix& k) {
  const Matrix dense = k;
  const int d = static_cast<int>(dense.rows());
  Eigen::ComplexEigenSolver<Matrix> eig(dense);
  if (eig.info() == Eigen::Success) {
    Eigen::PartialPivLU<Matrix> lu(eig.eigenvectors());
    if (lu.rcond() > 1e-8) {
      v_ = eig.eigenvectors();
      v_inv_ = lu.inverse();
      const Vector lambda = eig.eigenvalues();
      weights_.resize(d, d);
      for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) weights_(i, j) = 1.0 / (lambda(i) + std::conj(lambda(j)));
      }
      diagonal_ = true;
      return;
    }
  }
  Eigen::ComplexSchur<Matrix> schur(dense);
  if (schur.info() != Eigen::Success) throw std::runtime_error("Schur decomposition of K failed");
  v_ = schur.matrixU();
  weights_ = schur.matrixT();
}

Matrix LyapunovSolver::solve(const Matrix& r) const {
  const int d = dim();
  Matrix tmp(d, d), y(d, d), out(d, d);
  if (diagonal_) {
    // K = V diag(lambda) V^-1: in the eigenbasis the equation is elementwise.
    tmp.noalias() = v_inv_ * r;
    y.noalias() = tmp * v_inv_.adjoint();
    y.array() *= weights_.array();
    tmp.noalias() = v_ * y;
    out.noalias() = tmp * v_.adjoint();
    return out;
  }
  // With K = Q T Q+ the equation reads T Y + Y T+ = Q+ R Q. Column j of Y
  // only couples to columns > j, so sweep right to left with one
  // upper-triangular solve per column.
  const Matrix& t = weights_;
  tmp.noalias() = v_.adjoint() * r;
  Matrix c(d, d);
  c.noalias() = tmp * v_;
  Matrix w = t;
  Vector rhs(d);
  for (int j = d - 1; j >= 0; --j) {
    rhs = c.col(j);
    const int n = d - 1 - j;
    if (n > 0) rhs.noalias() -= y.rightCols(n) * t.row(j).tail(n).adjoint();
    w.diagonal() = t.diagonal().array() + std::conj(t(j, j));
    y.col(j) = w.triangularView<Eigen::Upper>().solve(rhs);
  }
  tmp.noalias() = v_ * y;
  out.noalias() = tmp * v_.adjoint();
  return out;
}

namespace {

Matrix finalize(const Matrix& x) {
  Matrix h = 0.5 * (x + x.adjoint());
  h /= h.trace().real();
  return h;
}

SteadyStateResult solve_direct(const Superoperator& l, const SteadyStateOptions& options) {
  const int d = l.dim();
  const int n = d * d;
  const ColSparseMatrix full = l.assemble();
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(full.nonZeros() + d);
  for (int k = 0; k < full.outerSize(); ++k) {
    for (ColSparseMatrix::InnerIterator it(full, k); it; ++it) {
      if (it.row() != 0) entries.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < d; ++i) entries.emplace_back(0, i * d + i, 1.0);
  ColSparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();

  Eigen::SparseLU<ColSparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw SteadyStateError(SteadyStateError::Kind::non_unique, INFINITY,
                           "steady state is not unique: trace-constrained Liouvillian is singular");
  }
  Vector b = Vector::Zero(n);
  b(0) = 1.0;
  Vector x = lu.solve(b);
  if (!x.allFinite()) {
    throw SteadyStateError(SteadyStateError::Kind::non_unique, INFINITY,
                           "steady state is not unique: solve produced non-finite values");
  }
  Matrix rho = finalize(Eigen::Map<Matrix>(x.data(), d, d));
  const double res = residual_inf(l, rho);
  if (!(res < options.tolerance)) {
    throw SteadyStateError(SteadyStateError::Kind::not_converged, res,
                           format_residual("direct steady-state solve missed the tolerance", res));
  }
  return {DensityMatrix(l.space(), std::move(rho)), res, 0, nullptr};
}

// Hermitian matrices form a real vector space and the Frobenius inner
// product is real on it. Packing the real and imaginary parts of the upper
// triangle (off-diagonal entries scaled by sqrt 2) is an isometry onto R^(D^2).
void pack_hermitian(const Matrix& h, Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index d = h.rows();
  const double s = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      out(j * d + i) = s * h(i, j).real();
      out(i * d + j) = s * h(i, j).imag();
    }
    out(j * d + j) = h(j, j).real();
  }
}

void unpack_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, Matrix& h) {
  const Eigen::Index d = h.rows();
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const Complex z(s * v(j * d + i), s * v(i * d + j));
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
    h(j, j) = v(j * d + j);
  }
}

// Right-preconditioned restarted GMRES on the trace-constrained system. The
// operator, the preconditioner and the right-hand side all preserve
// Hermiticity, so the iteration runs in real arithmetic on packed Hermitian
// matrices. Classical Gram-Schmidt with a second pass when the first one
// cancels most of the vector.
SteadyStateResult solve_krylov(const Superoperator& l, const SteadyStateOptions& options) {
  const int d = l.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  auto precond = options.preconditioner;
  if (!precond || precond->dim() != d) precond = std::make_shared<LyapunovSolver>(l.effective_generator());

  auto op = [&](const Matrix& x) {
    Matrix y = l.apply_hermitian(x);
    y(0, 0) = x.trace();
    return y;
  };

  Matrix x;
  if (options.initial_guess && options.initial_guess->rows() == d && options.initial_guess->cols() == d) {
    x = 0.5 * (*options.initial_guess + options.initial_guess->adjoint());
  } else {
    x = DensityMatrix::vacuum(l.space()).matrix();
  }
  Matrix b = Matrix::Zero(d, d);
  b(0, 0) = 1.0;

  const int m = std::max(1, options.restart);
  Eigen::MatrixXd basis(n, m + 1);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd g(m + 1), cs(m), sn(m), coeff(m + 1), wv(n);

  // The dropped (0,0) equation is minus the sum of the other diagonal ones,
  // so a Frobenius residual below tol / (2 sqrt(D)) keeps every entry of
  // L(rho) below tol.
  double inner_tol = options.tolerance / (2.0 * std::sqrt(static_cast<double>(d)));
  int iterations = 0;
  double best = INFINITY;
  int stalled_cycles = 0;
  Matrix rho;
  double res = INFINITY;
  Matrix z(d, d), w(d, d);

  while (true) {
    const Matrix r = b - op(x);
    rho = finalize(x);
    res = residual_inf(l, rho);
    if (res < options.tolerance) break;
    if (iterations >= options.max_iterations) {
      throw SteadyStateError(SteadyStateError::Kind::not_converged, res,
                             format_residual("steady-state iteration hit the iteration limit", res));
    }
    if (res < best * 0.5) {
      best = res;
      stalled_cycles = 0;
    } else if (++stalled_cycles >= 3) {
      throw SteadyStateError(SteadyStateError::Kind::not_converged, res,
                             format_residual("steady-state iteration stagnated", res));
    }
    pack_hermitian(r, basis.col(0));
    const double beta = basis.col(0).norm();
    if (beta < inner_tol) inner_tol *= 0.1;
    basis.col(0) /= beta;
    g.setZero();
    g(0) = beta;

    int j = 0;
    for (; j < m && iterations < options.max_iterations; ++j) {
      ++iterations;
      unpack_hermitian(basis.col(j), w);
      z = precond->solve(w);
      pack_hermitian(op(z), wv);
      const double before = wv.norm();
      auto vj = basis.leftCols(j + 1);
      coeff.head(j + 1).noalias() = vj.transpose() * wv;
      wv.noalias() -= vj * coeff.head(j + 1);
      hess.col(j).head(j + 1) = coeff.head(j + 1);
      if (wv.norm() < 0.7 * before) {
        coeff.head(j + 1).noalias() = vj.transpose() * wv;
        wv.noalias() -= vj * coeff.head(j + 1);
        hess.col(j).head(j + 1) += coeff.head(j + 1);
      }
      const double h_next = wv.norm();
      hess(j + 1, j) = h_next;
      if (h_next > 0) basis.col(j + 1) = wv / h_next;

      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * hess(i, j) + sn(i) * hess(i + 1, j);
        hess(i + 1, j) = -sn(i) * hess(i, j) + cs(i) * hess(i + 1, j);
        hess(i, j) = t;
      }
      const double den = std::hypot(hess(j, j), hess(j + 1, j));
      cs(j) = hess(j, j) / den;
      sn(j) = hess(j + 1, j) / den;
      hess(j, j) = den;
      hess(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) < inner_tol || h_next == 0) {
        ++j;
        break;
      }
    }
    const Eigen::VectorXd y = hess.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    wv.noalias() = basis.leftCols(j) * y;
    unpack_hermitian(wv, w);
    x += precond->solve(w);
  }
  return {DensityMatrix(l.space(), std::move(rho)), res, iterations, precond};
}

}  // namespace

SteadyStateResult solve_steady_state(const Superoperator& l, const SteadyStateOptions& options) {
  bool has_decay = false;
  for (const auto& ch : l.channels()) has_decay = has_decay || ch.rate > 0;
  if (!has_decay) {
    throw SteadyStateError(SteadyStateError::Kind::non_unique, INFINITY,
                           "steady state needs at least one dissipative channel");
  }
  switch (options.method) {
    case SteadyStateMethod::direct: return solve_direct(l, options);
    case SteadyStateMethod::krylov: return solve_krylov(l, options);
    case SteadyStateMethod::automatic:
      return l.dim() <= options.direct_max_dim ? solve_direct(l, options) : solve_krylov(l, options);
  }
  return solve_krylov(l, options);
}

DensityMatrix steady_state(const Superoperator& l) { return solve_steady_state(l).rho; }

DensityMatrix evolve(const DensityMatrix& rho0, const Superoperator& l, double t_final, double dt) {
  if (!(rho0.space() == l.space())) throw std::invalid_argument("evolve: state and generator spaces differ");
  if (!(t_final >= 0) || !std::isfinite(t_final)) throw std::invalid_argument("evolve: t_final must be >= 0");
  if (t_final == 0) return rho0;

  const Eigen::SparseMatrix<Complex, Eigen::RowMajor> a = l.assemble();
  const double limit = rk4_step_limit / norm_inf(ColSparseMatrix(a));
  if (!(dt > 0) || dt > limit) {
    std::ostringstream os;
    os << "evolve: step " << dt << " outside (0, " << limit << "] required for RK4 stability";
    throw StepSizeError(os.str());
  }
  const auto steps = static_cast<long long>(std::ceil(t_final / dt - 1e-9));
  const double h = t_final / static_cast<double>(steps);

  Matrix state = rho0.matrix();
  auto y = as_vector(state);
  Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  for (long long s = 0; s < steps; ++s) {
    k1.noalias() = a * y;
    tmp = y + (0.5 * h) * k1;
    k2.noalias() = a * tmp;
    tmp = y + (0.5 * h) * k2;
    k3.noalias() = a * tmp;
    tmp = y + h * k3;
    k4.noalias() = a * tmp;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Complex tr = state.trace();
  const double drift = std::abs(tr - rho0.trace());
  if (!(drift <= 1e-6)) {
    throw TraceDriftError(drift, format_residual("evolve: trace drifted beyond 1e-6", drift));
  }
  state /= tr;
  return {l.space(), std::move(state)};
}

}  // namespace cqed
