#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cqed/fockspace.hpp"
#include "cqed/model.hpp"

namespace cqed {

using Vector = Eigen::VectorXcd;
using ColSparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

/// Density matrix on a HilbertSpace. Invariants are checked on request
/// rather than enforced, so intermediate states of an integration can be
/// represented.
class DensityMatrix {
 public:
  DensityMatrix(const HilbertSpace& space, Matrix entries);

  /// |l, m, n><l, m, n|.
  static DensityMatrix basis_state(const HilbertSpace& space, const BasisState& s);
  static DensityMatrix vacuum(const HilbertSpace& space) { return basis_state(space, {QdLevel::G, 0, 0}); }

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return entries_; }
  int dim() const { return space_.dim(); }
  Complex trace() const { return entries_.trace(); }

  double hermiticity_error() const;
  double trace_error() const { return std::abs(trace() - Complex(1.0)); }
  /// Smallest eigenvalue of the Hermitian part. O(D^3).
  double min_eigenvalue() const;

 private:
  HilbertSpace space_;
  Matrix entries_;
};

struct InvariantReport {
  double hermiticity = 0;
  double trace = 0;
  std::optional<double> min_eigenvalue;

  bool ok() const {
    return hermiticity < 1e-10 && trace < 1e-10 && (!min_eigenvalue || *min_eigenvalue > -1e-8);
  }
};

InvariantReport check_invariants(const DensityMatrix& rho, bool with_spectrum);

/// Lindblad generator
///   L(rho) = -i[H, rho] + sum_k r_k (c_k rho c_k+ - {c_k+ c_k, rho}/2)
/// stored in factored form. apply() evaluates it matrix-free as
/// K rho + rho K+ + sum_k r_k c_k rho c_k+ with K = -iH - sum_k r_k c_k+ c_k / 2.
/// assemble() builds the D^2 x D^2 matrix acting on column-stacked vec(rho).
class Superoperator {
 public:
  Superoperator(Operator h, std::vector<CollapseChannel> channels);

  const HilbertSpace& space() const { return h_.space(); }
  int dim() const { return h_.dim(); }
  const Operator& hamiltonian() const { return h_; }
  const std::vector<CollapseChannel>& channels() const { return channels_; }
  /// Non-Hermitian effective generator K.
  const SparseMatrix& effective_generator() const { return k_; }

  Matrix apply(const Matrix& rho) const;
  /// As apply() but assumes rho is Hermitian (saves one sparse product).
  Matrix apply_hermitian(const Matrix& rho) const;

  ColSparseMatrix assemble() const;

 private:
  void add_jumps(const Matrix& rho, Matrix& out) const;

  Operator h_;
  std::vector<CollapseChannel> channels_;
  SparseMatrix k_;
  std::vector<SparseMatrix> jumps_;
  std::vector<SparseMatrix> jumps_adj_;
  std::vector<double> rates_;
};

Superoperator build_liouvillian(const Operator& h, const std::vector<CollapseChannel>& channels);
Superoperator build_liouvillian(const SystemParams& p);

/// Maximum absolute row sum of the assembled matrix.
double norm_inf(const Superoperator& l);
double norm_inf(const ColSparseMatrix& m);

/// Largest |entry| of L(rho).
double residual_inf(const Superoperator& l, const Matrix& rho);

/// Solves K X + X K+ = R. Used as the preconditioner of the steady-state
/// iteration; it inverts the Liouvillian with the jump terms dropped.
/// Diagonalizes K when its eigenvector matrix is well conditioned and falls
/// back to the complex Schur form otherwise. Immutable after construction.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const SparseMatrix& k);
  Matrix solve(const Matrix& r) const;
  int dim() const { return static_cast<int>(v_.rows()); }
  bool diagonalized() const { return diagonal_; }

 private:
  bool diagonal_ = false;
  // Eigenvectors or Schur vectors.
  Matrix v_;
  Matrix v_inv_;
  // 1/(lambda_i + conj(lambda_j)), or the triangular Schur factor.
  Matrix weights_;
};

enum class SteadyStateMethod { automatic, krylov, direct };

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::automatic;
  /// Required max-entry residual of L(rho).
  double tolerance = 1e-10;
  int restart = 150;
  int max_iterations = 3000;
  /// Starting point for the iterative method.
  const Matrix* initial_guess = nullptr;
  /// Reuse a preconditioner built for a nearby operator.
  std::shared_ptr<const LyapunovSolver> preconditioner;
  /// Spaces up to this dimension use the direct method under `automatic`.
  int direct_max_dim = 64;
};

struct SteadyStateResult {
  DensityMatrix rho;
  double residual;
  int iterations;
  std::shared_ptr<const LyapunovSolver> preconditioner;
};

class SteadyStateError : public std::runtime_error {
 public:
  enum class Kind { non_unique, not_converged };
  SteadyStateError(Kind kind, double residual, const std::string& what)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}
  Kind kind() const { return kind_; }
  double residual() const { return residual_; }

 private:
  Kind kind_;
  double residual_;
};

/// Solves L(rho) = 0 with Tr rho = 1: the equation for the (0,0) entry is
/// replaced by the trace condition. Returns the Hermitian part of the
/// solution. Throws SteadyStateError on a singular system or when the
/// residual cannot be brought below the tolerance.
SteadyStateResult solve_steady_state(const Superoperator& l, const SteadyStateOptions& options = {});
DensityMatrix steady_state(const Superoperator& l);

/// Largest RK4 step accepted by evolve, as a multiple of 1/||L||_inf. The
/// classical RK4 stability region contains the closed left half-disk of
/// radius 2.5 around the origin.
inline constexpr double rk4_step_limit = 2.5;

class StepSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TraceDriftError : public std::runtime_error {
 public:
  TraceDriftError(double drift, const std::string& what) : std::runtime_error(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

/// Classical fixed-step RK4 on d vec(rho)/dt = L vec(rho) using the
/// assembled matrix. The step is shrunk so that t_final is an integer number
/// of steps. Renormalizes to unit trace at the end; throws TraceDriftError
/// if the trace moved by more than 1e-6 before that.
DensityMatrix evolve(const DensityMatrix& rho0, const Superoperator& l, double t_final, double dt);

}  // namespace cqed
