#pragma once

#include <complex>
#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cqed {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXcd;

/// Quantum-dot levels in basis order.
enum class QdLevel { G = 0, X = 1, Y = 2, XX = 3 };

/// Parses "G", "X", "Y" or "XX"; anything else throws std::invalid_argument.
QdLevel parse_qd_level(std::string_view label);
std::string_view to_string(QdLevel level);

/// Excitation rank of a QD level: G=0, X=Y=1, XX=2.
int excitation_rank(QdLevel level);

enum class Slot { qd, mode_a, mode_b };

struct BasisState {
  QdLevel level;
  int n_a;
  int n_b;

  friend bool operator==(const BasisState&, const BasisState&) = default;
};

/// Composite space (4 QD levels) x (mode a Fock space) x (mode b Fock space).
///
/// Basis index of |l, m, n> is l*(n_a_max+1)*(n_b_max+1) + m*(n_b_max+1) + n,
/// i.e. the QD level varies slowest and mode b fastest.
class HilbertSpace {
 public:
  static constexpr int n_qd = 4;

  HilbertSpace(int n_a_max, int n_b_max);

  int n_a_max() const { return n_a_max_; }
  int n_b_max() const { return n_b_max_; }
  int dim() const { return n_qd * (n_a_max_ + 1) * (n_b_max_ + 1); }
  int slot_dim(Slot slot) const;

  int index(QdLevel level, int n_a, int n_b) const;
  int index(const BasisState& s) const { return index(s.level, s.n_a, s.n_b); }
  BasisState decode(int index) const;

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  int n_a_max_;
  int n_b_max_;
};

std::ostream& operator<<(std::ostream& os, const HilbertSpace& space);

/// Single-mode annihilation operator on photon numbers 0..n_max.
template <typename Scalar = Complex>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> annihilation(int n_max);

/// sigma_{i,j} = |i><j| on the four QD levels.
template <typename Scalar = Complex>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> qd_transition(QdLevel i, QdLevel j);

/// Integer-label overload; rejects labels outside 0..3.
template <typename Scalar = Complex>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> qd_transition(int i, int j);

/// Sparse complex operator on a HilbertSpace. Immutable once built; never
/// stores explicit zeros.
class Operator {
 public:
  Operator(const HilbertSpace& space, SparseMatrix entries);

  const HilbertSpace& space() const { return space_; }
  const SparseMatrix& matrix() const { return entries_; }
  int dim() const { return space_.dim(); }
  Eigen::Index nonZeros() const { return entries_.nonZeros(); }

  Complex coeff(int row, int col) const { return entries_.coeff(row, col); }
  Matrix dense() const { return Matrix(entries_); }

 private:
  HilbertSpace space_;
  SparseMatrix entries_;
};

Operator identity(const HilbertSpace& space);
Operator zero(const HilbertSpace& space);

/// Lifts a single-subsystem matrix onto the composite space,
/// I (x) ... (x) op (x) ... (x) I with factor order qd (x) mode_a (x) mode_b.
Operator embed(const SparseMatrix& op, Slot slot, const HilbertSpace& space);

Operator adjoint(const Operator& x);
Operator compose(const Operator& x, const Operator& y);
/// x + c*y.
Operator add_scaled(const Operator& x, Complex c, const Operator& y);

inline Operator operator*(const Operator& x, const Operator& y) { return compose(x, y); }
inline Operator operator+(const Operator& x, const Operator& y) { return add_scaled(x, 1.0, y); }
inline Operator operator-(const Operator& x, const Operator& y) { return add_scaled(x, -1.0, y); }
Operator operator*(Complex c, const Operator& x);

/// Largest |x_ij - conj(x_ji)|.
double hermiticity_error(const Operator& x);

/// Writes "row col re im" per stored entry, rows ascending then columns.
void write_triplets(std::ostream& os, const Operator& x);

/// Composite-space ladder and projector shorthands.
Operator mode_a_annihilation(const HilbertSpace& space);
Operator mode_b_annihilation(const HilbertSpace& space);
Operator sigma(QdLevel i, QdLevel j, const HilbertSpace& space);

}  // namespace cqed
