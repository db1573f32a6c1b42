#include "cqed/fockspace.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

namespace cqed {

namespace {

void require_same_space(const Operator& x, const Operator& y, const char* what) {
  if (!(x.space() == y.space())) {
    throw std::invalid_argument(std::string(what) + ": operators live on different Hilbert spaces");
  }
}

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

QdLevel parse_qd_level(std::string_view label) {
  if (label == "G") return QdLevel::G;
  if (label == "X") return QdLevel::X;
  if (label == "Y") return QdLevel::Y;
  if (label == "XX") return QdLevel::XX;
  throw std::invalid_argument("unknown QD level '" + std::string(label) + "' (expected G, X, Y or XX)");
}

std::string_view to_string(QdLevel level) {
  switch (level) {
    case QdLevel::G: return "G";
    case QdLevel::X: return "X";
    case QdLevel::Y: return "Y";
    case QdLevel::XX: return "XX";
  }
  return "?";
}

int excitation_rank(QdLevel level) {
  switch (level) {
    case QdLevel::G: return 0;
    case QdLevel::X:
    case QdLevel::Y: return 1;
    case QdLevel::XX: return 2;
  }
  return 0;
}

HilbertSpace::HilbertSpace(int n_a_max, int n_b_max) : n_a_max_(n_a_max), n_b_max_(n_b_max) {
  if (n_a_max < 1 || n_b_max < 1) {
    throw std::invalid_argument("Fock cutoffs must be >= 1");
  }
}

int HilbertSpace::slot_dim(Slot slot) const {
  switch (slot) {
    case Slot::qd: return n_qd;
    case Slot::mode_a: return n_a_max_ + 1;
    case Slot::mode_b: return n_b_max_ + 1;
  }
  return 0;
}

int HilbertSpace::index(QdLevel level, int n_a, int n_b) const {
  if (n_a < 0 || n_a > n_a_max_ || n_b < 0 || n_b > n_b_max_) {
    throw std::out_of_range("photon number outside the truncated Fock space");
  }
  const int nb = n_b_max_ + 1;
  return static_cast<int>(level) * (n_a_max_ + 1) * nb + n_a * nb + n_b;
}

BasisState HilbertSpace::decode(int index) const {
  if (index < 0 || index >= dim()) throw std::out_of_range("basis index out of range");
  const int nb = n_b_max_ + 1;
  const int na = n_a_max_ + 1;
  return {static_cast<QdLevel>(index / (na * nb)), (index / nb) % na, index % nb};
}

std::ostream& operator<<(std::ostream& os, const HilbertSpace& space) {
  return os << "HilbertSpace(4 x " << space.n_a_max() + 1 << " x " << space.n_b_max() + 1 << ")";
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> annihilation(int n_max) {
  if (n_max < 1) throw std::invalid_argument("annihilation: n_max must be >= 1");
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> a(n_max + 1, n_max + 1);
  a.reserve(Eigen::VectorXi::Constant(n_max + 1, 1));
  for (int m = 1; m <= n_max; ++m) a.insert(m - 1, m) = Scalar(std::sqrt(static_cast<double>(m)));
  a.makeCompressed();
  return a;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> qd_transition(QdLevel i, QdLevel j) {
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> s(HilbertSpace::n_qd, HilbertSpace::n_qd);
  s.insert(static_cast<int>(i), static_cast<int>(j)) = Scalar(1);
  s.makeCompressed();
  return s;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> qd_transition(int i, int j) {
  if (i < 0 || i >= HilbertSpace::n_qd || j < 0 || j >= HilbertSpace::n_qd) {
    throw std::invalid_argument("qd_transition: level index outside {G, X, Y, XX}");
  }
  return qd_transition<Scalar>(static_cast<QdLevel>(i), static_cast<QdLevel>(j));
}

template Eigen::SparseMatrix<double, Eigen::RowMajor> annihilation<double>(int);
template Eigen::SparseMatrix<Complex, Eigen::RowMajor> annihilation<Complex>(int);
template Eigen::SparseMatrix<double, Eigen::RowMajor> qd_transition<double>(QdLevel, QdLevel);
template Eigen::SparseMatrix<Complex, Eigen::RowMajor> qd_transition<Complex>(QdLevel, QdLevel);
template Eigen::SparseMatrix<double, Eigen::RowMajor> qd_transition<double>(int, int);
template Eigen::SparseMatrix<Complex, Eigen::RowMajor> qd_transition<Complex>(int, int);

Operator::Operator(const HilbertSpace& space, SparseMatrix entries)
    : space_(space), entries_(std::move(entries)) {
  if (entries_.rows() != space_.dim() || entries_.cols() != space_.dim()) {
    throw std::invalid_argument("Operator: matrix dimension does not match the Hilbert space");
  }
  entries_.prune(Complex(0.0), 0.0);
  entries_.makeCompressed();
}

Operator identity(const HilbertSpace& space) { return {space, sparse_identity(space.dim())}; }

Operator zero(const HilbertSpace& space) { return {space, SparseMatrix(space.dim(), space.dim())}; }

Operator embed(const SparseMatrix& op, Slot slot, const HilbertSpace& space) {
  const int d = space.slot_dim(slot);
  if (op.rows() != d || op.cols() != d) {
    throw std::invalid_argument("embed: operator dimension does not match the target slot");
  }
  const SparseMatrix id_qd = sparse_identity(space.slot_dim(Slot::qd));
  const SparseMatrix id_a = sparse_identity(space.slot_dim(Slot::mode_a));
  const SparseMatrix id_b = sparse_identity(space.slot_dim(Slot::mode_b));
  SparseMatrix lifted;
  switch (slot) {
    case Slot::qd:
      lifted = Eigen::kroneckerProduct(op, SparseMatrix(Eigen::kroneckerProduct(id_a, id_b)));
      break;
    case Slot::mode_a:
      lifted = Eigen::kroneckerProduct(id_qd, SparseMatrix(Eigen::kroneckerProduct(op, id_b)));
      break;
    case Slot::mode_b:
      lifted = Eigen::kroneckerProduct(id_qd, SparseMatrix(Eigen::kroneckerProduct(id_a, op)));
      break;
  }
  return {space, std::move(lifted)};
}

Operator adjoint(const Operator& x) { return {x.space(), SparseMatrix(x.matrix().adjoint())}; }

Operator compose(const Operator& x, const Operator& y) {
  require_same_space(x, y, "compose");
  return {x.space(), SparseMatrix(x.matrix() * y.matrix())};
}

Operator add_scaled(const Operator& x, Complex c, const Operator& y) {
  require_same_space(x, y, "add_scaled");
  return {x.space(), SparseMatrix(x.matrix() + c * y.matrix())};
}

Operator operator*(Complex c, const Operator& x) { return {x.space(), SparseMatrix(c * x.matrix())}; }

double hermiticity_error(const Operator& x) {
  const SparseMatrix diff = x.matrix() - SparseMatrix(x.matrix().adjoint());
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

void write_triplets(std::ostream& os, const Operator& x) {
  const auto old_precision = os.precision(17);
  const SparseMatrix& m = x.matrix();
  for (int row = 0; row < m.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  os.precision(old_precision);
}

Operator mode_a_annihilation(const HilbertSpace& space) {
  return embed(annihilation(space.n_a_max()), Slot::mode_a, space);
}

Operator mode_b_annihilation(const HilbertSpace& space) {
  return embed(annihilation(space.n_b_max()), Slot::mode_b, space);
}

Operator sigma(QdLevel i, QdLevel j, const HilbertSpace& space) {
  return embed(qd_transition(i, j), Slot::qd, space);
}

}  // namespace cqed
