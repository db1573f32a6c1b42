#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cqed/fockspace.hpp"

using namespace cqed;

namespace {

Matrix dense(const SparseMatrix& m) { return Matrix(m); }

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

SparseMatrix eye(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

TEST_CASE("annihilation operator entries") {
  const SparseMatrix a = annihilation(2);
  CHECK(a.nonZeros() == 2);
  CHECK(a.coeff(0, 1) == Complex(1.0));
  CHECK(std::abs(a.coeff(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(annihilation(0), std::invalid_argument);

  const auto real_a = annihilation<double>(3);
  CHECK(real_a.coeff(2, 3) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("number operator and truncated commutator") {
  const SparseMatrix a = annihilation(3);
  const Matrix n = dense(SparseMatrix(a.adjoint() * a));
  for (int k = 0; k <= 3; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
  CHECK(max_abs(n - Matrix(n.diagonal().asDiagonal())) == 0.0);

  const int nmax = 5;
  const SparseMatrix b = annihilation(nmax);
  const Matrix comm = dense(SparseMatrix(b * b.adjoint() - b.adjoint() * b));
  Matrix expected = Matrix::Identity(nmax + 1, nmax + 1);
  expected(nmax, nmax) = -double(nmax);
  CHECK(max_abs(comm - expected) < 1e-14);
}

TEST_CASE("QD transition operators") {
  const SparseMatrix s = qd_transition(QdLevel::G, QdLevel::X);
  Eigen::VectorXcd ket_x = Eigen::VectorXcd::Zero(4);
  ket_x(1) = 1.0;
  const Eigen::VectorXcd out = s * ket_x;
  CHECK(out(0) == Complex(1.0));
  CHECK(out.norm() == doctest::Approx(1.0));

  const SparseMatrix p = qd_transition(QdLevel::X, QdLevel::X);
  CHECK(max_abs(dense(SparseMatrix(p * p)) - dense(p)) == 0.0);
  CHECK(max_abs(dense(SparseMatrix(s.adjoint())) - dense(qd_transition(QdLevel::X, QdLevel::G))) == 0.0);

  CHECK_THROWS_AS(qd_transition(4, 0), std::invalid_argument);
  CHECK_THROWS_AS(qd_transition(0, -1), std::invalid_argument);
  CHECK(parse_qd_level("XX") == QdLevel::XX);
  CHECK_THROWS_AS(parse_qd_level("Z"), std::invalid_argument);
  CHECK(to_string(QdLevel::Y) == "Y");
}

TEST_CASE("basis indexing") {
  const HilbertSpace space(3, 2);
  CHECK(space.dim() == 4 * 4 * 3);
  CHECK(space.index(QdLevel::X, 2, 1) == 1 * 12 + 2 * 3 + 1);
  for (int l = 0; l < 4; ++l) {
    for (int m = 0; m <= 3; ++m) {
      for (int n = 0; n <= 2; ++n) {
        const BasisState s{static_cast<QdLevel>(l), m, n};
        CHECK(space.decode(space.index(s)) == s);
      }
    }
  }
  CHECK_THROWS(space.index(QdLevel::G, 4, 0));
  CHECK_THROWS(space.decode(space.dim()));
  CHECK_THROWS_AS(HilbertSpace(0, 3), std::invalid_argument);
  CHECK(HilbertSpace(6, 6).dim() == 196);
}

TEST_CASE("embedding onto the composite space") {
  const HilbertSpace space(2, 3);
  for (Slot slot : {Slot::qd, Slot::mode_a, Slot::mode_b}) {
    const Operator id = embed(eye(space.slot_dim(slot)), slot, space);
    CHECK(max_abs(id.dense() - Matrix::Identity(space.dim(), space.dim())) == 0.0);
  }

  const Operator a = mode_a_annihilation(space);
  const Operator b = mode_b_annihilation(space);
  CHECK(max_abs((a * b).dense() - (b * a).dense()) == 0.0);

  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(space.dim());
  ket(space.index(QdLevel::G, 1, 0)) = 1.0;
  const Eigen::VectorXcd out = a.matrix() * ket;
  CHECK(out(space.index(QdLevel::G, 0, 0)) == Complex(1.0));
  CHECK(out.norm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(embed(annihilation(3), Slot::mode_a, space), std::invalid_argument);
}

TEST_CASE("embedding nonzero count and product distribution") {
  const HilbertSpace space(3, 2);
  const int dq = space.slot_dim(Slot::qd), da = space.slot_dim(Slot::mode_a), db = space.slot_dim(Slot::mode_b);
  const SparseMatrix sa = annihilation(3);
  const SparseMatrix sb = annihilation(2);
  const SparseMatrix sq = qd_transition(QdLevel::X, QdLevel::XX);
  CHECK(embed(sa, Slot::mode_a, space).nonZeros() == sa.nonZeros() * dq * db);
  CHECK(embed(sb, Slot::mode_b, space).nonZeros() == sb.nonZeros() * dq * da);
  CHECK(embed(sq, Slot::qd, space).nonZeros() == sq.nonZeros() * da * db);

  const SparseMatrix x = sa.adjoint();
  const SparseMatrix prod = x * sa;
  const Operator lhs = embed(prod, Slot::mode_a, space);
  const Operator rhs = embed(x, Slot::mode_a, space) * embed(sa, Slot::mode_a, space);
  CHECK(max_abs(lhs.dense() - rhs.dense()) < 1e-15);
}

TEST_CASE("operator algebra") {
  const HilbertSpace space(2, 2);
  const Operator a = mode_a_annihilation(space);
  const Operator h = add_scaled(a + adjoint(a), Complex(0, 2), sigma(QdLevel::G, QdLevel::X, space));
  CHECK(max_abs(adjoint(adjoint(h)).dense() - h.dense()) == 0.0);
  CHECK(max_abs(compose(h, identity(space)).dense() - h.dense()) == 0.0);
  CHECK(max_abs(compose(identity(space), h).dense() - h.dense()) == 0.0);

  const Operator z = add_scaled(h, -1.0, h);
  CHECK(z.nonZeros() == 0);
  CHECK(hermiticity_error(a + adjoint(a)) == 0.0);
  CHECK(hermiticity_error(a) > 0.5);

  const HilbertSpace other(2, 3);
  CHECK_THROWS_AS(compose(a, mode_a_annihilation(other)), std::invalid_argument);
  CHECK_THROWS_AS(add_scaled(a, 1.0, mode_a_annihilation(other)), std::invalid_argument);
  CHECK_THROWS_AS(Operator(space, SparseMatrix(3, 3)), std::invalid_argument);
}

TEST_CASE("constructed operators store no explicit zeros") {
  const HilbertSpace space(1, 1);
  SparseMatrix m(space.dim(), space.dim());
  m.insert(0, 0) = 0.0;
  m.insert(1, 2) = 3.0;
  const Operator op(space, m);
  CHECK(op.nonZeros() == 1);
}

TEST_CASE("triplet dump") {
  const HilbertSpace space(1, 1);
  const Operator a = mode_a_annihilation(space);
  const Operator op = add_scaled(a, Complex(0, 1), adjoint(a));
  std::ostringstream os;
  write_triplets(os, op);
  std::istringstream is(os.str());
  int row = 0, col = 0, last_row = -1, last_col = -1, count = 0;
  double re = 0, im = 0;
  while (is >> row >> col >> re >> im) {
    CHECK((row > last_row || (row == last_row && col > last_col)));
    CHECK(op.coeff(row, col) == Complex(re, im));
    last_row = row;
    last_col = col;
    ++count;
  }
  CHECK(count == op.nonZeros());
}
