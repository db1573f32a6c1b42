#include "cqed/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {

void require_same_space(const HilbertSpace& a, const HilbertSpace& b) {
  if (!(a == b)) throw std::invalid_argument("operator and state live on different Hilbert spaces");
}

double real_checked(Complex v, const char* what) {
  if (std::abs(v.imag()) > 1e-10) {
    throw std::runtime_error(std::string(what) + " has a non-negligible imaginary part");
  }
  return v.real();
}

Operator mode_operator(Mode mode, const HilbertSpace& space) {
  return mode == Mode::a ? mode_a_annihilation(space) : mode_b_annihilation(space);
}

}  // namespace

Complex expectation(const Operator& op, const DensityMatrix& rho) {
  require_same_space(op.space(), rho.space());
  // Tr(O rho) = sum_ij O_ij rho_ji
  const SparseMatrix& o = op.matrix();
  const Matrix& r = rho.matrix();
  Complex sum = 0;
  for (int i = 0; i < o.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(o, i); it; ++it) sum += it.value() * r(it.col(), i);
  }
  return sum;
}

ModeMoments moments(const Operator& c, const DensityMatrix& rho) {
  const Operator cd = adjoint(c);
  const Operator number = cd * c;
  const Operator pair = cd * cd * c * c;
  return {real_checked(expectation(number, rho), "<c+c>"), real_checked(expectation(pair, rho), "<c+c+cc>")};
}

ModeMoments population_moments(Mode mode, const DensityMatrix& rho) {
  const HilbertSpace& space = rho.space();
  double n = 0, pair = 0;
  for (int i = 0; i < space.dim(); ++i) {
    const BasisState s = space.decode(i);
    const double k = mode == Mode::a ? s.n_a : s.n_b;
    const double p = rho.matrix()(i, i).real();
    n += k * p;
    pair += k * (k - 1) * p;
  }
  return {n, pair};
}

std::optional<double> g2_from_moments(const ModeMoments& m) {
  if (!(m.n > photon_floor)) return std::nullopt;
  return m.pair / (m.n * m.n);
}

std::optional<double> g2_zero(Mode mode, const DensityMatrix& rho) {
  return g2_from_moments(moments(mode_operator(mode, rho.space()), rho));
}

namespace {

std::optional<MandelForms> mandel_from_moments(const ModeMoments& m) {
  const auto g2 = g2_from_moments(m);
  if (!g2) return std::nullopt;
  // <n^2> = <c+c+cc> + <c+c>
  const double n2 = m.pair + m.n;
  return MandelForms{m.n * (*g2 - 1.0), (n2 - m.n * m.n) / m.n - 1.0};
}

std::optional<double> checked_mandel(const std::optional<MandelForms>& forms) {
  if (!forms) return std::nullopt;
  if (std::abs(forms->from_g2 - forms->from_variance) > 1e-9) {
    throw std::runtime_error("Mandel Q forms disagree beyond 1e-9");
  }
  return forms->from_g2;
}

}  // namespace

std::optional<MandelForms> mandel_q_forms(const DensityMatrix& rho, Mode mode) {
  return mandel_from_moments(moments(mode_operator(mode, rho.space()), rho));
}

std::optional<double> mandel_q(const DensityMatrix& rho, Mode mode) { return checked_mandel(mandel_q_forms(rho, mode)); }

std::optional<double> g2_superposition(double phase, const DensityMatrix& rho) {
  const HilbertSpace& space = rho.space();
  const Complex w = std::polar(1.0, phase);
  const Operator c = (1.0 / std::sqrt(2.0)) * add_scaled(mode_a_annihilation(space), w, mode_b_annihilation(space));
  return g2_from_moments(moments(c, rho));
}

double emission_intensity(const DensityMatrix& rho, const SystemParams& p) {
  const HilbertSpace& space = rho.space();
  const Operator a = mode_a_annihilation(space);
  const Operator b = mode_b_annihilation(space);
  const double n = real_checked(expectation(adjoint(a) * a, rho), "<a+a>") +
                   real_checked(expectation(adjoint(b) * b, rho), "<b+b>");
  return p.kappa * n;
}

double qd_emission(const DensityMatrix& rho, const SystemParams& p) {
  const HilbertSpace& space = rho.space();
  double flux = 0;
  for (int i = 0; i < space.dim(); ++i) {
    flux += excitation_rank(space.decode(i).level) * rho.matrix()(i, i).real();
  }
  return p.gamma * flux;
}

ObservableSet evaluate(const DensityMatrix& rho, const SystemParams& p) {
  const HilbertSpace& space = rho.space();
  const ModeMoments ma = moments(mode_a_annihilation(space), rho);
  const ModeMoments mb = moments(mode_b_annihilation(space), rho);
  ObservableSet o;
  o.n_a = ma.n;
  o.n_b = mb.n;
  o.g2_a = g2_from_moments(ma);
  o.g2_b = g2_from_moments(mb);
  const auto forms = mandel_from_moments(mb);
  o.mandel_q_b = checked_mandel(forms);
  if (forms) o.mandel_q_b_variance = forms->from_variance;
  o.g2_alpha = g2_superposition(0.0, rho);
  o.intensity = p.kappa * (ma.n + mb.n);
  o.qd_emission = qd_emission(rho, p);
  return o;
}

}  // namespace cqed
