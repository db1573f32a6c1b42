#include "cqed/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cqed {

namespace {

constexpr std::array<std::string_view, 12> parameter_names = {
    "g", "kappa", "gamma", "chi", "e_a", "e_b", "delta", "delta_a", "delta_b", "n_a_max", "n_b_max", "r"};

void require_space_matches(const SystemParams& p, const HilbertSpace& space) {
  if (space.n_a_max() != p.n_a_max || space.n_b_max() != p.n_b_max) {
    throw std::invalid_argument("Hilbert space cutoffs do not match the parameter set");
  }
}

int as_cutoff(std::string_view name, double value) {
  if (!std::isfinite(value) || value != std::floor(value) || value < 1 || value > 64) {
    throw std::invalid_argument(std::string(name) + " must be an integer in [1, 64]");
  }
  return static_cast<int>(value);
}

}  // namespace

void SystemParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : {g, kappa, gamma, chi, e_a, e_b, delta, delta_a, delta_b}) {
    if (!finite(v)) throw std::invalid_argument("parameters must be finite");
  }
  if (g < 0) throw std::invalid_argument("g must be >= 0");
  if (kappa <= 0) throw std::invalid_argument("kappa must be > 0");
  if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
  if (chi < 0) throw std::invalid_argument("chi must be >= 0");
  if (e_a < 0 || e_b < 0) throw std::invalid_argument("drive amplitudes must be >= 0");
  if (n_a_max < 1 || n_b_max < 1) throw std::invalid_argument("Fock cutoffs must be >= 1");
}

bool is_parameter_name(std::string_view name) {
  for (auto n : parameter_names) {
    if (n == name) return true;
  }
  return false;
}

double get_parameter(const SystemParams& p, std::string_view name) {
  if (name == "g") return p.g;
  if (name == "kappa") return p.kappa;
  if (name == "gamma") return p.gamma;
  if (name == "chi") return p.chi;
  if (name == "e_a") return p.e_a;
  if (name == "e_b") return p.e_b;
  if (name == "delta") return p.delta;
  if (name == "delta_a") return p.delta_a;
  if (name == "delta_b") return p.delta_b;
  if (name == "n_a_max") return p.n_a_max;
  if (name == "n_b_max") return p.n_b_max;
  if (name == "r") {
    if (p.e_a == 0) throw std::invalid_argument("r is undefined when e_a = 0");
    return p.e_b / p.e_a;
  }
  throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

void set_parameter(SystemParams& p, std::string_view name, double value) {
  if (name == "g") p.g = value;
  else if (name == "kappa") p.kappa = value;
  else if (name == "gamma") p.gamma = value;
  else if (name == "chi") p.chi = value;
  else if (name == "e_a") p.e_a = value;
  else if (name == "e_b") p.e_b = value;
  else if (name == "delta") p.delta = value;
  else if (name == "delta_a") p.delta_a = value;
  else if (name == "delta_b") p.delta_b = value;
  else if (name == "n_a_max") p.n_a_max = as_cutoff(name, value);
  else if (name == "n_b_max") p.n_b_max = as_cutoff(name, value);
  else if (name == "r") p.e_b = value * p.e_a;
  else throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

Operator hamiltonian(const SystemParams& p, const HilbertSpace& space) {
  require_space_matches(p, space);
  using L = QdLevel;
  const Operator a = mode_a_annihilation(space);
  const Operator b = mode_b_annihilation(space);
  const Operator ad = adjoint(a);
  const Operator bd = adjoint(b);

  Operator h = (2 * p.delta - p.chi) * sigma(L::XX, L::XX, space);
  h = add_scaled(h, p.delta, sigma(L::X, L::X, space) + sigma(L::Y, L::Y, space));
  h = add_scaled(h, p.delta + p.delta_a, ad * a);
  h = add_scaled(h, p.delta + p.delta_b, bd * b);

  const Operator couple_a = sigma(L::G, L::X, space) * ad + sigma(L::X, L::XX, space) * ad;
  const Operator couple_b = sigma(L::G, L::Y, space) * bd + sigma(L::Y, L::XX, space) * bd;
  h = add_scaled(h, p.g, couple_a + adjoint(couple_a));
  h = add_scaled(h, p.g, couple_b + adjoint(couple_b));

  h = add_scaled(h, p.e_a, a + ad);
  h = add_scaled(h, p.e_b, b + bd);
  return h;
}

std::vector<CollapseChannel> collapse_channels(const SystemParams& p, const HilbertSpace& space) {
  require_space_matches(p, space);
  using L = QdLevel;
  std::vector<CollapseChannel> out;
  out.reserve(6);
  out.push_back({p.kappa, mode_a_annihilation(space)});
  out.push_back({p.kappa, mode_b_annihilation(space)});
  out.push_back({p.gamma, sigma(L::G, L::X, space)});
  out.push_back({p.gamma, sigma(L::G, L::Y, space)});
  out.push_back({p.gamma, sigma(L::X, L::XX, space)});
  out.push_back({p.gamma, sigma(L::Y, L::XX, space)});
  return out;
}

SystemParams exchanged(const SystemParams& p) {
  SystemParams q = p;
  std::swap(q.e_a, q.e_b);
  std::swap(q.delta_a, q.delta_b);
  std::swap(q.n_a_max, q.n_b_max);
  return q;
}

std::vector<int> exchange_permutation(const HilbertSpace& space) {
  const HilbertSpace target(space.n_b_max(), space.n_a_max());
  std::vector<int> perm(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    const BasisState s = space.decode(i);
    QdLevel l = s.level;
    if (l == QdLevel::X) l = QdLevel::Y;
    else if (l == QdLevel::Y) l = QdLevel::X;
    perm[i] = target.index(l, s.n_b, s.n_a);
  }
  return perm;
}

}  // namespace cqed
