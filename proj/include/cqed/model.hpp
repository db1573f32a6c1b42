#pragma once

#include <string_view>
#include <vector>

#include "cqed/fockspace.hpp"

namespace cqed {

/// Physical parameters in micro-eV (hbar = 1). Defaults are the baseline
/// operating point: chi = 400, kappa = g = 20, gamma = 0.2, E_a = 1, mode a
/// resonant with the exciton and mode b on the two-photon line (-chi/2).
struct SystemParams {
  double g = 20.0;
  double kappa = 20.0;
  double gamma = 0.2;
  double chi = 400.0;
  double e_a = 1.0;
  double e_b = 1.0;
  double delta = 0.0;
  double delta_a = 0.0;
  double delta_b = -200.0;
  int n_a_max = 6;
  int n_b_max = 6;

  /// Throws std::invalid_argument when a field is outside its physical range.
  void validate() const;
  HilbertSpace space() const { return {n_a_max, n_b_max}; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Names accepted by get_parameter/set_parameter: the field names above plus
/// "r", the drive ratio e_b / e_a (setting it writes e_b = r * e_a).
bool is_parameter_name(std::string_view name);
double get_parameter(const SystemParams& p, std::string_view name);
void set_parameter(SystemParams& p, std::string_view name, double value);

struct CollapseChannel {
  double rate;
  Operator op;
};

/// H = (2D - chi) s_XX,XX + D (s_X,X + s_Y,Y) + (D + D_a) a+a + (D + D_b) b+b
///   + g (s_G,X a+ + s_X,XX a+ + h.c.) + g (s_G,Y b+ + s_Y,XX b+ + h.c.)
///   + E_a (a + a+) + E_b (b + b+)
/// in the frame rotating at the laser frequency.
Operator hamiltonian(const SystemParams& p, const HilbertSpace& space);

/// (kappa, a), (kappa, b), (gamma, s_G,X), (gamma, s_G,Y), (gamma, s_X,XX),
/// (gamma, s_Y,XX). Each contributes rate * (c rho c+ - {c+c, rho}/2).
std::vector<CollapseChannel> collapse_channels(const SystemParams& p, const HilbertSpace& space);

/// Parameters of the mirror-image system obtained by exchanging the two
/// cavity modes and the X/Y excitons.
SystemParams exchanged(const SystemParams& p);

/// Basis permutation realizing the a<->b, X<->Y relabeling: perm[i] is the
/// image of basis index i.
std::vector<int> exchange_permutation(const HilbertSpace& space);

}  // namespace cqed
