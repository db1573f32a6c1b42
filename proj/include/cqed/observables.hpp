#pragma once

#include <optional>

#include "cqed/fockspace.hpp"
#include "cqed/liouville.hpp"
#include "cqed/model.hpp"

namespace cqed {

enum class Mode { a, b };

/// Mean photon numbers below this are treated as "no light": g2 and Q are
/// reported as undefined instead of dividing tiny numbers.
inline constexpr double photon_floor = 1e-14;

/// Tr(op rho).
Complex expectation(const Operator& op, const DensityMatrix& rho);

/// <c+ c> and <c+ c+ c c> for an arbitrary mode operator c.
struct ModeMoments {
  double n;
  double pair;
};
ModeMoments moments(const Operator& c, const DensityMatrix& rho);

/// Same moments of mode a or b summed directly over Fock-basis populations,
/// without building any operator. Independent of the operator route above.
ModeMoments population_moments(Mode mode, const DensityMatrix& rho);

/// <c+ c+ c c> / <c+ c>^2; nullopt below the photon floor.
std::optional<double> g2_from_moments(const ModeMoments& m);
std::optional<double> g2_zero(Mode mode, const DensityMatrix& rho);

struct MandelForms {
  double from_g2;
  double from_variance;
};
/// Both textbook forms of Q = <n>(g2 - 1) = (<n^2> - <n>^2)/<n> - 1.
std::optional<MandelForms> mandel_q_forms(const DensityMatrix& rho, Mode mode = Mode::b);
/// Throws std::runtime_error if the two forms disagree by more than 1e-9.
std::optional<double> mandel_q(const DensityMatrix& rho, Mode mode = Mode::b);

/// g2(0) of c = (a + e^{i phase} b)/sqrt(2).
std::optional<double> g2_superposition(double phase, const DensityMatrix& rho);

/// Cavity output flux kappa (<n_a> + <n_b>).
double emission_intensity(const DensityMatrix& rho, const SystemParams& p);
/// Spontaneous-emission flux gamma (P_X + P_Y + 2 P_XX) through the four
/// excitonic channels; reported separately from the cavity output.
double qd_emission(const DensityMatrix& rho, const SystemParams& p);

struct ObservableSet {
  double n_a = 0;
  double n_b = 0;
  std::optional<double> g2_a;
  std::optional<double> g2_b;
  std::optional<double> mandel_q_b;
  /// Variance form of Q, kept for the cross-check.
  std::optional<double> mandel_q_b_variance;
  std::optional<double> g2_alpha;
  double intensity = 0;
  double qd_emission = 0;
};

ObservableSet evaluate(const DensityMatrix& rho, const SystemParams& p);

}  // namespace cqed
