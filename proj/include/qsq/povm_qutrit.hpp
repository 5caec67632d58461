#pragma once

// Six-effect qutrit POVM for simultaneous estimation of {J_y,J_z} and
// {J_z,J_x}, its Naimark dilation into F=1 (+) F=2 and the two-stage
// unitary U = W U_A.
//
// Qutrit basis: (+1, 0, -1). Eight-level basis: F=1 triplet (+1, 0, -1)
// followed by the F=2 quintet (-2, -1, 0, +1, +2).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsq/types.hpp"

namespace qsq::povm {

inline constexpr int kLevels = 8;

/// Position of |F, m> in the eight-level basis.
int level_index(int F, int m);
std::string level_label(int index);

struct PovmSet {
  std::array<CVector, 4> phi;
  std::array<CMatrix, 6> effects;
  CMatrix target_x;  // {J_y, J_z}
  CMatrix target_y;  // {J_z, J_x}

  /// max |sum E - I|.
  double completeness_defect() const;
  double min_eigenvalue() const;
};

PovmSet build_effects();

struct Estimate {
  double lx = 0.0;
  double ly = 0.0;
};

/// p_mu = Tr(rho E_mu).
std::array<double, 6> effect_probabilities(const CMatrix& rho, const PovmSet& povm);
/// (2(p2 - p1), 2(p4 - p3)); throws ConfigError unless rho is a density matrix.
Estimate reconstruct(const CMatrix& rho, const PovmSet& povm);

/// Throws ConfigError unless rho is Hermitian, PSD and trace one (tolerance 1e-10).
void check_density_matrix(const CMatrix& rho);

struct PulseSettings {
  // pulse areas Omega_m t and phases for m = +1, 0, -1
  std::array<double, 3> area;
  std::array<double, 3> phase{0.0, 0.0, 0.0};
  static PulseSettings nominal();
};

struct NaimarkModel {
  CMatrix V;   // 8 x 3
  CMatrix UA;  // 8 x 8
  CMatrix W;   // 8 x 8
  CMatrix U;   // W UA
  PulseSettings pulses;
  /// Outcome level of each effect E_1..E_6.
  std::array<int, 6> channel;
};

CMatrix isometry(const PovmSet& povm);
/// exp(-i H_A) for the three Delta m = 0 couplings.
CMatrix stage_a_unitary(const PulseSettings& pulses);
/// The F=2 mixing unitary defined by the chi targets.
CMatrix mixing_unitary();
/// Unitary whose first columns are `isometry`, remaining columns by modified Gram-Schmidt over the standard basis.
CMatrix complete_unitary(const CMatrix& isometry_columns);

/// Throws NumericalFailure when ||U|_{F=1} - V|| > 1e-10.
NaimarkModel build_naimark();
/// Same construction with arbitrary pulses; no residual check.
NaimarkModel build_naimark(const PulseSettings& pulses);

struct OutcomeStats {
  RVector p;  // eight physical outcomes
  long shots = 0;  // 0 for exact probabilities
  std::array<double, 6> effects{};

  Estimate estimate() const;
  /// p(1,0) + p(2,+2).
  double dark() const;
};

OutcomeStats simulate_readout(const CMatrix& rho, const NaimarkModel& model);
OutcomeStats simulate_readout(const CMatrix& rho, const NaimarkModel& model, long shots, std::uint64_t seed);

struct LeakageReport {
  double epsilon = 0.0;
  double dark_population = 0.0;
  /// d(dark)/d(epsilon) at epsilon, central difference.
  double sensitivity = 0.0;
  Estimate bias;  // estimate minus the exact targets
};

/// All pulse areas scaled by (1 + epsilon).
LeakageReport leakage(const CMatrix& rho, double epsilon);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckLine> checks;
  double max_reconstruction_error = 0.0;
  double mean_reconstruction_error = 0.0;
  int states = 0;
  long shots = 0;
  double shot_rms_error = 0.0;  // shot-mode rms of <L_x>, <L_y> errors
  bool all_pass() const;
};

/// Every invariant plus reconstruction statistics over `states` random density matrices.
VerifyReport verify(int states, long shots, std::uint64_t seed);

/// Haar-like random density matrix of rank `rank` from a seeded generator.
CMatrix random_density_matrix(int rank, std::uint64_t seed);

}  // namespace qsq::povm
