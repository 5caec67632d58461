#pragma once

// Single-site quantum Fisher information matrix, the Tr(f^-1) cost and the
// restarted penalty search for the optimal product probe.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsq/sud_algebra.hpp"

namespace qsq {

/// Local dimension plus the ordered encoding generators {s_alpha}.
class SensingTask {
 public:
  SensingTask(int d, std::vector<HermitianOperator> encoders, std::vector<std::string> labels = {});

  /// Spin-component task: axes is a string over {x, y, z}, e.g. "xy".
  static SensingTask spin(int d, const std::string& axes);

  int d() const { return d_; }
  int k() const { return static_cast<int>(encoders_.size()); }
  const HermitianOperator& encoder(int alpha) const { return encoders_[alpha]; }
  const std::vector<HermitianOperator>& encoders() const { return encoders_; }
  const std::string& label(int alpha) const { return labels_[alpha]; }
  /// "xy", "xyz", ... for spin tasks; empty otherwise.
  const std::string& axes() const { return axes_; }

 private:
  int d_;
  std::vector<HermitianOperator> encoders_;
  std::vector<std::string> labels_;
  std::string axes_;
};

/// Normalised single-site state vector.
class PureState {
 public:
  /// Throws if the vector is not normalised within `tol`.
  explicit PureState(CVector amplitudes, double tol = 1e-12);
  static PureState normalized(CVector amplitudes);
  static PureState basis(int d, int index);

  int dim() const { return static_cast<int>(z_.size()); }
  const CVector& amplitudes() const { return z_; }
  cd operator[](int mu) const { return z_[mu]; }
  CMatrix projector() const { return z_ * z_.adjoint(); }
  double expectation(const CMatrix& op) const { return z_.dot(op * z_).real(); }

  /// Global phase fixed so that the first amplitude with modulus > 1e-8 is real positive.
  PureState gauge_fixed() const;

 private:
  CVector z_;
};

using SingleSiteQFIM = RMatrix;

struct CostValue {
  bool singular = false;
  double value = 0.0;  // Tr(f^-1); +inf when singular
  double det = 0.0;
};

struct OptimizerConfig {
  int restarts = 64;
  double penalty = 1e4;
  int continuation_rounds = 3;  // penalty doubled on each round
  double residual_tol = 1e-8;
  double stability_tol = 1e-9;
  double regularity_eps = 1e-8;
  std::uint64_t seed = 2024;
};

struct OptimizationResult {
  std::optional<PureState> state;
  SingleSiteQFIM qfim;
  CostValue cost;
  double commutativity_residual = 0.0;
  int restarts_used = 0;
  int feasible_restarts = 0;
  bool converged = false;
  bool feasible() const { return state.has_value() && !cost.singular; }
};

/// f_ab = 4 [<(s_a s_b + s_b s_a)/2> - <s_a><s_b>].
SingleSiteQFIM qfim(const PureState& state, const SensingTask& task);

/// max over encoder pairs of |<phi|[s_a, s_b]|phi>|.
double commutativity_residual(const PureState& state, const SensingTask& task);

/// Tr(f^-1) when det f > regularity_eps, singular otherwise.
CostValue cost(const SingleSiteQFIM& f, double regularity_eps = 1e-8);

OptimizationResult optimize_probe(const SensingTask& task, const OptimizerConfig& config = {});

/// Hyperspherical map from 2d-2 reals to a gauge-fixed normalised state.
CVector state_from_parameters(int d, const std::vector<double>& params);

}  // namespace qsq
