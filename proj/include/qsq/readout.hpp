#pragma once

// QFIM-selected readout: SLD operators l_a = -i[s_a, rho], transduction
// operators g_ab = -i[s_a, l_b], and the squeezing parameters built from the
// collective covariance C and transduction matrix G.

#include <array>
#include <limits>
#include <vector>

#include "qsq/qfim_opt.hpp"

namespace qsq {

struct ReadoutSet {
  SensingTask task;
  PureState reference;
  CMatrix rho;
  std::vector<HermitianOperator> slds;
  /// transduction[a][b] = -i[s_a, l_b]
  std::vector<std::vector<HermitianOperator>> transduction;
  SingleSiteQFIM reference_qfim;
  /// Tr(f^-1) of the reference state; +inf when its QFIM is singular.
  double sql_cost = std::numeric_limits<double>::infinity();

  int k() const { return task.k(); }
  int d() const { return task.d(); }
};

ReadoutSet build_readout(const PureState& state, const SensingTask& task);

/// Frobenius residuals of [s,l]-2ig, [g,s]-2il, [l,g]-2is for each axis.
/// `normalized` repeats them for the triple (s, l, g/2).
struct Su2Residuals {
  std::vector<std::array<double, 3>> per_axis;
  std::vector<std::array<double, 3>> normalized;
  double max() const;
  double normalized_max() const;
};

Su2Residuals su2_subalgebra_check(const ReadoutSet& readout);

/// First and symmetrised second moments of (L_1..L_k, S_1..S_k) plus G.
struct ReadoutMoments {
  int n_sites = 0;
  int k = 0;
  RVector mean;  // 2k
  RMatrix cov;   // 2k x 2k, Cov about the mean with {A,B}/2 second moments
  RMatrix G;     // k x k, G(a,b) = <sum_j -i[s_a, l_b]>

  RMatrix C() const { return cov.topLeftCorner(k, k); }
  /// Covariance of Q_a(kappa) = cos(kappa) L_a - sin(kappa) S_a.
  RMatrix C(double kappa) const;
};

/// Readout moments of |phi>^N computed from single-site expectations alone.
ReadoutMoments product_moments(const ReadoutSet& readout, int n_sites);

/// The 2k single-site operators (l_1..l_k, s_1..s_k) whose sums enter ReadoutMoments.
std::vector<CMatrix> moment_operators(const ReadoutSet& readout);

struct Xi2Value {
  bool singular = false;
  double value = std::numeric_limits<double>::infinity();
};

/// Tr[(G^T)^-1 C G^-1]; singular when |det G| <= 1e-10 ||G||^k.
Xi2Value error_propagation_variance(const RMatrix& C, const RMatrix& G);

/// xi^2 = N Tr[(G^T)^-1 C G^-1] / Tr(f_opt^-1).
Xi2Value xi2_general(const RMatrix& C, const RMatrix& G, double sql_cost, int n_sites);

struct KappaScanConfig {
  int grid = 256;
  double tolerance = 1e-6;  // golden-section bracket width, radians
  /// Use G(kappa) = cos(kappa) G - sin(kappa) <-i[S_a, S_b]> instead of the fixed G.
  bool self_consistent_g = false;
};

struct KappaScanResult {
  double kappa_opt = 0.0;
  Xi2Value xi2;
  Xi2Value xi2_at_zero;
};

/// Minimum over kappa of N Tr[(G^T)^-1 C(kappa) G^-1] / Tr(f^-1): grid on [0, 2pi), golden-section refine.
KappaScanResult xi2_kappa_scan(const ReadoutMoments& moments, double sql_cost,
                               const KappaScanConfig& config = {},
                               const RMatrix& spin_commutators = RMatrix());

/// N (Delta S_y)^2 / <S_z>^2; singular when |<S_z>| <= 1e-12 N.
Xi2Value wineland_xi2(double variance_sy, double mean_sz, int n_sites);

/// (8N/3) Tr[(G^T)^-1 C G^-1] for the d = 5 three-axis probe.
Xi2Value vector_xi2(const RMatrix& C, const RMatrix& G, int n_sites);

struct SqueezingRecord {
  double time = 0.0;
  RMatrix C;
  RMatrix G;
  double kappa_opt = 0.0;
  double xi2 = std::numeric_limits<double>::infinity();
  bool singular = false;
  double xi2_err = std::numeric_limits<double>::quiet_NaN();
};

/// `spin_commutators` is only read when config.self_consistent_g is set.
SqueezingRecord make_record(double time, const ReadoutMoments& moments, double sql_cost,
                            const KappaScanConfig& config = {}, const RMatrix& spin_commutators = RMatrix());

}  // namespace qsq
