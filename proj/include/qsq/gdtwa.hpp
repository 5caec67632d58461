#pragma once

// Generalized discrete truncated Wigner approximation: per-generator
// eigenvalue sampling of a product state and mean-field trajectories of the
// site-resolved generalized Bloch vectors.

#include <cstdint>
#include <vector>

#include "qsq/dynamics.hpp"
#include "qsq/readout.hpp"
#include "qsq/sud_algebra.hpp"

namespace qsq {

/// One trajectory: N x (d^2-1), row j is the Bloch vector of site j.
using PhasePoint = RMatrix;

struct GdtwaConfig {
  int n_traj = 2000;
  std::uint64_t master_seed = 1;
  double dt = 1e-3;
  /// Output times; strictly increasing, first >= 0.
  std::vector<double> t_grid;
  int jackknife_blocks = 40;
  /// Run the dt/2 comparison before the production run.
  bool validate_dt = true;
  int probe_traj = 64;
  double probe_tolerance = 1e-3;
  KappaScanConfig kappa;
};

/// Generator-basis form of a Hamiltonian: static on-site fields plus bilinear couplings.
class MeanFieldModel {
 public:
  MeanFieldModel(const TermList& terms, int n_sites, int d);

  int n_sites() const { return n_; }
  int d() const { return d_; }
  int generators() const { return dim_; }

  /// dv/dt for one phase point.
  RMatrix rhs(const PhasePoint& v) const;
  /// Batched: v holds T phase points side by side (N x T*D); writes dv in the same layout.
  void rhs_batch(const RMatrix& v, RMatrix& dv) const;
  void rhs_batch_serial(const RMatrix& v, RMatrix& dv) const;

  /// Effective field B^(j) for one phase point (N x D).
  RMatrix field(const PhasePoint& v) const;

 private:
  struct Group {
    RMatrix weights;  // symmetric, zero diagonal
    bool uniform = false;
    double uniform_weight = 0.0;
    bool symmetric = true;
    // symmetric coupling M = U diag(mu) U^T
    RMatrix u;
    RVector mu;
    // general coupling M = P diag(sigma) Q^T, i<j with the left factor on i
    RMatrix p, q;
    RVector sigma;
    RMatrix lower, upper;  // strict triangles of `weights`
  };
  struct Pair {
    int i, j;
    RMatrix m;  // D x D, coefficient of lambda_a^(i) lambda_b^(j)
  };
  void fields_batch(const RMatrix& v, RMatrix& b) const;
  void contract(const RMatrix& b, const RMatrix& v, RMatrix& dv, bool parallel) const;

  int n_ = 0, d_ = 0, dim_ = 0;
  RMatrix static_field_;  // N x D
  std::vector<Group> groups_;
  std::vector<Pair> pairs_;
  std::vector<StructureConstants::Entry> f_;
};

/// Coefficients of K on lambda_a (x) lambda_b, lambda_a (x) I, I (x) lambda_b and I (x) I.
struct KernelExpansion {
  RMatrix bilinear;
  RVector left, right;
  double constant = 0.0;
};
KernelExpansion expand_kernel(const CMatrix& kernel, const GellMannBasis& basis);

/// Discrete Wigner sample: for each site and generator, an eigenvalue drawn with Born weights.
std::vector<PhasePoint> sample_initial(const PureState& state, int n_sites, int n_traj, std::uint64_t seed);
PhasePoint sample_trajectory(const PureState& state, int n_sites, std::uint64_t master_seed, std::uint64_t index);

/// Fixed-step RK4 from t0 to t1 with step at most dt.
void rk4_integrate(const MeanFieldModel& model, PhasePoint& v, double t0, double t1, double dt);

struct GdtwaRecord {
  SqueezingRecord record;
  RVector mean;       // trajectory means of (L_1..L_k, S_1..S_k)
  double sz_total = 0.0;
};

struct GdtwaResult {
  std::vector<GdtwaRecord> records;
  int blocks = 0;
  double probe_change = 0.0;  // max relative xi^2 change under dt/2; 0 when not run
};

/// t = 0 moment estimate from n_traj samples without evolution.
ReadoutMoments sampled_moments(const PureState& state, const ReadoutSet& readout, int n_sites, int n_traj,
                               std::uint64_t seed);

GdtwaResult run_gdtwa(const GdtwaConfig& config, const HamiltonianSpec& spec, int n_sites, const ReadoutSet& readout);

}  // namespace qsq
