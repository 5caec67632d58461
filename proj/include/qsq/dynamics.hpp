#pragma once

// Exact N-qudit dynamics on two backends: the full tensor-product space
// (DENSE) and the permutation-symmetric occupation basis (SYMMETRIC).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsq/kernels.hpp"
#include "qsq/readout.hpp"
#include "qsq/symmetric_basis.hpp"

namespace qsq {

enum class Backend { Dense, Symmetric };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

inline constexpr std::size_t kDenseLimit = 2'000'000;
inline constexpr std::size_t kMaterializeLimit = 10'000;

class Ensemble {
 public:
  static Ensemble dense(int n_sites, int d);
  static Ensemble symmetric(int n_sites, int d);

  Backend backend() const { return backend_; }
  int n_sites() const { return n_sites_; }
  int d() const { return d_; }
  std::size_t dimension() const { return dim_; }
  /// Occupation basis; null for DENSE.
  const SymmetricBasis* basis() const { return basis_.get(); }

  /// Value of sum_j diag^(j) on basis state i, for a diagonal single-site operator.
  double diagonal_sum(std::size_t i, const RVector& local) const;

  bool operator==(const Ensemble& o) const {
    return backend_ == o.backend_ && n_sites_ == o.n_sites_ && d_ == o.d_;
  }

 private:
  Backend backend_ = Backend::Dense;
  int n_sites_ = 0;
  int d_ = 0;
  std::size_t dim_ = 0;
  std::shared_ptr<const SymmetricBasis> basis_;
};

struct EnsembleState {
  Ensemble ensemble;
  CVector amplitudes;
  double time = 0.0;

  double norm() const;
};

/// |phi>^N on the given backend.
EnsembleState product_state(const Ensemble& ensemble, const PureState& phi);

/// Sum_j a^(j) represented on a backend.
class CollectiveOperator {
 public:
  CollectiveOperator(const Ensemble& ensemble, const CMatrix& single_site);

  const CMatrix& single_site() const { return a_; }
  const Ensemble& ensemble() const { return ensemble_; }
  /// y = A x
  void apply(const CVector& x, CVector& y) const;
  /// Explicit matrix: the one-body matrix on SYMMETRIC, the Kronecker sum on DENSE.
  SparseMatrix matrix() const;

 private:
  Ensemble ensemble_;
  CMatrix a_;
  std::optional<SparseMatrix> sparse_;
};

struct CustomTerm {
  std::vector<int> sites;  // one or two sites
  HermitianOperator op;    // d x d or d^2 x d^2 (first listed site is the left factor)
};

struct HamiltonianSpec {
  enum class Variant { OAT, TAT, XY, Custom };
  Variant variant = Variant::TAT;
  double chi = 1.0;
  /// Axes summed in OAT: -chi sum_a S_a^2.
  std::string oat_axes = "xy";
  double J0 = 1.0;
  double gamma = 0.0;
  double V0 = 0.0;
  std::vector<CustomTerm> custom;

  static HamiltonianSpec oat(double chi, std::string axes = "xy");
  static HamiltonianSpec tat(double chi);
  static HamiltonianSpec xy(double J0, double gamma, double V0);
};

std::string to_string(HamiltonianSpec::Variant v);

/// Site-resolved term list: sum_i local^(i) + sum_sites local_site + sum_groups sum_{i<j} w_ij K^(ij).
struct TermList {
  struct PairGroup {
    /// kernel = sum_p first_p (x) second_p; swap-symmetric for collective Hamiltonians.
    std::vector<std::pair<CMatrix, CMatrix>> factors;
    CMatrix kernel;   // d^2 x d^2
    RMatrix weights;  // N x N, upper triangle used
  };
  struct SiteTerm {
    int site;
    CMatrix op;
  };
  struct TwoSiteTerm {
    int i, j;
    CMatrix op;
  };
  CMatrix uniform_local;  // applied on every site; may be empty
  std::vector<SiteTerm> site_terms;
  std::vector<PairGroup> pair_groups;
  std::vector<TwoSiteTerm> two_site_terms;
};

TermList expand_terms(const HamiltonianSpec& spec, int n_sites, int d, const ReadoutSet* readout);

/// J0 / |i-j|^gamma for i != j, zero on the diagonal (open chain).
RMatrix power_law_couplings(int n_sites, double J0, double gamma);

class Hamiltonian {
 public:
  const Ensemble& ensemble() const { return ensemble_; }
  /// y = H x
  void apply(const CVector& x, CVector& y) const;
  void apply_serial(const CVector& x, CVector& y) const;
  bool materialized() const { return sparse_.has_value(); }
  const SparseMatrix& sparse() const;
  /// Sparse matrix, built on demand when the operator is lazy (up to `limit` amplitudes).
  SparseMatrix to_sparse(std::size_t limit = 250'000) const;

 private:
  friend Hamiltonian build_hamiltonian(const HamiltonianSpec&, const Ensemble&, const ReadoutSet*);
  Ensemble ensemble_;
  std::optional<SparseMatrix> sparse_;
  TermList terms_;
};

/// TAT needs `readout` (for l_a and s_a). XY with gamma > 0 on SYMMETRIC is rejected.
Hamiltonian build_hamiltonian(const HamiltonianSpec& spec, const Ensemble& ensemble,
                              const ReadoutSet* readout = nullptr);

/// ||[H, S_z]||_F.
double sz_commutator_norm(const Hamiltonian& h);

struct KrylovOptions {
  int subspace = 30;
  double tolerance = 1e-10;  // per step
  double min_step = 1e-12;
};

struct EvolutionStats {
  int steps = 0;
  int matvecs = 0;
  double max_error_estimate = 0.0;
};

using SnapshotCallback = std::function<void(const EnsembleState&)>;

/// Streams exp(-iH t_k)|psi> for each t_k (t grid strictly increasing, t_0 >= state.time).
EvolutionStats evolve(const EnsembleState& state, const Hamiltonian& h, const std::vector<double>& t_grid,
                      const SnapshotCallback& on_snapshot, const KrylovOptions& options = {});

std::vector<EnsembleState> evolve(const EnsembleState& state, const Hamiltonian& h,
                                  const std::vector<double>& t_grid, const KrylovOptions& options = {});

/// <psi|O|psi> for a collective operator.
cd expectation(const EnsembleState& state, const CollectiveOperator& op);
/// <psi|A B|psi>.
cd expectation(const EnsembleState& state, const CollectiveOperator& a, const CollectiveOperator& b);
/// <psi|H|psi>.
double energy(const EnsembleState& state, const Hamiltonian& h);

/// Collective readout operators (L_a, S_a) and transduction sums on one backend.
class CollectiveReadout {
 public:
  CollectiveReadout(const Ensemble& ensemble, const ReadoutSet& readout);
  const ReadoutSet& readout() const { return readout_; }
  ReadoutMoments moments(const EnsembleState& state) const;
  /// <-i[S_a, S_b]> for the self-consistent G(kappa) variant.
  RMatrix spin_commutators(const EnsembleState& state) const;

 private:
  Ensemble ensemble_;
  ReadoutSet readout_;
  std::vector<CollectiveOperator> ops_;                 // l_1..l_k, s_1..s_k
  std::vector<std::vector<CollectiveOperator>> g_ops_;  // g_ab
};

/// C and G of the readout on a many-body state.
ReadoutMoments collective_expectations(const EnsembleState& state, const ReadoutSet& readout);

/// <SWAP_ij> on a DENSE state.
cd swap_expectation(const EnsembleState& state, int i, int j);

/// N (Delta S_y)^2 / <S_z>^2 using the spin operators of the state's local dimension.
Xi2Value wineland_xi2(const EnsembleState& state);

/// Binary amplitudes preceded by one JSON header line {backend, N, d, t, dim}.
void export_snapshot(const std::string& path, const EnsembleState& state);
EnsembleState import_snapshot(const std::string& path);

}  // namespace qsq
