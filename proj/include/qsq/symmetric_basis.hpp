#pragma once

// Occupation-number basis of the permutation-symmetric sector of N qudits.
// A basis state is (n_0..n_{d-1}) with sum n = N, n_mu counting sites in
// local level mu.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qsq/kernels.hpp"

namespace qsq {

class SymmetricBasis {
 public:
  SymmetricBasis(int n_sites, int d);

  int n_sites() const { return n_sites_; }
  int d() const { return d_; }
  std::size_t size() const { return count_; }

  /// Pointer to the d occupations of basis state i.
  const std::uint16_t* occupation(std::size_t i) const { return &occ_[i * d_]; }
  /// Index of an occupation tuple; throws if it is not in the basis.
  std::size_t index(const std::uint16_t* n) const;

  /// Sum_j a^(j) as sum_{mu nu} a(mu,nu) adag_mu a_nu.
  SparseMatrix one_body(const CMatrix& a) const;

  /// |phi>^N in this basis: sqrt(N!/prod n!) prod z_mu^n_mu.
  CVector product_state(const CVector& z) const;

  /// Diagonal value of sum_j diag(a)^(j), i.e. sum_mu a_mu n_mu.
  double diagonal_sum(std::size_t i, const RVector& local) const;

  /// Dimension binom(N+d-1, d-1).
  static std::size_t dimension(int n_sites, int d);

 private:
  std::uint64_t key(const std::uint16_t* n) const;

  int n_sites_;
  int d_;
  std::size_t count_ = 0;
  std::vector<std::uint16_t> occ_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

}  // namespace qsq
