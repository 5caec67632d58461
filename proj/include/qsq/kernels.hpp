#pragma once

// Hot loops shared by the dynamics backends. Each kernel has an OpenMP
// version and a serial reference with the same arithmetic order per output
// element, so both give bit-identical results.
//
// Dense tensor-product layout: site 0 is the most significant base-d digit.

#include <cstddef>
#include <cstdint>

#include <Eigen/Sparse>

#include "qsq/types.hpp"

namespace qsq {

using SparseMatrix = Eigen::SparseMatrix<cd, Eigen::RowMajor>;

namespace kernels {

/// y = A x
void csr_matvec(const SparseMatrix& a, const cd* x, cd* y);
void csr_matvec_serial(const SparseMatrix& a, const cd* x, cd* y);

/// y += sum_j a^(j) x on n_sites qudits of dimension d.
void local_sum_apply(int n_sites, int d, const CMatrix& a, const cd* x, cd* y);
void local_sum_apply_serial(int n_sites, int d, const CMatrix& a, const cd* x, cd* y);

/// y += op^(site) x for a single site.
void site_apply(int n_sites, int d, int site, const CMatrix& op, const cd* x, cd* y);

/// y += sum_{i<j} w(i,j) K^(i,j) x, with K a d^2 x d^2 two-site kernel (site i is the
/// left tensor factor). Entries with w(i,j) == 0 are skipped.
void pair_sum_apply(int n_sites, int d, const CMatrix& kernel, const RMatrix& weights, const cd* x, cd* y);
void pair_sum_apply_serial(int n_sites, int d, const CMatrix& kernel, const RMatrix& weights, const cd* x,
                           cd* y);

/// sum_i conj(a_i) b_i with a fixed chunked reduction tree.
cd dot(const cd* a, const cd* b, std::size_t n);
cd dot_serial(const cd* a, const cd* b, std::size_t n);

inline constexpr std::size_t kReductionChunk = 4096;

}  // namespace kernels

std::size_t checked_power(int base, int exponent, std::size_t limit);

}  // namespace qsq
