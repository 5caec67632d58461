#include "qsq/kernels.hpp"

#include <vector>

namespace qsq {

std::size_t checked_power(int base, int exponent, std::size_t limit) {
  std::size_t v = 1;
  for (int i = 0; i < exponent; ++i) {
    if (v > limit / static_cast<std::size_t>(base)) throw Error("state space exceeds the supported size");
    v *= static_cast<std::size_t>(base);
  }
  return v;
}

namespace kernels {

namespace {

inline cd row_dot(const SparseMatrix& a, Eigen::Index r, const cd* x) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const cd* val = a.valuePtr();
  cd acc = 0.0;
  for (int p = outer[r]; p < outer[r + 1]; ++p) acc += val[p] * x[inner[p]];
  return acc;
}

std::vector<std::size_t> strides(int n_sites, int d) {
  std::vector<std::size_t> s(n_sites);
  std::size_t v = 1;
  for (int j = n_sites - 1; j >= 0; --j) {
    s[j] = v;
    v *= static_cast<std::size_t>(d);
  }
  return s;
}

inline cd local_sum_element(std::size_t idx, int n_sites, int d, const std::vector<std::size_t>& st,
                            const cd* a, const cd* x) {
  cd acc = 0.0;
  for (int j = 0; j < n_sites; ++j) {
    const int digit = static_cast<int>((idx / st[j]) % d);
    const std::size_t base = idx - digit * st[j];
    // a is column-major: a(digit, b) = a[digit + b*d]
    for (int b = 0; b < d; ++b) acc += a[digit + b * d] * x[base + b * st[j]];
  }
  return acc;
}

struct PairEntry {
  int i, j;
  double w;
};

std::vector<PairEntry> pair_list(int n_sites, const RMatrix& weights) {
  std::vector<PairEntry> pairs;
  for (int i = 0; i < n_sites; ++i) {
    for (int j = i + 1; j < n_sites; ++j) {
      if (weights(i, j) != 0.0) pairs.push_back({i, j, weights(i, j)});
    }
  }
  return pairs;
}

inline cd pair_sum_element(std::size_t idx, int d, const std::vector<std::size_t>& st,
                           const std::vector<PairEntry>& pairs, const CMatrix& kernel, const cd* x) {
  const int dd = d * d;
  cd acc = 0.0;
  for (const PairEntry& p : pairs) {
    const int di = static_cast<int>((idx / st[p.i]) % d);
    const int dj = static_cast<int>((idx / st[p.j]) % d);
    const std::size_t base = idx - di * st[p.i] - dj * st[p.j];
    const int row = di * d + dj;
    cd part = 0.0;
    for (int col = 0; col < dd; ++col) {
      const cd k = kernel(row, col);
      if (k == 0.0) continue;
      part += k * x[base + (col / d) * st[p.i] + (col % d) * st[p.j]];
    }
    acc += p.w * part;
  }
  return acc;
}

}  // namespace

void csr_matvec(const SparseMatrix& a, const cd* x, cd* y) {
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r) y[r] = row_dot(a, r, x);
}

void csr_matvec_serial(const SparseMatrix& a, const cd* x, cd* y) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) y[r] = row_dot(a, r, x);
}

void local_sum_apply(int n_sites, int d, const CMatrix& a, const cd* x, cd* y) {
  const auto st = strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  const cd* ap = a.data();
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += local_sum_element(idx, n_sites, d, st, ap, x);
}

void local_sum_apply_serial(int n_sites, int d, const CMatrix& a, const cd* x, cd* y) {
  const auto st = strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += local_sum_element(idx, n_sites, d, st, a.data(), x);
}

void site_apply(int n_sites, int d, int site, const CMatrix& op, const cd* x, cd* y) {
  const auto st = strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  const std::size_t s = st[site];
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const int digit = static_cast<int>((idx / s) % d);
    const std::size_t base = idx - digit * s;
    cd acc = 0.0;
    for (int b = 0; b < d; ++b) acc += op(digit, b) * x[base + b * s];
    y[idx] += acc;
  }
}

void pair_sum_apply(int n_sites, int d, const CMatrix& kernel, const RMatrix& weights, const cd* x, cd* y) {
  const auto st = strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  const auto pairs = pair_list(n_sites, weights);
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += pair_sum_element(idx, d, st, pairs, kernel, x);
}

void pair_sum_apply_serial(int n_sites, int d, const CMatrix& kernel, const RMatrix& weights, const cd* x,
                           cd* y) {
  const auto st = strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  const auto pairs = pair_list(n_sites, weights);
  for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += pair_sum_element(idx, d, st, pairs, kernel, x);
}

cd dot(const cd* a, const cd* b, std::size_t n) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<cd> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
    cd acc = 0.0;
    for (std::size_t i = c * kReductionChunk; i < end; ++i) acc += std::conj(a[i]) * b[i];
    partial[c] = acc;
  }
  cd total = 0.0;
  for (const cd& p : partial) total += p;
  return total;
}

cd dot_serial(const cd* a, const cd* b, std::size_t n) {
  cd total = 0.0;
  for (std::size_t c = 0; c * kReductionChunk < n; ++c) {
    const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
    cd acc = 0.0;
    for (std::size_t i = c * kReductionChunk; i < end; ++i) acc += std::conj(a[i]) * b[i];
    total += acc;
  }
  return total;
}

}  // namespace kernels
}  // namespace qsq
