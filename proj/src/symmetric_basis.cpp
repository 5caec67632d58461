#include "qsq/symmetric_basis.hpp"

#include <cmath>

#include "qsq/sud_algebra.hpp"

namespace qsq {

namespace {

constexpr std::size_t kMaxSymmetricDim = 50'000'000;

void enumerate(int level, int remaining, int d, std::vector<std::uint16_t>& current,
               std::vector<std::uint16_t>& out) {
  if (level == d - 1) {
    current[level] = static_cast<std::uint16_t>(remaining);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    current[level] = static_cast<std::uint16_t>(n);
    enumerate(level + 1, remaining - n, d, current, out);
  }
}

}  // namespace

std::size_t SymmetricBasis::dimension(int n_sites, int d) {
  // binom(N+d-1, d-1) accumulated exactly
  std::size_t v = 1;
  for (int i = 1; i < d; ++i) {
    v = v * static_cast<std::size_t>(n_sites + i) / static_cast<std::size_t>(i);
    if (v > kMaxSymmetricDim) throw Error("symmetric subspace exceeds the supported size");
  }
  return v;
}

SymmetricBasis::SymmetricBasis(int n_sites, int d) : n_sites_(n_sites), d_(d) {
  check_local_dim(d);
  if (n_sites < 1 || n_sites > 65535) throw Error("site count out of range for the symmetric backend");
  const double bits = d * std::log2(static_cast<double>(n_sites) + 1.0);
  if (bits > 63.0) throw Error("occupation key does not fit in 64 bits for this (N, d)");
  count_ = dimension(n_sites, d);
  occ_.reserve(count_ * d);
  std::vector<std::uint16_t> current(d);
  enumerate(0, n_sites, d, current, occ_);
  lookup_.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) lookup_.emplace(key(occupation(i)), i);
}

std::uint64_t SymmetricBasis::key(const std::uint16_t* n) const {
  std::uint64_t k = 0;
  for (int mu = 0; mu < d_; ++mu) k = k * static_cast<std::uint64_t>(n_sites_ + 1) + n[mu];
  return k;
}

std::size_t SymmetricBasis::index(const std::uint16_t* n) const {
  const auto it = lookup_.find(key(n));
  if (it == lookup_.end()) throw Error("occupation tuple not in the symmetric basis");
  return it->second;
}

SparseMatrix SymmetricBasis::one_body(const CMatrix& a) const {
  if (a.rows() != d_ || a.cols() != d_) throw DimensionMismatch("one-body operator dimension");
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(count_ * (d_ + 1));
  std::vector<std::uint16_t> m(d_);
  for (std::size_t col = 0; col < count_; ++col) {
    const std::uint16_t* n = occupation(col);
    cd diag = 0.0;
    for (int mu = 0; mu < d_; ++mu) diag += a(mu, mu) * static_cast<double>(n[mu]);
    if (diag != 0.0) trip.emplace_back(static_cast<int>(col), static_cast<int>(col), diag);
    for (int nu = 0; nu < d_; ++nu) {
      if (n[nu] == 0) continue;
      for (int mu = 0; mu < d_; ++mu) {
        if (mu == nu || a(mu, nu) == 0.0) continue;
        std::copy(n, n + d_, m.begin());
        --m[nu];
        ++m[mu];
        const double amp = std::sqrt(static_cast<double>(n[nu]) * (n[mu] + 1.0));
        trip.emplace_back(static_cast<int>(index(m.data())), static_cast<int>(col), a(mu, nu) * amp);
      }
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(count_), static_cast<Eigen::Index>(count_));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

CVector SymmetricBasis::product_state(const CVector& z) const {
  if (z.size() != d_) throw DimensionMismatch("product state dimension");
  CVector psi(count_);
  const double log_nfact = std::lgamma(n_sites_ + 1.0);
  for (std::size_t i = 0; i < count_; ++i) {
    const std::uint16_t* n = occupation(i);
    double log_mag = log_nfact;
    double phase = 0.0;
    bool zero = false;
    for (int mu = 0; mu < d_; ++mu) {
      if (n[mu] == 0) continue;
      if (z[mu] == 0.0) {
        zero = true;
        break;
      }
      log_mag += -std::lgamma(n[mu] + 1.0) + 2.0 * n[mu] * std::log(std::abs(z[mu]));
      phase += n[mu] * std::arg(z[mu]);
    }
    psi[i] = zero ? cd(0.0) : std::polar(std::exp(0.5 * log_mag), phase);
  }
  return psi;
}

double SymmetricBasis::diagonal_sum(std::size_t i, const RVector& local) const {
  const std::uint16_t* n = occupation(i);
  double v = 0.0;
  for (int mu = 0; mu < d_; ++mu) v += local[mu] * n[mu];
  return v;
}

}  // namespace qsq
