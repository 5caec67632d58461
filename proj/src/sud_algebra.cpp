#include "qsq/sud_algebra.hpp"

#include <cmath>

namespace qsq {

void check_local_dim(int d) {
  if (d < 2 || d > kMaxLocalDim) {
    throw InvalidDimension("local dimension must be in [2, " + std::to_string(kMaxLocalDim) +
                           "], got " + std::to_string(d));
  }
}

double HermitianOperator::hermiticity_defect(const CMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  return worst;
}

HermitianOperator::HermitianOperator(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionMismatch("operator matrix must be square");
  const double defect = hermiticity_defect(m_);
  if (defect > tol) {
    throw Error("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
}

const HermitianOperator& SpinOperators::operator[](int axis) const {
  switch (axis) {
    case 0: return x;
    case 1: return y;
    case 2: return z;
    default: throw Error("spin axis must be 0, 1 or 2");
  }
}

GellMannBasis gellmann_basis(int d) {
  check_local_dim(d);
  GellMannBasis basis;
  basis.d_ = d;
  const int n = d * d - 1;
  basis.generators_.reserve(n);
  basis.labels_.reserve(n);

  for (int mu = 0; mu < d; ++mu) {
    for (int nu = mu + 1; nu < d; ++nu) {
      CMatrix m = CMatrix::Zero(d, d);
      m(mu, nu) = 1.0;
      m(nu, mu) = 1.0;
      basis.generators_.emplace_back(std::move(m));
      basis.labels_.push_back("lambda_" + std::to_string(mu + 1) + std::to_string(nu + 1));
    }
  }
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = mu + 1; nu < d; ++nu) {
      CMatrix m = CMatrix::Zero(d, d);
      m(mu, nu) = -kI;
      m(nu, mu) = kI;
      basis.generators_.emplace_back(std::move(m));
      basis.labels_.push_back("g_" + std::to_string(mu + 1) + std::to_string(nu + 1));
    }
  }
  for (int mu = 1; mu < d; ++mu) {
    CMatrix m = CMatrix::Zero(d, d);
    const double norm = std::sqrt(2.0 / (mu * (mu + 1.0)));
    for (int k = 0; k < mu; ++k) m(k, k) = norm;
    m(mu, mu) = -mu * norm;
    basis.generators_.emplace_back(std::move(m));
    basis.labels_.push_back("h_" + std::to_string(mu));
  }
  return basis;
}

namespace {

// Position of the pair (mu, nu), 0-based, mu < nu, in row-major upper-triangle order.
int pair_offset(int d, int mu, int nu) {
  return mu * d - mu * (mu + 1) / 2 + (nu - mu - 1);
}

}  // namespace

int GellMannBasis::lambda_index(int mu, int nu) const {
  if (!(1 <= mu && mu < nu && nu <= d_)) throw Error("lambda index requires 1 <= mu < nu <= d");
  return pair_offset(d_, mu - 1, nu - 1);
}

int GellMannBasis::g_index(int mu, int nu) const {
  if (!(1 <= mu && mu < nu && nu <= d_)) throw Error("g index requires 1 <= mu < nu <= d");
  return d_ * (d_ - 1) / 2 + pair_offset(d_, mu - 1, nu - 1);
}

int GellMannBasis::h_index(int mu) const {
  if (!(1 <= mu && mu < d_)) throw Error("h index requires 1 <= mu <= d-1");
  return d_ * (d_ - 1) + (mu - 1);
}

SpinOperators spin_operators(int d) {
  check_local_dim(d);
  const double spin = 0.5 * (d - 1);
  CMatrix raise = CMatrix::Zero(d, d);
  CMatrix sz = CMatrix::Zero(d, d);
  for (int mu = 0; mu < d; ++mu) {
    const double m = spin - mu;
    sz(mu, mu) = m;
    if (mu > 0) raise(mu - 1, mu) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
  }
  const CMatrix lower = raise.adjoint();
  CMatrix sx = 0.5 * (raise + lower);
  CMatrix sy = (raise - lower) / (2.0 * kI);
  return SpinOperators{HermitianOperator(std::move(sx)), HermitianOperator(std::move(sy)),
                       HermitianOperator(std::move(sz))};
}

BasisExpansion expand_in_basis(const CMatrix& op, const GellMannBasis& basis) {
  if (op.rows() != basis.d() || op.cols() != basis.d()) {
    throw DimensionMismatch("operator dimension " + std::to_string(op.rows()) +
                            " does not match basis dimension " + std::to_string(basis.d()));
  }
  BasisExpansion e;
  e.identity = op.trace().real() / basis.d();
  e.coeffs.resize(basis.size());
  for (int a = 0; a < basis.size(); ++a) {
    // Tr(op lambda_a) without forming the product.
    e.coeffs[a] = 0.5 * (op.transpose().cwiseProduct(basis[a].matrix())).sum().real();
  }
  return e;
}

BasisExpansion expand_in_basis(const HermitianOperator& op, const GellMannBasis& basis) {
  return expand_in_basis(op.matrix(), basis);
}

HermitianOperator reconstruct(const BasisExpansion& e, const GellMannBasis& basis) {
  if (e.coeffs.size() != basis.size()) throw DimensionMismatch("expansion length mismatch");
  CMatrix m = e.identity * CMatrix::Identity(basis.d(), basis.d());
  for (int a = 0; a < basis.size(); ++a) m += e.coeffs[a] * basis[a].matrix();
  return HermitianOperator(std::move(m));
}

CMatrix bracket(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("commutator operands differ in dimension");
  }
  return a * b - b * a;
}

HermitianOperator commutator(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kI * bracket(a.matrix(), b.matrix()));
}

HermitianOperator anticommutator(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("anticommutator operands differ in dimension");
  return HermitianOperator(a.matrix() * b.matrix() + b.matrix() * a.matrix());
}

StructureConstants structure_constants(const GellMannBasis& basis) {
  StructureConstants f;
  f.d_ = basis.d();
  f.n_ = basis.size();
  const int n = f.n_;
  f.f_.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const CMatrix comm = bracket(basis[a].matrix(), basis[b].matrix());
      for (int c = 0; c < n; ++c) {
        const cd value = (comm * basis[c].matrix()).trace() / (4.0 * kI);
        f.imag_residue_ = std::max(f.imag_residue_, std::abs(value.imag()));
        const double re = std::abs(value.real()) < 1e-14 ? 0.0 : value.real();
        f.f_[(a * n + b) * n + c] = re;
        if (re != 0.0) f.nonzeros_.push_back({a, b, c, re});
      }
    }
  }
  return f;
}

double structure_reconstruction_residual(const GellMannBasis& basis, const StructureConstants& f) {
  double worst = 0.0;
  const int n = basis.size();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      CMatrix rebuilt = CMatrix::Zero(basis.d(), basis.d());
      for (int c = 0; c < n; ++c) rebuilt += 2.0 * kI * f(a, b, c) * basis[c].matrix();
      worst = std::max(worst, (bracket(basis[a].matrix(), basis[b].matrix()) - rebuilt).norm());
    }
  }
  return worst;
}

}  // namespace qsq
