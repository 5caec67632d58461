#pragma once

// SU(d) generator basis, spin-S operators and the small amount of operator
// algebra every other module builds on.
//
// Basis convention (used everywhere in the library): computational index
// mu = 0..d-1 holds the s_z eigenstate with m = S - mu, i.e. the highest
// weight comes first. For d = 3 this gives s_z = diag(1, 0, -1).

#include <array>
#include <string>
#include <vector>

#include "qsq/types.hpp"

namespace qsq {

inline constexpr int kMaxLocalDim = 16;

/// Dense Hermitian matrix. Construction checks Hermiticity.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(CMatrix m, double tol = 1e-12);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cd operator()(int i, int j) const { return m_(i, j); }

  /// Largest |m(i,j) - conj(m(j,i))|.
  static double hermiticity_defect(const CMatrix& m);

 private:
  CMatrix m_;
};

class GellMannBasis {
 public:
  int d() const { return d_; }
  int size() const { return static_cast<int>(generators_.size()); }
  const HermitianOperator& operator[](int a) const { return generators_[a]; }
  const std::vector<HermitianOperator>& generators() const { return generators_; }
  const std::string& label(int a) const { return labels_[a]; }

  // 1-based level indices, matching the lambda_{mu nu}, g_{mu nu}, h_mu names.
  int lambda_index(int mu, int nu) const;
  int g_index(int mu, int nu) const;
  int h_index(int mu) const;

 private:
  friend GellMannBasis gellmann_basis(int d);
  int d_ = 0;
  std::vector<HermitianOperator> generators_;
  std::vector<std::string> labels_;
};

/// f_abc with [lambda_a, lambda_b] = 2i sum_c f_abc lambda_c.
class StructureConstants {
 public:
  struct Entry {
    int a, b, c;
    double value;
  };

  int d() const { return d_; }
  int size() const { return n_; }
  double operator()(int a, int b, int c) const { return f_[(a * n_ + b) * n_ + c]; }
  /// Every nonzero (a, b, c) triple, all orderings included.
  const std::vector<Entry>& nonzeros() const { return nonzeros_; }
  /// Largest imaginary part dropped while extracting f.
  double imaginary_residue() const { return imag_residue_; }

 private:
  friend StructureConstants structure_constants(const GellMannBasis& basis);
  int d_ = 0;
  int n_ = 0;
  std::vector<double> f_;
  std::vector<Entry> nonzeros_;
  double imag_residue_ = 0.0;
};

struct SpinOperators {
  HermitianOperator x, y, z;
  const HermitianOperator& operator[](int axis) const;
};

/// Coefficients of a Hermitian operator on {identity, lambda_a}.
struct BasisExpansion {
  double identity = 0.0;
  RVector coeffs;
};

GellMannBasis gellmann_basis(int d);
SpinOperators spin_operators(int d);

BasisExpansion expand_in_basis(const HermitianOperator& op, const GellMannBasis& basis);
BasisExpansion expand_in_basis(const CMatrix& op, const GellMannBasis& basis);
HermitianOperator reconstruct(const BasisExpansion& e, const GellMannBasis& basis);

/// i[a, b]; Hermitian whenever a and b are.
HermitianOperator commutator(const HermitianOperator& a, const HermitianOperator& b);
/// {a, b} = ab + ba.
HermitianOperator anticommutator(const HermitianOperator& a, const HermitianOperator& b);

/// Plain [a, b] without the factor i.
CMatrix bracket(const CMatrix& a, const CMatrix& b);

StructureConstants structure_constants(const GellMannBasis& basis);

/// Frobenius norm of ([lambda_a, lambda_b] - 2i sum_c f_abc lambda_c), maximised over a, b.
double structure_reconstruction_residual(const GellMannBasis& basis, const StructureConstants& f);

void check_local_dim(int d);

}  // namespace qsq
