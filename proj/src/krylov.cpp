#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qsq/dynamics.hpp"

namespace qsq {

namespace {

struct LanczosBasis {
  CMatrix v;         // dim x m, orthonormal columns
  RVector alpha;     // m
  RVector beta;      // m; beta[j] couples v_j and v_{j+1}
  int m = 0;
  bool invariant = false;
};

LanczosBasis lanczos(const Hamiltonian& h, const CVector& start, int max_dim, int& matvecs) {
  const Eigen::Index n = start.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
  LanczosBasis b;
  b.v.resize(n, m_max);
  b.alpha.resize(m_max);
  b.beta.setZero(m_max);
  b.v.col(0) = start / start.norm();
  CVector w;
  for (int j = 0; j < m_max; ++j) {
    h.apply(b.v.col(j), w);
    ++matvecs;
    b.alpha[j] = b.v.col(j).dot(w).real();
    // full reorthogonalisation, two passes
    for (int pass = 0; pass < 2; ++pass) {
      const CVector c = b.v.leftCols(j + 1).adjoint() * w;
      w.noalias() -= b.v.leftCols(j + 1) * c;
    }
    const double nb = w.norm();
    b.beta[j] = nb;
    b.m = j + 1;
    if (nb <= 1e-13 * std::max(1.0, std::abs(b.alpha[j]))) {
      b.invariant = true;
      break;
    }
    if (j + 1 < m_max) b.v.col(j + 1) = w / nb;
  }
  if (b.m == n) b.invariant = true;
  return b;
}

struct SmallExp {
  Eigen::SelfAdjointEigenSolver<RMatrix> eig;
  RVector q0;  // first row of the eigenvector matrix
  void init(const LanczosBasis& b) {
    RMatrix t = RMatrix::Zero(b.m, b.m);
    for (int j = 0; j < b.m; ++j) {
      t(j, j) = b.alpha[j];
      if (j + 1 < b.m) t(j, j + 1) = t(j + 1, j) = b.beta[j];
    }
    eig.compute(t);
    q0 = eig.eigenvectors().row(0).transpose();
  }
  CVector coeffs(double tau) const {
    const RVector& lam = eig.eigenvalues();
    CVector c(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) c[i] = std::polar(q0[i], -tau * lam[i]);
    return eig.eigenvectors().cast<cd>() * c;
  }
};

}  // namespace

EvolutionStats evolve(const EnsembleState& state, const Hamiltonian& h, const std::vector<double>& t_grid,
                      const SnapshotCallback& on_snapshot, const KrylovOptions& options) {
  if (!(state.ensemble == h.ensemble())) throw BackendMismatch("state and Hamiltonian live on different backends");
  if (options.subspace < 2) throw ConfigError("Krylov subspace needs at least two vectors");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if ((i == 0 && t_grid[0] < state.time) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw ConfigError("time grid must be strictly increasing and start at or after the state time");
    }
  }
  EvolutionStats stats;
  EnsembleState cur = state;
  double tau = 0.0;  // last accepted step, reused as the next trial

  for (double target : t_grid) {
    while (cur.time < target) {
      const double remaining = target - cur.time;
      const double nrm = cur.amplitudes.norm();
      LanczosBasis b = lanczos(h, cur.amplitudes, options.subspace, stats.matvecs);
      SmallExp se;
      se.init(b);
      double trial = tau > 0.0 ? std::min(remaining, 2.0 * tau) : remaining;
      double err = 0.0;
      CVector c;
      for (;;) {
        c = se.coeffs(trial);
        err = b.invariant ? 0.0 : b.beta[b.m - 1] * std::abs(c[b.m - 1]);
        if (err <= options.tolerance) break;
        trial *= 0.5;
        if (trial < options.min_step) {
          std::ostringstream msg;
          msg << "Krylov step controller failed at t=" << cur.time << ": step " << trial << " below minimum, error "
              << err << ", subspace " << b.m;
          throw NumericalFailure(msg.str());
        }
      }
      const bool hit_target = trial >= remaining;
      cur.amplitudes = nrm * (b.v.leftCols(b.m) * c);
      cur.time = hit_target ? target : cur.time + trial;
      if (!hit_target || trial > tau) tau = trial;
      stats.max_error_estimate = std::max(stats.max_error_estimate, err);
      ++stats.steps;
    }
    on_snapshot(cur);
  }
  return stats;
}

std::vector<EnsembleState> evolve(const EnsembleState& state, const Hamiltonian& h, const std::vector<double>& t_grid,
                                  const KrylovOptions& options) {
  std::vector<EnsembleState> out;
  out.reserve(t_grid.size());
  evolve(state, h, t_grid, [&](const EnsembleState& s) { out.push_back(s); }, options);
  return out;
}

}  // namespace qsq
