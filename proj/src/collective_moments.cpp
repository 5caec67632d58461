#include "qsq/dynamics.hpp"

namespace qsq {

CollectiveReadout::CollectiveReadout(const Ensemble& ensemble, const ReadoutSet& readout)
    : ensemble_(ensemble), readout_(readout) {
  if (readout.d() != ensemble.d()) throw DimensionMismatch("readout dimension differs from ensemble");
  for (const CMatrix& op : moment_operators(readout)) ops_.emplace_back(ensemble, op);
  g_ops_.resize(readout.k());
  for (int a = 0; a < readout.k(); ++a) {
    for (int b = 0; b < readout.k(); ++b) g_ops_[a].emplace_back(ensemble, readout.transduction[a][b].matrix());
  }
}

ReadoutMoments CollectiveReadout::moments(const EnsembleState& state) const {
  if (!(state.ensemble == ensemble_)) throw BackendMismatch("state and readout live on different backends");
  const int k = readout_.k();
  const CVector& psi = state.amplitudes;
  const std::size_t n = psi.size();
  std::vector<CVector> v(2 * k);
  for (int i = 0; i < 2 * k; ++i) ops_[i].apply(psi, v[i]);

  ReadoutMoments m;
  m.n_sites = ensemble_.n_sites();
  m.k = k;
  m.mean.resize(2 * k);
  for (int i = 0; i < 2 * k; ++i) m.mean[i] = kernels::dot(psi.data(), v[i].data(), n).real();
  m.cov.resize(2 * k, 2 * k);
  // Re<O_i psi|O_j psi> is the symmetrised second moment for Hermitian O.
  for (int i = 0; i < 2 * k; ++i) {
    for (int j = i; j < 2 * k; ++j) {
      const double sym = kernels::dot(v[i].data(), v[j].data(), n).real();
      m.cov(i, j) = m.cov(j, i) = sym - m.mean[i] * m.mean[j];
    }
  }
  m.G.resize(k, k);
  CVector w;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      g_ops_[a][b].apply(psi, w);
      m.G(a, b) = kernels::dot(psi.data(), w.data(), n).real();
    }
  }
  return m;
}

RMatrix CollectiveReadout::spin_commutators(const EnsembleState& state) const {
  const int k = readout_.k();
  std::vector<CVector> v(k);
  for (int a = 0; a < k; ++a) ops_[k + a].apply(state.amplitudes, v[a]);
  RMatrix K(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      // <-i[S_a, S_b]> = 2 Im <S_a psi|S_b psi>
      K(a, b) = 2.0 * kernels::dot(v[a].data(), v[b].data(), v[a].size()).imag();
    }
  }
  return K;
}

ReadoutMoments collective_expectations(const EnsembleState& state, const ReadoutSet& readout) {
  return CollectiveReadout(state.ensemble, readout).moments(state);
}

}  // namespace qsq
