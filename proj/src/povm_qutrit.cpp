#include "qsq/povm_qutrit.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qsq/rng.hpp"
#include "qsq/sud_algebra.hpp"

namespace qsq::povm {

namespace {

CVector f2(cd m2, cd m1, cd z, cd p1, cd p2) {
  CVector v = CVector::Zero(kLevels);
  v[level_index(2, -2)] = m2;
  v[level_index(2, -1)] = m1;
  v[level_index(2, 0)] = z;
  v[level_index(2, 1)] = p1;
  v[level_index(2, 2)] = p2;
  return v;
}

CVector unit(int i) { return CVector::Unit(kLevels, i); }

}  // namespace

int level_index(int F, int m) {
  if (F == 1 && m >= -1 && m <= 1) return 1 - m;
  if (F == 2 && m >= -2 && m <= 2) return 5 + m;
  throw ConfigError("no level |F=" + std::to_string(F) + ", m=" + std::to_string(m) + ">");
}

std::string level_label(int index) {
  static const char* names[kLevels] = {"|1,+1>", "|1,0>", "|1,-1>", "|2,-2>", "|2,-1>", "|2,0>", "|2,+1>", "|2,+2>"};
  if (index < 0 || index >= kLevels) throw ConfigError("level index out of range");
  return names[index];
}

double PovmSet::completeness_defect() const {
  CMatrix sum = CMatrix::Zero(3, 3);
  for (const auto& e : effects) sum += e;
  return (sum - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff();
}

double PovmSet::min_eigenvalue() const {
  double m = INFINITY;
  for (const auto& e : effects) m = std::min(m, Eigen::SelfAdjointEigenSolver<CMatrix>(e).eigenvalues().minCoeff());
  return m;
}

PovmSet build_effects() {
  const double r2 = std::sqrt(2.0);
  PovmSet p;
  p.phi[0] = CVector(3);
  p.phi[0] << 0.5, cd(0, -r2 / 2), 0.5;
  p.phi[1] = CVector(3);
  p.phi[1] << 0.5, cd(0, r2 / 2), 0.5;
  p.phi[2] = CVector(3);
  p.phi[2] << -0.5, r2 / 2, 0.5;
  p.phi[3] = CVector(3);
  p.phi[3] << 0.5, r2 / 2, -0.5;
  for (int k = 0; k < 4; ++k) p.effects[k] = 0.5 * p.phi[k] * p.phi[k].adjoint();
  p.effects[4] = CMatrix::Zero(3, 3);
  p.effects[4](0, 0) = 0.5;
  p.effects[5] = CMatrix::Zero(3, 3);
  p.effects[5](2, 2) = 0.5;
  const SpinOperators j = spin_operators(3);
  p.target_x = anticommutator(j.y, j.z).matrix();
  p.target_y = anticommutator(j.z, j.x).matrix();
  return p;
}

void check_density_matrix(const CMatrix& rho) {
  if (rho.rows() != 3 || rho.cols() != 3) throw ConfigError("qutrit density matrix must be 3 x 3");
  if (HermitianOperator::hermiticity_defect(rho) > 1e-10) throw ConfigError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw ConfigError("density matrix trace differs from one");
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  if (Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues().minCoeff() < -1e-10) {
    throw ConfigError("density matrix has a negative eigenvalue");
  }
}

std::array<double, 6> effect_probabilities(const CMatrix& rho, const PovmSet& povm) {
  std::array<double, 6> p{};
  for (int mu = 0; mu < 6; ++mu) p[mu] = (rho * povm.effects[mu]).trace().real();
  return p;
}

Estimate reconstruct(const CMatrix& rho, const PovmSet& povm) {
  check_density_matrix(rho);
  const auto p = effect_probabilities(rho, povm);
  return {2.0 * (p[1] - p[0]), 2.0 * (p[3] - p[2])};
}

PulseSettings PulseSettings::nominal() {
  PulseSettings s;
  s.area = {std::numbers::pi / 2, std::numbers::pi, std::numbers::pi / 2};
  return s;
}

CMatrix isometry(const PovmSet& povm) {
  static constexpr int channels[4] = {3, 4, 5, 6};  // |2,-2>, |2,-1>, |2,0>, |2,+1>
  CMatrix v = CMatrix::Zero(kLevels, 3);
  for (int k = 0; k < 4; ++k) v.row(channels[k]) += povm.phi[k].adjoint();
  v(level_index(1, 1), 0) += 1.0;
  v(level_index(1, -1), 2) += 1.0;
  return v / std::sqrt(2.0);
}

CMatrix stage_a_unitary(const PulseSettings& pulses) {
  CMatrix u = CMatrix::Identity(kLevels, kLevels);
  for (int q = 0; q < 3; ++q) {
    const int m = 1 - q;
    const int a = level_index(1, m), b = level_index(2, m);
    const double c = std::cos(pulses.area[q] / 2), s = std::sin(pulses.area[q] / 2);
    const cd e = std::polar(1.0, pulses.phase[q]);
    u(a, a) = c;
    u(b, b) = c;
    u(b, a) = -kI * e * s;
    u(a, b) = -kI * std::conj(e) * s;
  }
  return u;
}

CMatrix mixing_unitary() {
  const cd i = kI;
  CMatrix w = CMatrix::Identity(kLevels, kLevels);
  const CVector chi_p = 0.5 * f2(1, 1, -1, 1, 0);
  const CVector chi_0 = 0.5 * f2(i, -i, 1, 1, 0);
  const CVector chi_m = 0.5 * f2(1, 1, 1, -1, 0);
  const CVector chi_d = 0.5 * f2(-i, i, 1, 1, 0);
  w.col(level_index(2, 1)) = i * chi_p;
  w.col(level_index(2, 0)) = i * chi_0;
  w.col(level_index(2, -1)) = i * chi_m;
  w.col(level_index(2, -2)) = chi_d;
  w.col(level_index(2, 2)) = unit(level_index(2, 2));
  return w;
}

CMatrix complete_unitary(const CMatrix& cols) {
  const Eigen::Index n = cols.rows();
  CMatrix u(n, n);
  u.leftCols(cols.cols()) = cols;
  Eigen::Index filled = cols.cols();
  for (Eigen::Index pivot = 0; pivot < n && filled < n; ++pivot) {
    CVector v = CVector::Unit(n, pivot);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < filled; ++c) v -= u.col(c).dot(v) * u.col(c);
    }
    const double nv = v.norm();
    if (nv < 1e-8) continue;
    u.col(filled++) = v / nv;
  }
  if (filled < n) throw NumericalFailure("unitary completion ran out of pivots");
  return u;
}

NaimarkModel build_naimark(const PulseSettings& pulses) {
  const PovmSet povm = build_effects();
  NaimarkModel m;
  m.V = isometry(povm);
  m.UA = stage_a_unitary(pulses);
  m.W = mixing_unitary();
  m.U = m.W * m.UA;
  m.pulses = pulses;
  m.channel = {level_index(2, -2), level_index(2, -1), level_index(2, 0),
               level_index(2, 1),  level_index(1, 1),  level_index(1, -1)};
  return m;
}

NaimarkModel build_naimark() {
  NaimarkModel m = build_naimark(PulseSettings::nominal());
  const double residual = (m.U.leftCols(3) - m.V).norm();
  if (residual > 1e-10) {
    throw NumericalFailure("W U_A does not restrict to the isometry: residual " + std::to_string(residual));
  }
  return m;
}

Estimate OutcomeStats::estimate() const {
  return {2.0 * (effects[1] - effects[0]), 2.0 * (effects[3] - effects[2])};
}

double OutcomeStats::dark() const { return p[level_index(1, 0)] + p[level_index(2, 2)]; }

OutcomeStats simulate_readout(const CMatrix& rho, const NaimarkModel& model) {
  check_density_matrix(rho);
  const CMatrix u1 = model.U.leftCols(3);
  const CMatrix out = u1 * rho * u1.adjoint();
  OutcomeStats s;
  s.p.resize(kLevels);
  for (int i = 0; i < kLevels; ++i) s.p[i] = std::max(0.0, out(i, i).real());
  for (int mu = 0; mu < 6; ++mu) s.effects[mu] = s.p[model.channel[mu]];
  return s;
}

OutcomeStats simulate_readout(const CMatrix& rho, const NaimarkModel& model, long shots, std::uint64_t seed) {
  if (shots < 1) throw ConfigError("shot count must be positive");
  const OutcomeStats exact = simulate_readout(rho, model);
  std::array<double, kLevels> cumulative{};
  double acc = 0.0;
  for (int i = 0; i < kLevels; ++i) cumulative[i] = (acc += exact.p[i]);
  std::array<long, kLevels> counts{};
  Rng rng(seed);
  for (long s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    int i = 0;
    while (i + 1 < kLevels && u >= cumulative[i]) ++i;
    ++counts[i];
  }
  OutcomeStats out;
  out.shots = shots;
  out.p.resize(kLevels);
  for (int i = 0; i < kLevels; ++i) out.p[i] = static_cast<double>(counts[i]) / shots;
  for (int mu = 0; mu < 6; ++mu) out.effects[mu] = out.p[model.channel[mu]];
  return out;
}

LeakageReport leakage(const CMatrix& rho, double epsilon) {
  auto dark_at = [&](double eps) {
    PulseSettings p = PulseSettings::nominal();
    for (double& a : p.area) a *= 1.0 + eps;
    return simulate_readout(rho, build_naimark(p));
  };
  const PovmSet povm = build_effects();
  const OutcomeStats s = dark_at(epsilon);
  LeakageReport r;
  r.epsilon = epsilon;
  r.dark_population = s.dark();
  const double h = 1e-5;
  r.sensitivity = (dark_at(epsilon + h).dark() - dark_at(epsilon - h).dark()) / (2 * h);
  const Estimate e = s.estimate();
  r.bias = {e.lx - (rho * povm.target_x).trace().real(), e.ly - (rho * povm.target_y).trace().real()};
  return r;
}

CMatrix random_density_matrix(int rank, std::uint64_t seed) {
  if (rank < 1 || rank > 3) throw ConfigError("rank must be between 1 and 3");
  Rng rng(seed);
  CMatrix g(3, rank);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < rank; ++j) g(i, j) = cd(rng.normal(), rng.normal());
  }
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

bool VerifyReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

VerifyReport verify(int states, long shots, std::uint64_t seed) {
  VerifyReport rep;
  auto add = [&](const std::string& name, double value, double tol) {
    rep.checks.push_back({name, value, tol, value <= tol});
  };
  const PovmSet povm = build_effects();
  add("completeness |sum E - I|", povm.completeness_defect(), 1e-12);
  add("positivity -min eig(E)", std::max(0.0, -povm.min_eigenvalue()), 1e-12);
  add("Q_yz = |phi2><phi2| - |phi1><phi1|",
      (povm.phi[1] * povm.phi[1].adjoint() - povm.phi[0] * povm.phi[0].adjoint() - povm.target_x).cwiseAbs().maxCoeff(),
      1e-12);
  add("Q_zx = |phi4><phi4| - |phi3><phi3|",
      (povm.phi[3] * povm.phi[3].adjoint() - povm.phi[2] * povm.phi[2].adjoint() - povm.target_y).cwiseAbs().maxCoeff(),
      1e-12);
  CMatrix sum_phi = CMatrix::Zero(3, 3);
  for (const auto& p : povm.phi) sum_phi += p * p.adjoint();
  add("sum |phi_k><phi_k| = diag(1,2,1)",
      (sum_phi - Eigen::Vector3cd(1, 2, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);

  const NaimarkModel m = build_naimark();
  add("V^dag V = I", (m.V.adjoint() * m.V - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  add("U unitary", (m.U.adjoint() * m.U - CMatrix::Identity(kLevels, kLevels)).cwiseAbs().maxCoeff(), 1e-12);
  add("U restricted to F=1 equals V", (m.U.leftCols(3) - m.V).cwiseAbs().maxCoeff(), 1e-10);
  double induced = 0.0;
  for (int mu = 0; mu < 6; ++mu) {
    const CVector out = unit(m.channel[mu]);
    induced = std::max(induced, (m.V.adjoint() * out * out.adjoint() * m.V - povm.effects[mu]).cwiseAbs().maxCoeff());
  }
  add("induced effects V^dag |o><o| V = E", induced, 1e-12);
  add("U_A |1,0> = -i |2,0>", (m.UA * unit(level_index(1, 0)) + kI * unit(level_index(2, 0))).norm(), 1e-12);
  add("W |2,+1> = i chi_+",
      (m.W * unit(level_index(2, 1)) - kI * 0.5 * f2(1, 1, -1, 1, 0)).norm(), 1e-12);

  double dark = 0.0, p_identity = 0.0, sum_err = 0.0;
  Rng rng(seed);
  for (int s = 0; s < states; ++s) {
    const CMatrix rho = random_density_matrix(1 + static_cast<int>(rng.next() % 3), rng.next());
    const OutcomeStats o = simulate_readout(rho, m);
    dark = std::max(dark, o.dark());
    p_identity = std::max(p_identity, std::abs(o.p.sum() - 1.0));
    p_identity = std::max(p_identity, std::abs(o.p[level_index(1, 1)] - 0.5 * rho(0, 0).real()));
    p_identity = std::max(p_identity, std::abs(o.p[level_index(2, -2)] - 0.5 * povm.phi[0].dot(rho * povm.phi[0]).real()));
    const Estimate e = o.estimate();
    const Estimate r = reconstruct(rho, povm);
    const double tx = (rho * povm.target_x).trace().real(), ty = (rho * povm.target_y).trace().real();
    const double err = std::max({std::abs(e.lx - tx), std::abs(e.ly - ty), std::abs(r.lx - tx), std::abs(r.ly - ty)});
    rep.max_reconstruction_error = std::max(rep.max_reconstruction_error, err);
    sum_err += err;
  }
  rep.states = states;
  rep.mean_reconstruction_error = states ? sum_err / states : 0.0;
  add("dark channels p(1,0) + p(2,+2)", dark, 1e-12);
  add("outcome probabilities match the effect formulas", p_identity, 1e-12);
  add("reconstruction error over random states", rep.max_reconstruction_error, 1e-10);

  if (shots > 0) {
    double acc = 0.0;
    const int reps = 20;
    const CMatrix rho = random_density_matrix(1, seed ^ 0x5eedULL);
    const double tx = (rho * povm.target_x).trace().real(), ty = (rho * povm.target_y).trace().real();
    for (int r = 0; r < reps; ++r) {
      const Estimate e = simulate_readout(rho, m, shots, stream_seed(seed, r)).estimate();
      acc += (e.lx - tx) * (e.lx - tx) + (e.ly - ty) * (e.ly - ty);
    }
    rep.shots = shots;
    rep.shot_rms_error = std::sqrt(acc / (2 * reps));
    // per-estimate standard deviation is at most 2 sqrt(p1 + p2) / sqrt(K) <= 2 / sqrt(K)
    add("shot-mode rms error x sqrt(shots) / 2", rep.shot_rms_error * std::sqrt(static_cast<double>(shots)) / 2.0, 1.5);
  }
  return rep;
}

}  // namespace qsq::povm
