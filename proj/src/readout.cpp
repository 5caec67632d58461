#include "qsq/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qsq {

namespace {

HermitianOperator minus_i_bracket(const CMatrix& a, const CMatrix& b) {
  return HermitianOperator(CMatrix(-kI * bracket(a, b)), 1e-10);
}

}  // namespace

ReadoutSet build_readout(const PureState& state, const SensingTask& task) {
  if (state.dim() != task.d()) throw DimensionMismatch("state and task dimensions differ");
  ReadoutSet r{task, state, state.projector(), {}, {}, qfim(state, task)};
  const int k = task.k();
  for (int b = 0; b < k; ++b) r.slds.push_back(minus_i_bracket(task.encoder(b).matrix(), r.rho));
  r.transduction.resize(k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      r.transduction[a].push_back(minus_i_bracket(task.encoder(a).matrix(), r.slds[b].matrix()));
    }
  }
  const CostValue c = cost(r.reference_qfim);
  r.sql_cost = c.value;
  return r;
}

double Su2Residuals::max() const {
  double m = 0.0;
  for (const auto& row : per_axis) {
    for (double v : row) m = std::max(m, v);
  }
  return m;
}

double Su2Residuals::normalized_max() const {
  double m = 0.0;
  for (const auto& row : normalized) {
    for (double v : row) m = std::max(m, v);
  }
  return m;
}

Su2Residuals su2_subalgebra_check(const ReadoutSet& readout) {
  Su2Residuals out;
  for (int a = 0; a < readout.k(); ++a) {
    const CMatrix& s = readout.task.encoder(a).matrix();
    const CMatrix& l = readout.slds[a].matrix();
    const CMatrix& g = readout.transduction[a][a].matrix();
    out.per_axis.push_back({(bracket(s, l) - 2.0 * kI * g).norm(),
                            (bracket(g, s) - 2.0 * kI * l).norm(),
                            (bracket(l, g) - 2.0 * kI * s).norm()});
    const CMatrix h = 0.5 * g;
    out.normalized.push_back({(bracket(s, l) - 2.0 * kI * h).norm(),
                              (bracket(h, s) - 2.0 * kI * l).norm(),
                              (bracket(l, h) - 2.0 * kI * s).norm()});
  }
  return out;
}

std::vector<CMatrix> moment_operators(const ReadoutSet& readout) {
  std::vector<CMatrix> ops;
  for (const auto& l : readout.slds) ops.push_back(l.matrix());
  for (const auto& s : readout.task.encoders()) ops.push_back(s.matrix());
  return ops;
}

ReadoutMoments product_moments(const ReadoutSet& readout, int n_sites) {
  if (n_sites < 1) throw Error("site count must be positive");
  const PureState& phi = readout.reference;
  const std::vector<CMatrix> ops = moment_operators(readout);
  const int k = readout.k();
  ReadoutMoments m;
  m.n_sites = n_sites;
  m.k = k;
  RVector single(2 * k);
  for (int i = 0; i < 2 * k; ++i) single[i] = phi.expectation(ops[i]);
  m.mean = n_sites * single;
  m.cov.resize(2 * k, 2 * k);
  for (int i = 0; i < 2 * k; ++i) {
    for (int j = i; j < 2 * k; ++j) {
      const double sym = phi.expectation(0.5 * (ops[i] * ops[j] + ops[j] * ops[i]));
      m.cov(i, j) = m.cov(j, i) = n_sites * (sym - single[i] * single[j]);
    }
  }
  m.G.resize(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) m.G(a, b) = n_sites * phi.expectation(readout.transduction[a][b].matrix());
  }
  return m;
}

RMatrix ReadoutMoments::C(double kappa) const {
  const double c = std::cos(kappa), s = std::sin(kappa);
  const RMatrix ll = cov.topLeftCorner(k, k);
  const RMatrix ls = cov.topRightCorner(k, k);
  const RMatrix ss = cov.bottomRightCorner(k, k);
  return c * c * ll - c * s * (ls + ls.transpose()) + s * s * ss;
}

Xi2Value error_propagation_variance(const RMatrix& C, const RMatrix& G) {
  if (C.rows() != G.rows() || C.cols() != G.cols() || G.rows() != G.cols()) {
    throw DimensionMismatch("C and G must be square matrices of equal size");
  }
  Xi2Value out;
  const double scale = std::pow(G.norm(), static_cast<double>(G.rows()));
  const double det = G.determinant();
  if (!(std::abs(det) > 1e-10 * scale) || !std::isfinite(det)) {
    out.singular = true;
    return out;
  }
  const RMatrix gi = G.inverse();
  out.value = (gi.transpose() * C * gi).trace();
  return out;
}

Xi2Value xi2_general(const RMatrix& C, const RMatrix& G, double sql_cost, int n_sites) {
  if (!(sql_cost > 0.0) || !std::isfinite(sql_cost)) {
    throw Error("reference state has a singular QFIM; xi^2 is undefined");
  }
  Xi2Value v = error_propagation_variance(C, G);
  if (!v.singular) v.value *= n_sites / sql_cost;
  return v;
}

KappaScanResult xi2_kappa_scan(const ReadoutMoments& moments, double sql_cost,
                               const KappaScanConfig& config, const RMatrix& spin_commutators) {
  if (config.grid < 2) throw ConfigError("kappa grid needs at least two points");
  const int k = moments.k;
  const bool self_consistent = config.self_consistent_g;
  const RMatrix K = spin_commutators.size() ? spin_commutators : RMatrix(RMatrix::Zero(k, k));
  auto eval = [&](double kappa) {
    if (self_consistent) {
      const RMatrix Gk = std::cos(kappa) * moments.G - std::sin(kappa) * K;
      return xi2_general(moments.C(kappa), Gk, sql_cost, moments.n_sites);
    }
    return xi2_general(moments.C(kappa), moments.G, sql_cost, moments.n_sites);
  };
  auto score = [&](double kappa) {
    const Xi2Value v = eval(kappa);
    return v.singular ? std::numeric_limits<double>::infinity() : v.value;
  };

  KappaScanResult out;
  out.xi2_at_zero = eval(0.0);
  const double h = 2.0 * std::numbers::pi / config.grid;
  std::vector<double> values(config.grid);
  for (int i = 0; i < config.grid; ++i) values[i] = score(i * h);
  const int best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  if (!std::isfinite(values[best])) {
    out.xi2.singular = true;
    return out;
  }

  // Golden-section refinement inside the neighbouring grid cells.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = (best - 1) * h, hi = (best + 1) * h;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  while (hi - lo > config.tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = score(x2);
    }
  }
  double kappa = 0.5 * (lo + hi);
  double value = score(kappa);
  if (!(value <= values[best])) {
    kappa = best * h;
    value = values[best];
  }
  kappa = std::fmod(kappa + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  out.kappa_opt = kappa;
  out.xi2.value = value;
  return out;
}

Xi2Value wineland_xi2(double variance_sy, double mean_sz, int n_sites) {
  Xi2Value out;
  if (std::abs(mean_sz) <= 1e-12 * n_sites) {
    out.singular = true;
    return out;
  }
  out.value = n_sites * variance_sy / (mean_sz * mean_sz);
  return out;
}

Xi2Value vector_xi2(const RMatrix& C, const RMatrix& G, int n_sites) {
  Xi2Value v = error_propagation_variance(C, G);
  if (!v.singular) v.value *= 8.0 * n_sites / 3.0;
  return v;
}

SqueezingRecord make_record(double time, const ReadoutMoments& moments, double sql_cost,
                            const KappaScanConfig& config, const RMatrix& spin_commutators) {
  SqueezingRecord rec;
  rec.time = time;
  rec.G = moments.G;
  const KappaScanResult scan = xi2_kappa_scan(moments, sql_cost, config, spin_commutators);
  rec.kappa_opt = scan.kappa_opt;
  rec.C = moments.C(scan.kappa_opt);
  if (config.self_consistent_g && spin_commutators.size()) {
    rec.G = std::cos(scan.kappa_opt) * moments.G - std::sin(scan.kappa_opt) * spin_commutators;
  }
  rec.singular = scan.xi2.singular;
  rec.xi2 = scan.xi2.value;
  return rec;
}

}  // namespace qsq
