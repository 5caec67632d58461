#include "qsq/qfim_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsq/nelder_mead.hpp"
#include "qsq/rng.hpp"

namespace qsq {

SensingTask::SensingTask(int d, std::vector<HermitianOperator> encoders, std::vector<std::string> labels)
    : d_(d), encoders_(std::move(encoders)), labels_(std::move(labels)) {
  check_local_dim(d);
  const int k = static_cast<int>(encoders_.size());
  if (k < 1 || k > d * d - 1) {
    throw Error("sensing task needs between 1 and d^2-1 encoders, got " + std::to_string(k));
  }
  for (const auto& e : encoders_) {
    if (e.dim() != d) throw DimensionMismatch("encoder dimension differs from task dimension");
  }
  if (labels_.empty()) {
    for (int a = 0; a < k; ++a) labels_.push_back("s" + std::to_string(a + 1));
  }
  if (static_cast<int>(labels_.size()) != k) throw Error("label count must match encoder count");
}

SensingTask SensingTask::spin(int d, const std::string& axes) {
  const SpinOperators s = spin_operators(d);
  std::vector<HermitianOperator> enc;
  std::vector<std::string> labels;
  for (char c : axes) {
    switch (c) {
      case 'x': enc.push_back(s.x); break;
      case 'y': enc.push_back(s.y); break;
      case 'z': enc.push_back(s.z); break;
      default: throw ConfigError(std::string("unknown spin axis '") + c + "'");
    }
    labels.emplace_back(1, c);
  }
  if (enc.empty()) throw ConfigError("spin task needs at least one axis");
  SensingTask task(d, std::move(enc), std::move(labels));
  task.axes_ = axes;
  return task;
}

PureState::PureState(CVector amplitudes, double tol) : z_(std::move(amplitudes)) {
  check_local_dim(static_cast<int>(z_.size()));
  const double norm2 = z_.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol) {
    throw Error("state is not normalised (|z|^2 = " + std::to_string(norm2) + ")");
  }
}

PureState PureState::normalized(CVector amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw Error("cannot normalise the zero vector");
  return PureState(amplitudes / n);
}

PureState PureState::basis(int d, int index) {
  if (index < 0 || index >= d) throw Error("basis index out of range");
  CVector z = CVector::Zero(d);
  z[index] = 1.0;
  return PureState(std::move(z));
}

PureState PureState::gauge_fixed() const {
  for (int mu = 0; mu < dim(); ++mu) {
    if (std::abs(z_[mu]) > 1e-8) {
      const cd phase = std::conj(z_[mu]) / std::abs(z_[mu]);
      CVector z = z_ * phase;
      z[mu] = std::abs(z_[mu]);
      return PureState(std::move(z), 1e-10);
    }
  }
  return *this;
}

namespace {

void check_match(const PureState& state, const SensingTask& task) {
  if (state.dim() != task.d()) {
    throw DimensionMismatch("state dimension " + std::to_string(state.dim()) +
                            " does not match task dimension " + std::to_string(task.d()));
  }
}

// Imaginary parts of <phi|[s_a, s_b]|phi> for a < b (the real parts vanish identically).
std::vector<double> commutator_expectations(const std::vector<CVector>& sz) {
  std::vector<double> out;
  const std::size_t k = sz.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      // <[s_a, s_b]> = <s_a phi|s_b phi> - c.c. = 2i Im(...)
      out.push_back(2.0 * sz[a].dot(sz[b]).imag());
    }
  }
  return out;
}

struct Evaluation {
  RMatrix f;
  std::vector<double> comm;
};

Evaluation evaluate(const CVector& z, const SensingTask& task) {
  const int k = task.k();
  std::vector<CVector> sz(k);
  RVector mean(k);
  for (int a = 0; a < k; ++a) {
    sz[a] = task.encoder(a).matrix() * z;
    mean[a] = z.dot(sz[a]).real();
  }
  Evaluation e;
  e.f.resize(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const double sym = sz[a].dot(sz[b]).real();
      e.f(a, b) = e.f(b, a) = 4.0 * (sym - mean[a] * mean[b]);
    }
  }
  e.comm = commutator_expectations(sz);
  return e;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

struct RestartOutcome {
  CVector z;
  CostValue cost;
  double residual = std::numeric_limits<double>::infinity();
  double penalised = std::numeric_limits<double>::infinity();
  bool feasible = false;
  bool stable = false;
};

// Gauss-Newton restoration of the weak-commutativity constraint from a penalty optimum.
std::vector<double> restore_feasibility(const SensingTask& task, std::vector<double> p) {
  const int d = task.d();
  auto residuals = [&](const std::vector<double>& q) {
    return evaluate(state_from_parameters(d, q), task).comm;
  };
  std::vector<double> r = residuals(p);
  if (r.empty()) return p;
  const int m = static_cast<int>(r.size());
  const int n = static_cast<int>(p.size());
  for (int iter = 0; iter < 30 && max_abs(r) > 1e-15; ++iter) {
    Eigen::MatrixXd jac(m, n);
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      std::vector<double> up = p, dn = p;
      up[j] += h;
      dn[j] -= h;
      const auto ru = residuals(up), rd = residuals(dn);
      for (int i = 0; i < m; ++i) jac(i, j) = (ru[i] - rd[i]) / (2 * h);
    }
    Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), m);
    const Eigen::VectorXd step = -jac.completeOrthogonalDecomposition().pseudoInverse() * rv;
    if (!step.allFinite() || step.norm() == 0.0) break;
    bool improved = false;
    double t = 1.0;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      std::vector<double> q = p;
      for (int j = 0; j < n; ++j) q[j] += t * step[j];
      const auto rq = residuals(q);
      if (sum_sq(rq) < sum_sq(r)) {
        p = std::move(q);
        r = rq;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return p;
}

RestartOutcome run_restart(const SensingTask& task, const OptimizerConfig& cfg, int index) {
  const int d = task.d();
  Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(index)));
  std::vector<double> p(2 * d - 2);
  for (int i = 0; i < d - 1; ++i) p[i] = 0.5 * std::numbers::pi * rng.uniform();
  for (int i = d - 1; i < 2 * d - 2; ++i) p[i] = 2.0 * std::numbers::pi * rng.uniform();

  double weight = cfg.penalty;
  auto objective = [&](const std::vector<double>& q) {
    const Evaluation e = evaluate(state_from_parameters(d, q), task);
    const CostValue c = cost(e.f, cfg.regularity_eps);
    const double base = c.singular ? 1e6 : c.value;
    return base + weight * sum_sq(e.comm);
  };

  NelderMeadOptions nm;
  nm.initial_step = 0.4;
  std::vector<double> round_costs;
  double penalised = 0.0;
  for (int round = 0; round <= cfg.continuation_rounds; ++round) {
    const NelderMeadResult res = nelder_mead(objective, p, nm);
    p = res.x;
    penalised = res.value;
    const Evaluation e = evaluate(state_from_parameters(d, p), task);
    round_costs.push_back(cost(e.f, cfg.regularity_eps).value);
    weight *= 2.0;
    nm.initial_step = 0.05;
  }

  p = restore_feasibility(task, p);
  RestartOutcome out;
  out.z = state_from_parameters(d, p);
  const Evaluation e = evaluate(out.z, task);
  out.cost = cost(e.f, cfg.regularity_eps);
  out.residual = max_abs(e.comm);
  out.penalised = penalised;
  out.feasible = !out.cost.singular && out.residual <= cfg.residual_tol;
  const double previous = round_costs.size() >= 2 ? round_costs[round_costs.size() - 2] : round_costs.back();
  out.stable = std::abs(out.cost.value - previous) <= cfg.stability_tol ||
               std::abs(out.cost.value - round_costs.back()) <= cfg.stability_tol;
  return out;
}

}  // namespace

CVector state_from_parameters(int d, const std::vector<double>& params) {
  if (static_cast<int>(params.size()) != 2 * d - 2) throw Error("expected 2d-2 parameters");
  CVector z(d);
  double sin_prod = 1.0;
  for (int mu = 0; mu < d; ++mu) {
    double r;
    if (mu < d - 1) {
      r = sin_prod * std::cos(params[mu]);
      sin_prod *= std::sin(params[mu]);
    } else {
      r = sin_prod;
    }
    z[mu] = mu == 0 ? cd(r, 0.0) : std::polar(r, params[d - 1 + mu - 1]);
  }
  return z;
}

SingleSiteQFIM qfim(const PureState& state, const SensingTask& task) {
  check_match(state, task);
  return evaluate(state.amplitudes(), task).f;
}

double commutativity_residual(const PureState& state, const SensingTask& task) {
  check_match(state, task);
  return max_abs(evaluate(state.amplitudes(), task).comm);
}

CostValue cost(const SingleSiteQFIM& f, double regularity_eps) {
  if (f.rows() != f.cols() || f.rows() == 0) throw DimensionMismatch("QFIM must be square");
  CostValue c;
  c.det = f.determinant();
  if (!(c.det > regularity_eps)) {
    c.singular = true;
    c.value = std::numeric_limits<double>::infinity();
    return c;
  }
  c.value = f.inverse().trace();
  return c;
}

OptimizationResult optimize_probe(const SensingTask& task, const OptimizerConfig& config) {
  if (config.restarts < 1) throw ConfigError("optimizer needs at least one restart");
  std::vector<RestartOutcome> outcomes(config.restarts);

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < config.restarts; ++r) outcomes[r] = run_restart(task, config, r);

  // Deterministic selection: lowest cost among feasible restarts, ties by index.
  int best = -1;
  int feasible = 0;
  for (int r = 0; r < config.restarts; ++r) {
    if (!outcomes[r].feasible) continue;
    ++feasible;
    if (best < 0 || outcomes[r].cost.value < outcomes[best].cost.value) best = r;
  }

  OptimizationResult result;
  result.restarts_used = config.restarts;
  result.feasible_restarts = feasible;
  if (best < 0) {
    // Infeasible task: report the restart closest to the constraint set for diagnostics.
    int closest = 0;
    for (int r = 1; r < config.restarts; ++r) {
      if (outcomes[r].residual < outcomes[closest].residual) closest = r;
    }
    const PureState st = PureState::normalized(outcomes[closest].z).gauge_fixed();
    result.state = st;
    result.qfim = qfim(st, task);
    result.cost = cost(result.qfim, config.regularity_eps);
    result.cost.singular = true;
    result.cost.value = std::numeric_limits<double>::infinity();
    result.commutativity_residual = outcomes[closest].residual;
    result.converged = false;
    return result;
  }

  const PureState st = PureState::normalized(outcomes[best].z).gauge_fixed();
  result.state = st;
  result.qfim = qfim(st, task);
  result.cost = cost(result.qfim, config.regularity_eps);
  result.commutativity_residual = commutativity_residual(st, task);
  result.converged = outcomes[best].stable && result.commutativity_residual <= config.residual_tol &&
                     result.cost.det > config.regularity_eps;
  return result;
}

}  // namespace qsq
