// Acceptance criteria 1-9. One PASS/FAIL line per criterion; detail lines are indented.
// Usage: acceptance [--criterion N]...   (all criteria when none given)

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "oracles.hpp"
#include "qsq/harness.hpp"
#include "qsq/povm_qutrit.hpp"
#include "si_reference.hpp"

using namespace qsq;

namespace {

struct Result {
  bool pass = true;
  std::string summary;
};

class Checks {
 public:
  explicit Checks(int id) : id_(id) {}
  bool check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    std::printf("  [%d] %s ", id_, ok ? "ok  " : "FAIL");
    va_list ap;
    va_start(ap, fmt);
    std::vprintf(fmt, ap);
    va_end(ap);
    std::printf("\n");
    std::fflush(stdout);
    all_ &= ok;
    if (!ok) ++failed_;
    return ok;
  }
  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    std::printf("  [%d]      ", id_);
    va_list ap;
    va_start(ap, fmt);
    std::vprintf(fmt, ap);
    va_end(ap);
    std::printf("\n");
    std::fflush(stdout);
  }
  Result result(const std::string& summary) const {
    return {all_, all_ ? summary : summary + " (" + std::to_string(failed_) + " sub-check(s) failed)"};
  }

 private:
  int id_;
  bool all_ = true;
  int failed_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ReadoutSet qutrit_plane() { return build_readout(PureState::basis(3, 1), SensingTask::spin(3, "xy")); }

std::vector<double> linspace(double t_max, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_max * i / (n - 1);
  return t;
}

// ---------------------------------------------------------------- 1
Result criterion1() {
  Checks c(1);
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double tol = 1e-8;

  const RMatrix f_half = qfim(PureState::basis(2, 0), SensingTask::spin(2, "x"));
  c.check(std::abs(f_half(0, 0) - 1.0) <= tol, "f(|1/2>, s_x, d=2) = %.12g (expect 1)", f_half(0, 0));

  const RMatrix f3 = qfim(PureState::basis(3, 1), SensingTask::spin(3, "xy"));
  c.check((f3 - 4.0 * RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= tol, "f(|0>, in-plane, d=3) = diag(%.12g, %.12g)",
          f3(0, 0), f3(1, 1));

  const RMatrix f5 = qfim(PureState(reference::d5_state()), SensingTask::spin(5, "xyz"));
  c.check((f5 - 8.0 * RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= tol, "f(d=5 probe, xyz) - 8 I: max %.2e",
          (f5 - 8.0 * RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff());

  std::mt19937_64 rng(1);
  double worst = 0.0;
  const SensingTask q3 = SensingTask::spin(2, "xyz");
  for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(qfim(PureState(oracle::random_state(2, rng)), q3).determinant()));
  c.check(worst <= tol, "qubit xyz: max |det f| over 1000 random states = %.2e", worst);

  // constraint solutions for d=3 xyz: |0> and (|-1> + e^{i beta}|+1>)/sqrt2
  const SensingTask t3 = SensingTask::spin(3, "xyz");
  const double det0 = std::abs(qfim(PureState::basis(3, 1), t3).determinant());
  double det1 = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double beta = 2.0 * std::numbers::pi * k / 64;
    CVector z(3);
    z << std::polar(1.0, beta) / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
    det1 = std::max(det1, std::abs(qfim(PureState(z, 1e-12), t3).determinant()));
  }
  c.check(det0 <= tol && det1 <= tol, "d=3 xyz branches: |det f| = %.2e (|0>), max %.2e (superposition branch)", det0, det1);
  OptimizerConfig oc;
  oc.restarts = 8;
  const OptimizationResult r = optimize_probe(t3, oc);
  c.check(!r.feasible(), "d=3 xyz optimizer reports infeasible");

  const double s = seconds_since(t0);
  c.check(s < 1.0, "runtime %.3f s (budget 1 s)", s);
  return c.result("closed-form QFIM values");
}

// ---------------------------------------------------------------- 2
Result criterion2() {
  Checks c(2);
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    int d;
    const char* task;
    double cost;
  };
  for (const Case k : {Case{3, "xy", 0.5}, Case{5, "xyz", 0.375}}) {
    const OptimizationResult r = optimize_probe(SensingTask::spin(k.d, k.task));
    const bool ok = r.feasible() && std::abs(r.cost.value - k.cost) <= 1e-6 && r.commutativity_residual <= 1e-8;
    c.check(ok, "d=%d %s: cost %.10f (expect %.6f), residual %.2e", k.d, k.task, r.cost.value, k.cost,
            r.commutativity_residual);
  }
  const double s = seconds_since(t0);
  c.check(s < 30.0, "runtime %.2f s (budget 30 s)", s);
  return c.result("optimizer recovers 1/2 and 3/8");
}

// ---------------------------------------------------------------- 3
Result criterion3() {
  Checks c(3);
  const ReadoutSet r3 = qutrit_plane();
  double e3 = std::max({max_abs(r3.slds[0].matrix() - reference::d3_lx()), max_abs(r3.slds[1].matrix() - reference::d3_ly()),
                        max_abs(r3.transduction[0][0].matrix() - reference::d3_gxx()),
                        max_abs(r3.transduction[0][1].matrix() - reference::d3_gxy()),
                        max_abs(r3.transduction[1][1].matrix() - reference::d3_gyy())});
  c.check(e3 <= 1e-10, "d=3 l_x, l_y, g_xx, g_xy, g_yy vs golden: max %.2e", e3);

  const ReadoutSet r5 = build_readout(PureState(reference::d5_state()), SensingTask::spin(5, "xyz"));
  const auto l = reference::d5_slds();
  const auto g = reference::d5_transduction();
  double e5 = 0.0;
  const std::string ax = "xyz";
  for (int a = 0; a < 3; ++a) {
    e5 = std::max(e5, max_abs(r5.slds[a].matrix() - l.at(std::string{ax[a]})));
    for (int b = 0; b < 3; ++b) {
      e5 = std::max(e5, max_abs(r5.transduction[a][b].matrix() - g.at(std::string{ax[a], ax[b]})));
    }
  }
  c.check(e5 <= 1e-10, "d=5 l_x, l_y, l_z and nine g vs golden expansions: max %.2e", e5);

  const Su2Residuals su2 = su2_subalgebra_check(r3);
  c.check(su2.max() <= 1e-12, "SU(2) residuals [s,l]-2ig, [g,s]-2il, [l,g]-2is: max %.3e (tol 1e-12)", su2.max());
  c.note("same brackets with g/2 in place of g: max %.2e", su2.normalized_max());
  return c.result("readout golden operators and SU(2) closure");
}

// ---------------------------------------------------------------- 4
Result criterion4() {
  Checks c(4);
  const ReadoutSet r = qutrit_plane();
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    const Ensemble e = Ensemble::dense(n, 3);
    worst = std::max(worst, sz_commutator_norm(build_hamiltonian(HamiltonianSpec::oat(1.0), e)));
    worst = std::max(worst, sz_commutator_norm(build_hamiltonian(HamiltonianSpec::tat(1.0), e, &r)));
    for (double gamma : {0.0, 0.5, 1.0, 3.0}) {
      worst = std::max(worst, sz_commutator_norm(build_hamiltonian(HamiltonianSpec::xy(1.0, gamma, 2.0), e)));
    }
  }
  c.check(worst <= 1e-10, "||[H, S_z]||_F over OAT, TAT, XY(gamma in {0,0.5,1,3}), dense N=2..8: max %.2e", worst);

  struct Run {
    const char* name;
    HamiltonianSpec spec;
    Ensemble e;
    double t_max;
  };
  std::mt19937_64 rng(3);
  const PureState phi(oracle::random_state(3, rng), 1e-10);
  const std::vector<Run> runs = {
      {"TAT SYMMETRIC N=40", HamiltonianSpec::tat(1.0), Ensemble::symmetric(40, 3), 0.5},
      {"OAT SYMMETRIC N=40", HamiltonianSpec::oat(1.0), Ensemble::symmetric(40, 3), 1.0},
      {"XY g=0 SYMMETRIC N=40", HamiltonianSpec::xy(1.0, 0.0, 2.0), Ensemble::symmetric(40, 3), 1.0},
      {"TAT DENSE N=6", HamiltonianSpec::tat(1.0), Ensemble::dense(6, 3), 1.0},
      {"OAT DENSE N=6", HamiltonianSpec::oat(1.0), Ensemble::dense(6, 3), 1.0},
      {"XY g=1 DENSE N=6", HamiltonianSpec::xy(1.0, 1.0, 2.0), Ensemble::dense(6, 3), 1.0},
      {"XY g=3 DENSE N=6", HamiltonianSpec::xy(1.0, 3.0, 2.0), Ensemble::dense(6, 3), 1.0},
  };
  for (const Run& run : runs) {
    const Hamiltonian h = build_hamiltonian(run.spec, run.e, &r);
    const CollectiveOperator sz(run.e, spin_operators(3).z.matrix());
    const EnsembleState psi0 = product_state(run.e, phi);
    const double sz0 = expectation(psi0, sz).real();
    double drift = 0.0;
    evolve(psi0, h, linspace(run.t_max, 41),
           [&](const EnsembleState& s) { drift = std::max(drift, std::abs(expectation(s, sz).real() - sz0)); });
    c.check(drift <= 1e-8, "<S_z>(t) drift, %s, t <= %.1f: %.2e", run.name, run.t_max, drift);
  }
  return c.result("S_z conservation");
}

// ---------------------------------------------------------------- 5
Result criterion5() {
  Checks c(5);
  const ReadoutSet r = qutrit_plane();
  const std::vector<double> grid = linspace(0.5, 10);
  for (const HamiltonianSpec& spec : {HamiltonianSpec::tat(1.0), HamiltonianSpec::oat(1.0)}) {
    double worst = 0.0;
    for (int n = 2; n <= 5; ++n) {
      const Ensemble ed = Ensemble::dense(n, 3), es = Ensemble::symmetric(n, 3);
      const auto sd = evolve(product_state(ed, r.reference), build_hamiltonian(spec, ed, &r), grid);
      const auto ss = evolve(product_state(es, r.reference), build_hamiltonian(spec, es, &r), grid);
      const CollectiveReadout cd(ed, r), cs(es, r);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const ReadoutMoments a = cd.moments(sd[i]), b = cs.moments(ss[i]);
        worst = std::max({worst, (a.cov - b.cov).cwiseAbs().maxCoeff(), (a.G - b.G).cwiseAbs().maxCoeff(),
                          (a.mean - b.mean).cwiseAbs().maxCoeff()});
      }
    }
    c.check(worst <= 1e-8, "DENSE vs SYMMETRIC, %s, N=2..5, 10 times: max moment difference %.2e",
            to_string(spec.variant).c_str(), worst);
  }

  const HamiltonianSpec xy = HamiltonianSpec::xy(1.0, 0.0, 2.0);
  GdtwaConfig cfg;
  cfg.n_traj = 8000;
  cfg.master_seed = 5;
  cfg.t_grid = linspace(0.3, 7);
  const GdtwaResult g = run_gdtwa(cfg, xy, 4, r);
  const Ensemble e = Ensemble::dense(4, 3);
  const auto exact = evolve(product_state(e, r.reference), build_hamiltonian(xy, e, &r), cfg.t_grid);
  double worst_z = 0.0, first_bad = NAN;
  for (std::size_t o = 0; o < cfg.t_grid.size(); ++o) {
    const SqueezingRecord ex = make_record(cfg.t_grid[o], collective_expectations(exact[o], r), r.sql_cost);
    const SqueezingRecord& gr = g.records[o].record;
    const double z = std::abs(gr.xi2 - ex.xi2) / gr.xi2_err;
    c.note("J0 t = %.2f  GDTWA xi2 = %.4f +- %.4f  DENSE xi2 = %.4f  (%.1f sigma)", cfg.t_grid[o], gr.xi2, gr.xi2_err,
           ex.xi2, z);
    worst_z = std::max(worst_z, z);
    if (z > 3.0 && std::isnan(first_bad)) first_bad = cfg.t_grid[o];
  }
  c.check(worst_z <= 3.0, "GDTWA vs DENSE, XY N=4 gamma=0, J0 t <= 0.3, 8000 trajectories: max %.1f sigma%s", worst_z,
          std::isnan(first_bad) ? "" : (" (first outside 3 sigma at J0 t = " + std::to_string(first_bad) + ")").c_str());
  return c.result("backend oracle equivalence");
}

// ---------------------------------------------------------------- 6
Result criterion6() {
  Checks c(6);
  const auto t0 = std::chrono::steady_clock::now();
  const harness::SweepResult res = harness::run_sweep(harness::fig2_config(), false);
  for (const auto& t : res.traces) {
    double onset = NAN;
    for (const auto& rec : t.records) {
      if (rec.time > 0.0 && !rec.singular && rec.xi2 < 1.0) {
        onset = rec.time;
        break;
      }
    }
    c.check(t.xi2_op < 1.0 && onset < 0.02, "N=%-3d xi2_op = %.5f at chi t = %.5f, onset chi t = %.2e", t.n_sites,
            t.xi2_op, t.t_op, onset);
  }
  const bool fit_ok = res.fit && res.fit->k >= 0.80 && res.fit->k <= 1.05;
  c.check(fit_ok, "fitted k = %.4f (window [0.80, 1.05]), R2 = %.4f", res.fit ? res.fit->k : NAN,
          res.fit ? res.fit->r2 : NAN);
  const double s = seconds_since(t0);
  c.check(s < 1800.0, "runtime %.1f s (budget 30 min)", s);
  return c.result("TAT size sweep");
}

// ---------------------------------------------------------------- 7
Result criterion7() {
  Checks c(7);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ks;
  const std::vector<double> gammas = {0.0, 0.5, 1.0, 2.0, 3.0};
  for (double gamma : gammas) {
    const harness::SweepResult res = harness::run_sweep(harness::fig3_config(gamma), false);
    for (const auto& t : res.traces) {
      c.note("gamma=%.1f N=%-3d xi2_op = %.4f +- %.4f at J0 t = %.4f (window %.4f, dt probe %.1e)", gamma, t.n_sites,
             t.xi2_op, t.xi2_op_err, t.t_op, t.records.back().time, t.probe_change);
    }
    ks.push_back(res.fit->k);
    c.note("gamma=%.1f fitted k = %.4f, R2 = %.4f  [%.0f s elapsed]", gamma, res.fit->k, res.fit->r2,
           seconds_since(t0));
    if (gamma == 0.5) {
      for (const auto& t : res.traces) {
        double when = NAN;
        for (const auto& rec : t.records) {
          if (rec.time > 0.0 && rec.time < 0.2 && rec.xi2 + 3.0 * rec.xi2_err < 1.0) {
            when = rec.time;
            break;
          }
        }
        c.check(!std::isnan(when), "gamma=0.5 N=%-3d xi2 + 3 sigma < 1 first at J0 t = %.4f (< 0.2)", t.n_sites, when);
      }
    }
  }
  c.check(ks[0] >= 0.55 && ks[0] <= 0.85, "gamma=0 k = %.4f (window [0.55, 0.85])", ks[0]);
  bool mono = true;
  for (std::size_t i = 1; i < ks.size(); ++i) mono &= ks[i] <= ks[i - 1];
  c.check(mono, "k non-increasing over gamma {0, 0.5, 1, 2, 3}: %.4f %.4f %.4f %.4f %.4f", ks[0], ks[1], ks[2], ks[3],
          ks[4]);
  c.check(ks[4] < 0.15, "k(gamma=3) = %.4f < 0.15", ks[4]);
  const double s = seconds_since(t0);
  c.check(s < 7200.0, "runtime %.1f s (budget 2 h)", s);
  return c.result("power-law XY GDTWA sweeps");
}

// ---------------------------------------------------------------- 8
Result criterion8() {
  Checks c(8);
  const auto t0 = std::chrono::steady_clock::now();
  const povm::VerifyReport rep = povm::verify(1000, 0, 11);
  for (const auto& line : rep.checks) {
    c.check(line.pass && line.value <= 1e-10, "%s: %.2e", line.name.c_str(), line.value);
  }
  const povm::PovmSet p = povm::build_effects();
  const ReadoutSet r = qutrit_plane();
  const double dx = max_abs(p.target_x - r.slds[0].matrix());
  const double dy = max_abs(p.target_y - r.slds[1].matrix());
  c.check(dx <= 1e-12, "target {J_y,J_z} vs readout l_x: max %.2e", dx);
  c.check(dy <= 1e-12, "target {J_z,J_x} vs readout l_y: max %.2e", dy);
  c.note("target {J_z,J_x} vs -l_y: max %.2e", max_abs(p.target_y + r.slds[1].matrix()));
  const double s = seconds_since(t0);
  c.check(s < 5.0, "runtime %.2f s (budget 5 s)", s);
  return c.result("POVM suite");
}

// ---------------------------------------------------------------- 9
Result criterion9() {
  Checks c(9);
  const auto t0 = std::chrono::steady_clock::now();

  // normalisation
  double worst = 0.0;
  const std::vector<ReadoutSet> sets = {qutrit_plane(),
                                        build_readout(PureState(reference::d5_state()), SensingTask::spin(5, "xyz"))};
  for (const auto& r : sets) {
    for (int n : {1, 7, 64, 1000}) worst = std::max(worst, std::abs(make_record(0.0, product_moments(r, n), r.sql_cost).xi2 - 1.0));
  }
  c.check(worst <= 1e-6, "xi2(product state) = 1 for d=3 xy and d=5 xyz, N in {1,7,64,1000}: max |xi2-1| %.2e", worst);

  // kappa-min dominance over an evolved TAT trace
  const ReadoutSet r = qutrit_plane();
  const Ensemble e = Ensemble::symmetric(32, 3);
  const Hamiltonian h = build_hamiltonian(HamiltonianSpec::tat(1.0), e, &r);
  const CollectiveReadout cr(e, r);
  double violation = 0.0;
  int rows = 0;
  evolve(product_state(e, r.reference), h, linspace(0.04, 41), [&](const EnsembleState& s) {
    const KappaScanResult k = xi2_kappa_scan(cr.moments(s), r.sql_cost);
    if (!k.xi2.singular && !k.xi2_at_zero.singular) violation = std::max(violation, k.xi2.value - k.xi2_at_zero.value);
    ++rows;
  });
  c.check(violation <= 1e-12, "min over kappa never exceeds kappa=0 (%d TAT rows): max excess %.2e", rows, violation);

  // determinism under varying thread counts
  const int saved = omp_get_max_threads();
  harness::RunConfig g = harness::fig3_config(1.0);
  g.n_list = {12, 24};
  g.gdtwa.n_traj = 400;
  g.grid.points = 20;
  harness::RunConfig s = harness::fig2_config();
  s.n_list = {8, 16, 32};
  s.grid.points = 30;
  bool same = true;
  std::vector<std::vector<double>> ref;
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    std::vector<double> bits;
    for (const auto& cfg : {g, s}) {
      for (const auto& t : harness::run_sweep(cfg, false).traces) {
        for (const auto& rec : t.records) {
          bits.push_back(rec.xi2);
          bits.push_back(rec.xi2_err);
          bits.push_back(rec.kappa_opt);
        }
      }
    }
    OptimizerConfig oc;
    oc.restarts = 8;
    const OptimizationResult o = optimize_probe(SensingTask::spin(4, "xyz"), oc);
    bits.push_back(o.cost.value);
    ref.push_back(bits);
    if (ref.size() > 1) {
      for (std::size_t i = 0; i < bits.size(); ++i) {
        const double a = bits[i], b = ref[0][i];
        same &= (a == b) || (std::isnan(a) && std::isnan(b));
      }
    }
  }
  omp_set_num_threads(saved);
  c.check(same, "GDTWA sweep, SYMMETRIC sweep and optimizer bit-identical for 1, 2, 4 threads (%zu values)", ref[0].size());

  // GDTWA 1/sqrt(n) convergence
  const ReadoutMoments exact = product_moments(r, 8);
  std::vector<double> rms;
  for (int traj : {1000, 4000, 16000}) {
    double acc = 0.0;
    const int seeds = 24;
    for (int sd = 0; sd < seeds; ++sd) acc += (sampled_moments(r.reference, r, 8, traj, 1000 + sd).C() - exact.C()).squaredNorm();
    rms.push_back(std::sqrt(acc / seeds));
  }
  const double q1 = rms[0] / rms[1], q2 = rms[1] / rms[2];
  c.check(q1 >= 2.0 / 1.5 && q1 <= 3.0 && q2 >= 2.0 / 1.5 && q2 <= 3.0,
          "GDTWA t=0 covariance rms error ratios for 4x trajectories: %.3f, %.3f (expect 2, window [1.33, 3])", q1, q2);
  const double sec = seconds_since(t0);
  c.check(sec < 600.0, "runtime %.1f s (budget 10 min)", sec);
  return c.result("property suite");
}

const std::vector<std::pair<std::string, std::function<Result()>>> kCriteria = {
    {"closed-form QFIM regression", criterion1},  {"optimizer recovery", criterion2},
    {"readout golden tests", criterion3},         {"conservation suite", criterion4},
    {"backend oracle equivalence", criterion5},   {"TAT size sweep", criterion6},
    {"XY GDTWA size sweep", criterion7}, {"POVM suite", criterion8},
    {"property suite", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 3;
    }
  }
  if (which.empty()) {
    for (int i = 1; i <= 9; ++i) which.push_back(i);
  }
  std::vector<std::pair<int, Result>> results;
  for (int id : which) {
    if (id < 1 || id > 9) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 3;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::printf("criterion %d: %s\n", id, kCriteria[id - 1].first.c_str());
    std::fflush(stdout);
    Result r;
    try {
      r = kCriteria[id - 1].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    r.summary += " [" + std::to_string(static_cast<int>(std::lround(seconds_since(t0)))) + " s]";
    results.push_back({id, r});
  }
  std::printf("\n");
  bool all = true;
  for (const auto& [id, r] : results) {
    std::printf("CRITERION %d %s  %s: %s\n", id, r.pass ? "PASS" : "FAIL", kCriteria[id - 1].first.c_str(),
                r.summary.c_str());
    all &= r.pass;
  }
  return all ? 0 : 1;
}
