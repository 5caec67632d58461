#include "qsq/gdtwa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qsq/rng.hpp"

namespace qsq {

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

double trace_product(const CMatrix& a, const CMatrix& b) { return a.transpose().cwiseProduct(b).sum().real(); }

struct Outcome {
  std::vector<double> values;
  std::vector<double> cumulative;
};

class WignerSampler {
 public:
  explicit WignerSampler(const PureState& state) {
    const GellMannBasis basis = gellmann_basis(state.dim());
    for (const auto& g : basis.generators()) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(g.matrix());
      Outcome o;
      const RVector& w = es.eigenvalues();
      double acc = 0.0;
      for (Eigen::Index k = 0; k < w.size();) {
        double p = 0.0;
        Eigen::Index end = k;
        while (end < w.size() && std::abs(w[end] - w[k]) < 1e-9) {
          p += std::norm(es.eigenvectors().col(end).dot(state.amplitudes()));
          ++end;
        }
        if (p > 1e-15) {
          acc += p;
          o.values.push_back(w[k]);
          o.cumulative.push_back(acc);
        }
        k = end;
      }
      for (double& c : o.cumulative) c /= acc;
      o.cumulative.back() = 1.0;
      outcomes_.push_back(std::move(o));
    }
  }

  void draw(Rng& rng, int n_sites, double* row_major_out, Eigen::Index row_stride, Eigen::Index col_stride) const {
    const int dim = static_cast<int>(outcomes_.size());
    for (int j = 0; j < n_sites; ++j) {
      for (int a = 0; a < dim; ++a) {
        const Outcome& o = outcomes_[a];
        double v = o.values.front();
        if (o.values.size() > 1) {
          const double u = rng.uniform();
          std::size_t m = 0;
          while (m + 1 < o.values.size() && u >= o.cumulative[m]) ++m;
          v = o.values[m];
        }
        row_major_out[j * row_stride + a * col_stride] = v;
      }
    }
  }

  PhasePoint sample(int n_sites, std::uint64_t master, std::uint64_t index) const {
    PhasePoint v(n_sites, outcomes_.size());
    Rng rng(stream_seed(master, index));
    draw(rng, n_sites, v.data(), 1, n_sites);
    return v;
  }

 private:
  std::vector<Outcome> outcomes_;
};

// Linear functionals of the Bloch vectors that make up one trajectory's contribution.
struct StatLayout {
  int k = 0;
  int m = 0;
  RMatrix ops;       // D x 2k
  RVector ops0;      // 2k
  RMatrix same;      // D x (2k)^2, symmetrised products
  RVector same0;     // (2k)^2
  RMatrix lin;       // D x (k^2 + k^2 + 1): g_ab, -i[s_a,s_b], s_z
  RVector lin0;
  int off_sec() const { return 2 * k; }
  int off_lin() const { return 2 * k + 4 * k * k; }
};

StatLayout make_layout(const ReadoutSet& r) {
  const GellMannBasis basis = gellmann_basis(r.d());
  const int D = basis.size();
  StatLayout s;
  s.k = r.k();
  const int k = s.k, q = 2 * k;
  const std::vector<CMatrix> ops = moment_operators(r);
  s.ops.resize(D, q);
  s.ops0.resize(q);
  for (int i = 0; i < q; ++i) {
    const BasisExpansion e = expand_in_basis(ops[i], basis);
    s.ops.col(i) = e.coeffs;
    s.ops0[i] = e.identity;
  }
  s.same.resize(D, q * q);
  s.same0.resize(q * q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      const BasisExpansion e = expand_in_basis(CMatrix(0.5 * (ops[i] * ops[j] + ops[j] * ops[i])), basis);
      s.same.col(i * q + j) = e.coeffs;
      s.same0[i * q + j] = e.identity;
    }
  }
  const int nl = 2 * k * k + 1;
  s.lin.resize(D, nl);
  s.lin0.resize(nl);
  auto put = [&](int col, const CMatrix& op) {
    const BasisExpansion e = expand_in_basis(op, basis);
    s.lin.col(col) = e.coeffs;
    s.lin0[col] = e.identity;
  };
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      put(a * k + b, r.transduction[a][b].matrix());
      put(k * k + a * k + b,
          CMatrix(-kI * bracket(r.task.encoder(a).matrix(), r.task.encoder(b).matrix())));
    }
  }
  put(2 * k * k, spin_operators(r.d()).z.matrix());
  s.m = s.off_lin() + nl;
  return s;
}

// Adds one trajectory's statistics into acc.
void accumulate(const StatLayout& s, const Eigen::Ref<const RMatrix>& v, RVector& acc) {
  const int q = 2 * s.k;
  const Eigen::Index n = v.rows();
  RMatrix x = v * s.ops;
  x.rowwise() += s.ops0.transpose();
  const RVector tot = x.colwise().sum().transpose();
  const RVector sv = v.colwise().sum().transpose();
  const RMatrix distinct = tot * tot.transpose() - x.transpose() * x;
  const RVector same = s.same.transpose() * sv + static_cast<double>(n) * s.same0;
  acc.head(q) += tot;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) acc[s.off_sec() + i * q + j] += distinct(i, j) + same[i * q + j];
  }
  acc.tail(s.lin.cols()) += s.lin.transpose() * sv + static_cast<double>(n) * s.lin0;
}

struct Estimate {
  ReadoutMoments moments;
  RMatrix spin_commutators;
  double sz = 0.0;
};

Estimate estimate(const StatLayout& s, const RVector& sums, double count, int n_sites) {
  const int k = s.k, q = 2 * k;
  const RVector mean = sums / count;
  Estimate e;
  e.moments.n_sites = n_sites;
  e.moments.k = k;
  e.moments.mean = mean.head(q);
  e.moments.cov.resize(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) e.moments.cov(i, j) = mean[s.off_sec() + i * q + j];
  }
  e.moments.cov -= e.moments.mean * e.moments.mean.transpose();
  e.moments.cov = 0.5 * (e.moments.cov + e.moments.cov.transpose()).eval();
  e.moments.G.resize(k, k);
  e.spin_commutators.resize(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      e.moments.G(a, b) = mean[s.off_lin() + a * k + b];
      e.spin_commutators(a, b) = mean[s.off_lin() + k * k + a * k + b];
    }
  }
  e.sz = mean[s.off_lin() + 2 * k * k];
  return e;
}

void check_grid(const std::vector<double>& t) {
  if (t.empty()) throw ConfigError("GDTWA needs at least one output time");
  if (t.front() < 0.0) throw ConfigError("output times must be nonnegative");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ConfigError("output times must be strictly increasing");
  }
}

// Integrates a batch of trajectories (N x T*D) and accumulates statistics at each output time.
void run_block(const MeanFieldModel& model, const StatLayout& layout, RMatrix v, const std::vector<double>& grid,
               double dt, std::vector<RVector>& acc) {
  const int D = model.generators();
  const Eigen::Index traj = v.cols() / D;
  RMatrix k1, k2, k3, k4, tmp;
  double t = 0.0;
  for (std::size_t o = 0; o < grid.size(); ++o) {
    while (t < grid[o]) {
      const double remaining = grid[o] - t;
      const double h = remaining < dt * (1.0 + 1e-9) ? remaining : dt;
      model.rhs_batch_serial(v, k1);
      tmp = v + 0.5 * h * k1;
      model.rhs_batch_serial(tmp, k2);
      tmp = v + 0.5 * h * k2;
      model.rhs_batch_serial(tmp, k3);
      tmp = v + h * k3;
      model.rhs_batch_serial(tmp, k4);
      v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = h == remaining ? grid[o] : t + h;
    }
    for (Eigen::Index r = 0; r < traj; ++r) accumulate(layout, v.middleCols(r * D, D), acc[o]);
  }
}

struct BlockSums {
  std::vector<std::vector<RVector>> per_block;  // [block][time]
  std::vector<double> counts;
};

BlockSums simulate(const MeanFieldModel& model, const StatLayout& layout, const WignerSampler& sampler,
                   int n_traj, int blocks, std::uint64_t seed, const std::vector<double>& grid, double dt) {
  const int n = model.n_sites(), D = model.generators();
  BlockSums out;
  out.per_block.assign(blocks, std::vector<RVector>(grid.size(), RVector::Zero(layout.m)));
  out.counts.resize(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < blocks; ++b) {
    const long begin = static_cast<long>(n_traj) * b / blocks;
    const long end = static_cast<long>(n_traj) * (b + 1) / blocks;
    RMatrix v(n, (end - begin) * D);
    for (long r = begin; r < end; ++r) v.middleCols((r - begin) * D, D) = sampler.sample(n, seed, r);
    run_block(model, layout, std::move(v), grid, dt, out.per_block[b]);
    out.counts[b] = static_cast<double>(end - begin);
  }
  return out;
}

SqueezingRecord record_from(const Estimate& e, double time, const ReadoutSet& readout, const KappaScanConfig& cfg) {
  return make_record(time, e.moments, readout.sql_cost, cfg, e.spin_commutators);
}

}  // namespace

KernelExpansion expand_kernel(const CMatrix& kernel, const GellMannBasis& basis) {
  const int d = basis.d(), D = basis.size();
  if (kernel.rows() != d * d || kernel.cols() != d * d) throw DimensionMismatch("pair kernel must be d^2 x d^2");
  const CMatrix id = CMatrix::Identity(d, d);
  KernelExpansion e;
  e.bilinear.resize(D, D);
  e.left.resize(D);
  e.right.resize(D);
  for (int a = 0; a < D; ++a) {
    const CMatrix& la = basis[a].matrix();
    for (int b = 0; b < D; ++b) e.bilinear(a, b) = trace_product(kernel, kron(la, basis[b].matrix())) / 4.0;
    e.left[a] = trace_product(kernel, kron(la, id)) / (2.0 * d);
    e.right[a] = trace_product(kernel, kron(id, la)) / (2.0 * d);
  }
  e.constant = kernel.trace().real() / (d * d);
  return e;
}

MeanFieldModel::MeanFieldModel(const TermList& terms, int n_sites, int d) : n_(n_sites), d_(d) {
  if (n_sites < 1) throw ConfigError("site count must be positive");
  const GellMannBasis basis = gellmann_basis(d);
  dim_ = basis.size();
  f_ = structure_constants(basis).nonzeros();
  static_field_ = RMatrix::Zero(n_, dim_);
  if (terms.uniform_local.size()) static_field_.rowwise() += expand_in_basis(terms.uniform_local, basis).coeffs.transpose();
  for (const auto& s : terms.site_terms) static_field_.row(s.site) += expand_in_basis(s.op, basis).coeffs.transpose();

  for (const auto& pg : terms.pair_groups) {
    const KernelExpansion e = expand_kernel(pg.kernel, basis);
    Group g;
    g.weights = RMatrix::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) g.weights(i, j) = g.weights(j, i) = pg.weights(i, j);
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        static_field_.row(i) += g.weights(i, j) * e.left.transpose();
        static_field_.row(j) += g.weights(i, j) * e.right.transpose();
      }
    }
    g.uniform = n_ > 1;
    if (n_ > 1) g.uniform_weight = g.weights(0, 1);
    for (int i = 0; i < n_ && g.uniform; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (g.weights(i, j) != g.uniform_weight) {
          g.uniform = false;
          break;
        }
      }
    }
    const RMatrix& m = e.bilinear;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    g.symmetric = (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    if (g.symmetric) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(m);
      std::vector<int> keep;
      for (int r = 0; r < dim_; ++r) {
        if (std::abs(es.eigenvalues()[r]) > 1e-12 * scale) keep.push_back(r);
      }
      g.u.resize(dim_, keep.size());
      g.mu.resize(keep.size());
      for (std::size_t r = 0; r < keep.size(); ++r) {
        g.u.col(r) = es.eigenvectors().col(keep[r]);
        g.mu[r] = es.eigenvalues()[keep[r]];
      }
    } else {
      Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      int rank = 0;
      while (rank < dim_ && svd.singularValues()[rank] > 1e-12 * scale) ++rank;
      g.p = svd.matrixU().leftCols(rank);
      g.q = svd.matrixV().leftCols(rank);
      g.sigma = svd.singularValues().head(rank);
      g.lower = g.weights.triangularView<Eigen::StrictlyLower>();
      g.upper = g.weights.triangularView<Eigen::StrictlyUpper>();
    }
    groups_.push_back(std::move(g));
  }
  for (const auto& t : terms.two_site_terms) {
    const KernelExpansion e = expand_kernel(t.op, basis);
    static_field_.row(t.i) += e.left.transpose();
    static_field_.row(t.j) += e.right.transpose();
    pairs_.push_back({t.i, t.j, e.bilinear});
  }
}

void MeanFieldModel::fields_batch(const RMatrix& v, RMatrix& b) const {
  const Eigen::Index traj = v.cols() / dim_;
  b.resize(n_, v.cols());
  for (Eigen::Index t = 0; t < traj; ++t) b.middleCols(t * dim_, dim_) = static_field_;
  for (const Group& g : groups_) {
    if (g.symmetric) {
      const Eigen::Index r = g.mu.size();
      if (r == 0) continue;
      RMatrix x(n_, traj * r);
      for (Eigen::Index t = 0; t < traj; ++t) x.middleCols(t * r, r).noalias() = v.middleCols(t * dim_, dim_) * g.u;
      RMatrix y;
      if (g.uniform) {
        // sum over all other sites
        y = -x;
        y.rowwise() += x.colwise().sum();
        y *= g.uniform_weight;
      } else {
        y.noalias() = g.weights * x;
      }
      const RMatrix back = g.mu.asDiagonal() * g.u.transpose();
      for (Eigen::Index t = 0; t < traj; ++t) b.middleCols(t * dim_, dim_).noalias() += y.middleCols(t * r, r) * back;
    } else {
      const Eigen::Index r = g.sigma.size();
      if (r == 0) continue;
      RMatrix xp(n_, traj * r), xq(n_, traj * r);
      for (Eigen::Index t = 0; t < traj; ++t) {
        xp.middleCols(t * r, r).noalias() = v.middleCols(t * dim_, dim_) * g.p;
        xq.middleCols(t * r, r).noalias() = v.middleCols(t * dim_, dim_) * g.q;
      }
      const RMatrix from_left = g.lower * xp;   // fields on j from i < j
      const RMatrix from_right = g.upper * xq;  // fields on i from j > i
      const RMatrix back_l = g.sigma.asDiagonal() * g.q.transpose();
      const RMatrix back_r = g.sigma.asDiagonal() * g.p.transpose();
      for (Eigen::Index t = 0; t < traj; ++t) {
        b.middleCols(t * dim_, dim_).noalias() += from_left.middleCols(t * r, r) * back_l;
        b.middleCols(t * dim_, dim_).noalias() += from_right.middleCols(t * r, r) * back_r;
      }
    }
  }
  for (const Pair& p : pairs_) {
    for (Eigen::Index t = 0; t < traj; ++t) {
      const auto vt = v.middleCols(t * dim_, dim_);
      b.block(p.j, t * dim_, 1, dim_).noalias() += vt.row(p.i) * p.m;
      b.block(p.i, t * dim_, 1, dim_).noalias() += vt.row(p.j) * p.m.transpose();
    }
  }
}

void MeanFieldModel::contract(const RMatrix& b, const RMatrix& v, RMatrix& dv, bool parallel) const {
  const Eigen::Index traj = v.cols() / dim_;
  dv.setZero(n_, v.cols());
  // columns are contiguous over sites
#pragma omp parallel for schedule(static) if (parallel)
  for (Eigen::Index t = 0; t < traj; ++t) {
    const Eigen::Index base = t * dim_;
    for (const auto& e : f_) {
      dv.col(base + e.a) += (2.0 * e.value) * b.col(base + e.b).cwiseProduct(v.col(base + e.c));
    }
  }
}

void MeanFieldModel::rhs_batch(const RMatrix& v, RMatrix& dv) const {
  if (v.rows() != n_ || v.cols() % dim_ != 0) throw DimensionMismatch("phase-point batch has the wrong shape");
  RMatrix b;
  fields_batch(v, b);
  contract(b, v, dv, true);
}

void MeanFieldModel::rhs_batch_serial(const RMatrix& v, RMatrix& dv) const {
  if (v.rows() != n_ || v.cols() % dim_ != 0) throw DimensionMismatch("phase-point batch has the wrong shape");
  RMatrix b;
  fields_batch(v, b);
  contract(b, v, dv, false);
}

RMatrix MeanFieldModel::rhs(const PhasePoint& v) const {
  RMatrix dv;
  rhs_batch_serial(v, dv);
  return dv;
}

RMatrix MeanFieldModel::field(const PhasePoint& v) const {
  if (v.rows() != n_ || v.cols() != dim_) throw DimensionMismatch("phase point has the wrong shape");
  RMatrix b;
  fields_batch(v, b);
  return b;
}

std::vector<PhasePoint> sample_initial(const PureState& state, int n_sites, int n_traj, std::uint64_t seed) {
  if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
  const WignerSampler sampler(state);
  std::vector<PhasePoint> out;
  out.reserve(n_traj);
  for (int r = 0; r < n_traj; ++r) out.push_back(sampler.sample(n_sites, seed, r));
  return out;
}

PhasePoint sample_trajectory(const PureState& state, int n_sites, std::uint64_t master_seed, std::uint64_t index) {
  return WignerSampler(state).sample(n_sites, master_seed, index);
}

void rk4_integrate(const MeanFieldModel& model, PhasePoint& v, double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  RMatrix k1, k2, k3, k4;
  double t = t0;
  while (t < t1) {
    const double remaining = t1 - t;
    const double h = remaining < dt * (1.0 + 1e-9) ? remaining : dt;
    model.rhs_batch_serial(v, k1);
    model.rhs_batch_serial(v + 0.5 * h * k1, k2);
    model.rhs_batch_serial(v + 0.5 * h * k2, k3);
    model.rhs_batch_serial(v + h * k3, k4);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = h == remaining ? t1 : t + h;
  }
}

ReadoutMoments sampled_moments(const PureState& state, const ReadoutSet& readout, int n_sites, int n_traj,
                               std::uint64_t seed) {
  if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
  const WignerSampler sampler(state);
  const StatLayout layout = make_layout(readout);
  RVector acc = RVector::Zero(layout.m);
  for (int r = 0; r < n_traj; ++r) accumulate(layout, sampler.sample(n_sites, seed, r), acc);
  return estimate(layout, acc, n_traj, n_sites).moments;
}

GdtwaResult run_gdtwa(const GdtwaConfig& config, const HamiltonianSpec& spec, int n_sites, const ReadoutSet& readout) {
  if (config.n_traj < 1) throw ConfigError("n_traj must be at least 1");
  if (!(config.dt > 0.0)) throw ConfigError("dt must be positive");
  if (config.jackknife_blocks < 1) throw ConfigError("jackknife_blocks must be at least 1");
  check_grid(config.t_grid);
  const int d = readout.d();
  const MeanFieldModel model(expand_terms(spec, n_sites, d, &readout), n_sites, d);
  const WignerSampler sampler(readout.reference);
  const StatLayout layout = make_layout(readout);

  GdtwaResult result;
  auto collapse = [&](const BlockSums& s, int skip) {
    std::vector<Estimate> est;
    double count = 0.0;
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      if (static_cast<int>(b) != skip) count += s.counts[b];
    }
    for (std::size_t o = 0; o < config.t_grid.size(); ++o) {
      RVector sum = RVector::Zero(layout.m);
      for (std::size_t b = 0; b < s.counts.size(); ++b) {
        if (static_cast<int>(b) != skip) sum += s.per_block[b][o];
      }
      est.push_back(estimate(layout, sum, count, n_sites));
    }
    return est;
  };

  if (config.validate_dt) {
    const int probe = std::min(config.n_traj, std::max(1, config.probe_traj));
    const int pb = std::min(probe, 8);
    const std::vector<Estimate> coarse =
        collapse(simulate(model, layout, sampler, probe, pb, config.master_seed, config.t_grid, config.dt), -1);
    const std::vector<Estimate> fine =
        collapse(simulate(model, layout, sampler, probe, pb, config.master_seed, config.t_grid, 0.5 * config.dt), -1);
    for (std::size_t o = 0; o < config.t_grid.size(); ++o) {
      const SqueezingRecord a = record_from(coarse[o], config.t_grid[o], readout, config.kappa);
      const SqueezingRecord b = record_from(fine[o], config.t_grid[o], readout, config.kappa);
      if (a.singular || b.singular) continue;
      result.probe_change = std::max(result.probe_change, std::abs(a.xi2 - b.xi2) / std::abs(b.xi2));
    }
    if (result.probe_change > config.probe_tolerance) {
      std::ostringstream msg;
      msg << "dt = " << config.dt << " rejected: xi^2 changes by " << result.probe_change
          << " (relative) when the step is halved";
      throw NumericalFailure(msg.str());
    }
  }

  const int blocks = std::min(config.n_traj, config.jackknife_blocks);
  result.blocks = blocks;
  const BlockSums sums = simulate(model, layout, sampler, config.n_traj, blocks, config.master_seed, config.t_grid,
                                  config.dt);
  const std::vector<Estimate> full = collapse(sums, -1);
  std::vector<std::vector<double>> jack(config.t_grid.size());
  if (blocks > 1) {
    for (int b = 0; b < blocks; ++b) {
      const std::vector<Estimate> loo = collapse(sums, b);
      for (std::size_t o = 0; o < config.t_grid.size(); ++o) {
        jack[o].push_back(record_from(loo[o], config.t_grid[o], readout, config.kappa).xi2);
      }
    }
  }
  for (std::size_t o = 0; o < config.t_grid.size(); ++o) {
    GdtwaRecord r;
    r.record = record_from(full[o], config.t_grid[o], readout, config.kappa);
    r.mean = full[o].moments.mean;
    r.sz_total = full[o].sz;
    if (blocks > 1 && !r.record.singular) {
      double m = 0.0;
      bool finite = true;
      for (double x : jack[o]) {
        finite = finite && std::isfinite(x);
        m += x;
      }
      if (finite) {
        m /= blocks;
        double var = 0.0;
        for (double x : jack[o]) var += (x - m) * (x - m);
        r.record.xi2_err = std::sqrt((blocks - 1.0) / blocks * var);
      }
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace qsq
