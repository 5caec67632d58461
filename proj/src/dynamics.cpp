#include "qsq/dynamics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace qsq {

std::string to_string(Backend b) { return b == Backend::Dense ? "DENSE" : "SYMMETRIC"; }

Backend backend_from_string(const std::string& s) {
  if (s == "DENSE" || s == "dense") return Backend::Dense;
  if (s == "SYMMETRIC" || s == "symmetric") return Backend::Symmetric;
  throw ConfigError("unknown backend '" + s + "'");
}

std::string to_string(HamiltonianSpec::Variant v) {
  switch (v) {
    case HamiltonianSpec::Variant::OAT: return "OAT";
    case HamiltonianSpec::Variant::TAT: return "TAT";
    case HamiltonianSpec::Variant::XY: return "XY";
    case HamiltonianSpec::Variant::Custom: return "CUSTOM";
  }
  return "?";
}

Ensemble Ensemble::dense(int n_sites, int d) {
  check_local_dim(d);
  if (n_sites < 1) throw Error("site count must be positive");
  Ensemble e;
  e.backend_ = Backend::Dense;
  e.n_sites_ = n_sites;
  e.d_ = d;
  e.dim_ = checked_power(d, n_sites, kDenseLimit);
  return e;
}

Ensemble Ensemble::symmetric(int n_sites, int d) {
  Ensemble e;
  e.backend_ = Backend::Symmetric;
  e.basis_ = std::make_shared<const SymmetricBasis>(n_sites, d);
  e.n_sites_ = n_sites;
  e.d_ = d;
  e.dim_ = e.basis_->size();
  return e;
}

double Ensemble::diagonal_sum(std::size_t i, const RVector& local) const {
  if (backend_ == Backend::Symmetric) return basis_->diagonal_sum(i, local);
  double v = 0.0;
  for (int j = 0; j < n_sites_; ++j) {
    v += local[static_cast<int>(i % d_)];
    i /= d_;
  }
  return v;
}

double EnsembleState::norm() const {
  return std::sqrt(kernels::dot(amplitudes.data(), amplitudes.data(), amplitudes.size()).real());
}

EnsembleState product_state(const Ensemble& ensemble, const PureState& phi) {
  if (phi.dim() != ensemble.d()) throw DimensionMismatch("product state dimension");
  EnsembleState s{ensemble, CVector(), 0.0};
  if (ensemble.backend() == Backend::Symmetric) {
    s.amplitudes = ensemble.basis()->product_state(phi.amplitudes());
    return s;
  }
  CVector psi = CVector::Ones(1);
  for (int j = 0; j < ensemble.n_sites(); ++j) {
    CVector next(psi.size() * phi.dim());
    for (Eigen::Index a = 0; a < psi.size(); ++a) {
      for (int mu = 0; mu < phi.dim(); ++mu) next[a * phi.dim() + mu] = psi[a] * phi[mu];
    }
    psi.swap(next);
  }
  s.amplitudes = std::move(psi);
  return s;
}

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Swap the two tensor factors of a d^2 x d^2 operator.
CMatrix swap_factors(const CMatrix& k, int d) {
  CMatrix out(d * d, d * d);
  for (int r = 0; r < d * d; ++r) {
    for (int c = 0; c < d * d; ++c) out((r % d) * d + r / d, (c % d) * d + c / d) = k(r, c);
  }
  return out;
}

std::vector<std::size_t> digit_strides(int n_sites, int d) {
  std::vector<std::size_t> s(n_sites);
  std::size_t v = 1;
  for (int j = n_sites - 1; j >= 0; --j) {
    s[j] = v;
    v *= static_cast<std::size_t>(d);
  }
  return s;
}

using Triplets = std::vector<Eigen::Triplet<cd>>;

void add_site_triplets(Triplets& t, const std::vector<std::size_t>& st, std::size_t dim, int d, int site,
                       const CMatrix& op, cd weight) {
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const int digit = static_cast<int>((idx / st[site]) % d);
    const std::size_t base = idx - digit * st[site];
    for (int b = 0; b < d; ++b) {
      const cd v = weight * op(digit, b);
      if (v != 0.0) t.emplace_back(static_cast<int>(idx), static_cast<int>(base + b * st[site]), v);
    }
  }
}

void add_pair_triplets(Triplets& t, const std::vector<std::size_t>& st, std::size_t dim, int d, int i, int j,
                       const CMatrix& kernel, cd weight) {
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const int di = static_cast<int>((idx / st[i]) % d);
    const int dj = static_cast<int>((idx / st[j]) % d);
    const std::size_t base = idx - di * st[i] - dj * st[j];
    const int row = di * d + dj;
    for (int col = 0; col < d * d; ++col) {
      const cd v = weight * kernel(row, col);
      if (v != 0.0) t.emplace_back(static_cast<int>(idx), static_cast<int>(base + (col / d) * st[i] + (col % d) * st[j]), v);
    }
  }
}

SparseMatrix dense_terms_to_sparse(const TermList& terms, int n_sites, int d) {
  const auto st = digit_strides(n_sites, d);
  const std::size_t dim = st[0] * d;
  Triplets t;
  if (terms.uniform_local.size()) {
    for (int j = 0; j < n_sites; ++j) add_site_triplets(t, st, dim, d, j, terms.uniform_local, 1.0);
  }
  for (const auto& s : terms.site_terms) add_site_triplets(t, st, dim, d, s.site, s.op, 1.0);
  for (const auto& g : terms.pair_groups) {
    for (int i = 0; i < n_sites; ++i) {
      for (int j = i + 1; j < n_sites; ++j) {
        if (g.weights(i, j) != 0.0) add_pair_triplets(t, st, dim, d, i, j, g.kernel, g.weights(i, j));
      }
    }
  }
  for (const auto& p : terms.two_site_terms) add_pair_triplets(t, st, dim, d, p.i, p.j, p.op, 1.0);
  SparseMatrix h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  h.setFromTriplets(t.begin(), t.end());
  h.prune(cd(0.0));
  return h;
}

SparseMatrix symmetric_terms_to_sparse(const TermList& terms, const SymmetricBasis& basis) {
  const int n = basis.n_sites();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  SparseMatrix h(dim, dim);
  if (terms.uniform_local.size()) h += basis.one_body(terms.uniform_local);
  if (!terms.site_terms.empty() || !terms.two_site_terms.empty()) {
    throw UnsupportedCombination("site-resolved custom terms need the DENSE backend");
  }
  for (const auto& g : terms.pair_groups) {
    if (n < 2) continue;
    const double w = g.weights(0, 1);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(g.weights(i, j) - w) > 1e-14 * std::max(1.0, std::abs(w))) {
          throw UnsupportedCombination(
              "SYMMETRIC backend needs uniform all-to-all couplings (XY with gamma > 0 needs DENSE or GDTWA)");
        }
      }
    }
    const int d = basis.d();
    if ((swap_factors(g.kernel, d) - g.kernel).norm() > 1e-12) {
      throw UnsupportedCombination("SYMMETRIC backend needs swap-symmetric pair couplings");
    }
    // sum_{i<j} A^(i) B^(j) + (i<->j) = (sum A)(sum B) - sum (AB)^(j), halved over the symmetric kernel
    for (const auto& [a, b] : g.factors) {
      const SparseMatrix ca = basis.one_body(a);
      const SparseMatrix cb = basis.one_body(b);
      const SparseMatrix prod = ca * cb;
      h += (0.5 * w) * (prod - basis.one_body(a * b));
    }
  }
  h.prune(cd(0.0));
  return h;
}

TermList::PairGroup make_group(std::vector<std::pair<CMatrix, CMatrix>> factors, RMatrix weights) {
  TermList::PairGroup g;
  g.kernel = CMatrix::Zero(factors.front().first.rows() * factors.front().second.rows(),
                           factors.front().first.cols() * factors.front().second.cols());
  for (const auto& [a, b] : factors) g.kernel += kron(a, b);
  g.factors = std::move(factors);
  g.weights = std::move(weights);
  return g;
}

}  // namespace

CollectiveOperator::CollectiveOperator(const Ensemble& ensemble, const CMatrix& single_site)
    : ensemble_(ensemble), a_(single_site) {
  if (a_.rows() != ensemble.d() || a_.cols() != ensemble.d()) {
    throw DimensionMismatch("collective operator dimension differs from local dimension");
  }
  if (ensemble.backend() == Backend::Symmetric) sparse_ = ensemble.basis()->one_body(a_);
}

void CollectiveOperator::apply(const CVector& x, CVector& y) const {
  if (static_cast<std::size_t>(x.size()) != ensemble_.dimension()) throw BackendMismatch("state does not match operator backend");
  y.resize(x.size());
  if (sparse_) {
    kernels::csr_matvec(*sparse_, x.data(), y.data());
    return;
  }
  y.setZero();
  kernels::local_sum_apply(ensemble_.n_sites(), ensemble_.d(), a_, x.data(), y.data());
}

SparseMatrix CollectiveOperator::matrix() const {
  if (sparse_) return *sparse_;
  if (ensemble_.dimension() > 250'000) throw Error("collective operator too large to materialise");
  const int n = ensemble_.n_sites(), d = ensemble_.d();
  const auto st = digit_strides(n, d);
  Triplets t;
  for (int j = 0; j < n; ++j) add_site_triplets(t, st, ensemble_.dimension(), d, j, a_, 1.0);
  SparseMatrix m(static_cast<Eigen::Index>(ensemble_.dimension()), static_cast<Eigen::Index>(ensemble_.dimension()));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

HamiltonianSpec HamiltonianSpec::oat(double chi, std::string axes) {
  HamiltonianSpec s;
  s.variant = Variant::OAT;
  s.chi = chi;
  s.oat_axes = std::move(axes);
  return s;
}

HamiltonianSpec HamiltonianSpec::tat(double chi) {
  HamiltonianSpec s;
  s.variant = Variant::TAT;
  s.chi = chi;
  return s;
}

HamiltonianSpec HamiltonianSpec::xy(double J0, double gamma, double V0) {
  HamiltonianSpec s;
  s.variant = Variant::XY;
  s.J0 = J0;
  s.gamma = gamma;
  s.V0 = V0;
  return s;
}

RMatrix power_law_couplings(int n_sites, double J0, double gamma) {
  if (gamma < 0.0) throw ConfigError("gamma must be nonnegative");
  RMatrix J = RMatrix::Zero(n_sites, n_sites);
  for (int i = 0; i < n_sites; ++i) {
    for (int j = 0; j < n_sites; ++j) {
      if (i != j) J(i, j) = J0 / std::pow(static_cast<double>(std::abs(i - j)), gamma);
    }
  }
  return J;
}

TermList expand_terms(const HamiltonianSpec& spec, int n_sites, int d, const ReadoutSet* readout) {
  TermList t;
  const SpinOperators s = spin_operators(d);
  const RMatrix all_pairs = RMatrix::Ones(n_sites, n_sites);
  switch (spec.variant) {
    case HamiltonianSpec::Variant::OAT: {
      if (spec.oat_axes.empty()) throw ConfigError("OAT needs at least one axis");
      std::vector<std::pair<CMatrix, CMatrix>> factors;
      t.uniform_local = CMatrix::Zero(d, d);
      for (char c : spec.oat_axes) {
        const int axis = c == 'x' ? 0 : c == 'y' ? 1 : c == 'z' ? 2 : -1;
        if (axis < 0) throw ConfigError(std::string("unknown OAT axis '") + c + "'");
        const CMatrix& m = s[axis].matrix();
        t.uniform_local += -spec.chi * m * m;
        factors.emplace_back(m, m);
      }
      if (n_sites > 1) t.pair_groups.push_back(make_group(std::move(factors), -2.0 * spec.chi * all_pairs));
      break;
    }
    case HamiltonianSpec::Variant::TAT: {
      if (readout == nullptr) throw ConfigError("TAT Hamiltonian needs the readout operators");
      if (readout->d() != d) throw DimensionMismatch("readout dimension differs from ensemble");
      std::vector<std::pair<CMatrix, CMatrix>> factors;
      t.uniform_local = CMatrix::Zero(d, d);
      for (int a = 0; a < readout->k(); ++a) {
        const CMatrix& sa = readout->task.encoder(a).matrix();
        const CMatrix& la = readout->slds[a].matrix();
        t.uniform_local += -spec.chi * (sa * la + la * sa);
        factors.emplace_back(sa, la);
        factors.emplace_back(la, sa);
      }
      if (n_sites > 1) t.pair_groups.push_back(make_group(std::move(factors), -2.0 * spec.chi * all_pairs));
      break;
    }
    case HamiltonianSpec::Variant::XY: {
      const CMatrix& sz = s.z.matrix();
      t.uniform_local = -spec.V0 * sz * sz;
      if (n_sites > 1) {
        std::vector<std::pair<CMatrix, CMatrix>> factors{{s.x.matrix(), s.x.matrix()}, {s.y.matrix(), s.y.matrix()}};
        t.pair_groups.push_back(make_group(std::move(factors), power_law_couplings(n_sites, spec.J0, spec.gamma)));
      }
      break;
    }
    case HamiltonianSpec::Variant::Custom: {
      for (const auto& term : spec.custom) {
        for (int site : term.sites) {
          if (site < 0 || site >= n_sites) throw ConfigError("custom term site out of range");
        }
        if (term.sites.size() == 1) {
          if (term.op.dim() != d) throw DimensionMismatch("one-site custom term must be d x d");
          t.site_terms.push_back({term.sites[0], term.op.matrix()});
        } else if (term.sites.size() == 2) {
          if (term.op.dim() != d * d) throw DimensionMismatch("two-site custom term must be d^2 x d^2");
          int i = term.sites[0], j = term.sites[1];
          if (i == j) throw ConfigError("two-site custom term needs distinct sites");
          CMatrix op = term.op.matrix();
          if (i > j) {
            std::swap(i, j);
            op = swap_factors(op, d);
          }
          t.two_site_terms.push_back({i, j, std::move(op)});
        } else {
          throw ConfigError("custom terms act on one or two sites");
        }
      }
      break;
    }
  }
  return t;
}

Hamiltonian build_hamiltonian(const HamiltonianSpec& spec, const Ensemble& ensemble, const ReadoutSet* readout) {
  if (spec.variant == HamiltonianSpec::Variant::XY && ensemble.backend() == Backend::Symmetric && spec.gamma > 0.0) {
    throw UnsupportedCombination("XY with gamma > 0 is site resolved; use DENSE or GDTWA");
  }
  if (spec.variant == HamiltonianSpec::Variant::Custom && ensemble.backend() == Backend::Symmetric) {
    throw UnsupportedCombination("custom Hamiltonians need the DENSE backend");
  }
  Hamiltonian h;
  h.ensemble_ = ensemble;
  h.terms_ = expand_terms(spec, ensemble.n_sites(), ensemble.d(), readout);
  if (ensemble.backend() == Backend::Symmetric) {
    h.sparse_ = symmetric_terms_to_sparse(h.terms_, *ensemble.basis());
  } else if (ensemble.dimension() <= kMaterializeLimit) {
    h.sparse_ = dense_terms_to_sparse(h.terms_, ensemble.n_sites(), ensemble.d());
  }
  return h;
}

const SparseMatrix& Hamiltonian::sparse() const {
  if (!sparse_) throw Error("Hamiltonian is applied lazily and has no stored matrix");
  return *sparse_;
}

SparseMatrix Hamiltonian::to_sparse(std::size_t limit) const {
  if (sparse_) return *sparse_;
  if (ensemble_.dimension() > limit) throw Error("Hamiltonian too large to materialise");
  return dense_terms_to_sparse(terms_, ensemble_.n_sites(), ensemble_.d());
}

void Hamiltonian::apply(const CVector& x, CVector& y) const {
  if (static_cast<std::size_t>(x.size()) != ensemble_.dimension()) throw BackendMismatch("state does not match Hamiltonian");
  y.resize(x.size());
  if (sparse_) {
    kernels::csr_matvec(*sparse_, x.data(), y.data());
    return;
  }
  y.setZero();
  const int n = ensemble_.n_sites(), d = ensemble_.d();
  if (terms_.uniform_local.size()) kernels::local_sum_apply(n, d, terms_.uniform_local, x.data(), y.data());
  for (const auto& s : terms_.site_terms) kernels::site_apply(n, d, s.site, s.op, x.data(), y.data());
  for (const auto& g : terms_.pair_groups) kernels::pair_sum_apply(n, d, g.kernel, g.weights, x.data(), y.data());
  for (const auto& p : terms_.two_site_terms) {
    RMatrix w = RMatrix::Zero(n, n);
    w(p.i, p.j) = 1.0;
    kernels::pair_sum_apply(n, d, p.op, w, x.data(), y.data());
  }
}

void Hamiltonian::apply_serial(const CVector& x, CVector& y) const {
  y.resize(x.size());
  if (sparse_) {
    kernels::csr_matvec_serial(*sparse_, x.data(), y.data());
    return;
  }
  y.setZero();
  const int n = ensemble_.n_sites(), d = ensemble_.d();
  if (terms_.uniform_local.size()) kernels::local_sum_apply_serial(n, d, terms_.uniform_local, x.data(), y.data());
  for (const auto& s : terms_.site_terms) kernels::site_apply(n, d, s.site, s.op, x.data(), y.data());
  for (const auto& g : terms_.pair_groups) kernels::pair_sum_apply_serial(n, d, g.kernel, g.weights, x.data(), y.data());
  for (const auto& p : terms_.two_site_terms) {
    RMatrix w = RMatrix::Zero(n, n);
    w(p.i, p.j) = 1.0;
    kernels::pair_sum_apply_serial(n, d, p.op, w, x.data(), y.data());
  }
}

double sz_commutator_norm(const Hamiltonian& h) {
  const SparseMatrix m = h.to_sparse();
  const Ensemble& e = h.ensemble();
  const RVector mz = spin_operators(e.d()).z.matrix().diagonal().real();
  std::vector<double> sz(e.dimension());
  for (std::size_t i = 0; i < sz.size(); ++i) sz[i] = e.diagonal_sum(i, mz);
  // S_z is diagonal: [H, S_z]_ab = H_ab (M_b - M_a)
  double acc = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const double diff = sz[it.col()] - sz[r];
      acc += std::norm(it.value()) * diff * diff;
    }
  }
  return std::sqrt(acc);
}

cd expectation(const EnsembleState& state, const CollectiveOperator& op) {
  if (!(state.ensemble == op.ensemble())) throw BackendMismatch("state and operator live on different backends");
  CVector y;
  op.apply(state.amplitudes, y);
  return kernels::dot(state.amplitudes.data(), y.data(), y.size());
}

cd expectation(const EnsembleState& state, const CollectiveOperator& a, const CollectiveOperator& b) {
  if (!(state.ensemble == a.ensemble()) || !(state.ensemble == b.ensemble())) {
    throw BackendMismatch("state and operator live on different backends");
  }
  CVector v, w;
  b.apply(state.amplitudes, v);
  a.apply(v, w);
  return kernels::dot(state.amplitudes.data(), w.data(), w.size());
}

double energy(const EnsembleState& state, const Hamiltonian& h) {
  if (!(state.ensemble == h.ensemble())) throw BackendMismatch("state and Hamiltonian live on different backends");
  CVector y;
  h.apply(state.amplitudes, y);
  return kernels::dot(state.amplitudes.data(), y.data(), y.size()).real();
}

cd swap_expectation(const EnsembleState& state, int i, int j) {
  const Ensemble& e = state.ensemble;
  if (e.backend() != Backend::Dense) throw BackendMismatch("site swaps need the DENSE backend");
  if (i < 0 || j < 0 || i >= e.n_sites() || j >= e.n_sites()) throw Error("site index out of range");
  const auto st = digit_strides(e.n_sites(), e.d());
  const CVector& psi = state.amplitudes;
  const int d = e.d();
  cd acc = 0.0;
  for (std::size_t idx = 0; idx < e.dimension(); ++idx) {
    const long di = static_cast<long>((idx / st[i]) % d);
    const long dj = static_cast<long>((idx / st[j]) % d);
    const std::size_t swapped = idx + (dj - di) * static_cast<long>(st[i]) + (di - dj) * static_cast<long>(st[j]);
    acc += std::conj(psi[idx]) * psi[swapped];
  }
  return acc;
}

Xi2Value wineland_xi2(const EnsembleState& state) {
  const SpinOperators s = spin_operators(state.ensemble.d());
  const CollectiveOperator sy(state.ensemble, s.y.matrix()), sz(state.ensemble, s.z.matrix());
  const double my = expectation(state, sy).real();
  const double var = expectation(state, sy, sy).real() - my * my;
  return wineland_xi2(var, expectation(state, sz).real(), state.ensemble.n_sites());
}

void export_snapshot(const std::string& path, const EnsembleState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open snapshot file " + path);
  const nlohmann::json header = {{"backend", to_string(state.ensemble.backend())},
                                 {"N", state.ensemble.n_sites()},
                                 {"d", state.ensemble.d()},
                                 {"t", state.time},
                                 {"dim", state.amplitudes.size()}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(state.amplitudes.data()),
            static_cast<std::streamsize>(state.amplitudes.size() * sizeof(cd)));
}

EnsembleState import_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot file " + path);
  std::string line;
  std::getline(in, line);
  const nlohmann::json header = nlohmann::json::parse(line);
  const Backend b = backend_from_string(header.at("backend").get<std::string>());
  const int n = header.at("N").get<int>(), d = header.at("d").get<int>();
  EnsembleState s{b == Backend::Dense ? Ensemble::dense(n, d) : Ensemble::symmetric(n, d), CVector(),
                  header.at("t").get<double>()};
  s.amplitudes.resize(static_cast<Eigen::Index>(s.ensemble.dimension()));
  in.read(reinterpret_cast<char*>(s.amplitudes.data()), static_cast<std::streamsize>(s.amplitudes.size() * sizeof(cd)));
  if (!in) throw Error("snapshot file is truncated");
  return s;
}

}  // namespace qsq
