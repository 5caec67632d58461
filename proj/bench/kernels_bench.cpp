#include <random>

#include <benchmark/benchmark.h>

#include "qsq/dynamics.hpp"
#include "qsq/gdtwa.hpp"
#include "qsq/kernels.hpp"

using namespace qsq;

namespace {

CVector random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  return v;
}

const ReadoutSet& qutrit_readout() {
  static const ReadoutSet r = build_readout(PureState::basis(3, 1), SensingTask::spin(3, "xy"));
  return r;
}

template <bool Parallel>
void BM_CsrMatvec(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Ensemble e = Ensemble::symmetric(n, 3);
  const SparseMatrix h = build_hamiltonian(HamiltonianSpec::tat(1.0), e, &qutrit_readout()).to_sparse();
  const CVector x = random_vector(h.rows(), 1);
  CVector y(h.rows());
  for (auto _ : st) {
    if constexpr (Parallel) {
      kernels::csr_matvec(h, x.data(), y.data());
    } else {
      kernels::csr_matvec_serial(h, x.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * h.nonZeros());
}

template <bool Parallel>
void BM_LocalSum(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const std::size_t dim = checked_power(3, n, kDenseLimit);
  const CMatrix a = qutrit_readout().slds[0].matrix();
  const CVector x = random_vector(dim, 2);
  CVector y(dim);
  for (auto _ : st) {
    if constexpr (Parallel) {
      kernels::local_sum_apply(n, 3, a, x.data(), y.data());
    } else {
      kernels::local_sum_apply_serial(n, 3, a, x.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_PairSum(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const std::size_t dim = checked_power(3, n, kDenseLimit);
  const TermList terms = expand_terms(HamiltonianSpec::xy(1.0, 1.0, 0.0), n, 3, nullptr);
  const auto& g = terms.pair_groups.front();
  const CVector x = random_vector(dim, 3);
  CVector y(dim);
  for (auto _ : st) {
    if constexpr (Parallel) {
      kernels::pair_sum_apply(n, 3, g.kernel, g.weights, x.data(), y.data());
    } else {
      kernels::pair_sum_apply_serial(n, 3, g.kernel, g.weights, x.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_Dot(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  const CVector a = random_vector(n, 4), b = random_vector(n, 5);
  for (auto _ : st) {
    cd r = Parallel ? kernels::dot(a.data(), b.data(), n) : kernels::dot_serial(a.data(), b.data(), n);
    benchmark::DoNotOptimize(r);
  }
  st.SetBytesProcessed(st.iterations() * 2 * n * sizeof(cd));
}

template <bool Parallel>
void BM_GdtwaRhs(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const int batch = 50;
  const MeanFieldModel model(expand_terms(HamiltonianSpec::xy(1.0, 0.5, 2.0), n, 3, nullptr), n, 3);
  std::vector<PhasePoint> pts = sample_initial(PureState::basis(3, 1), n, batch, 9);
  const int D = model.generators();
  RMatrix v(n, batch * D), dv(n, batch * D);
  for (int t = 0; t < batch; ++t) v.middleCols(t * D, D) = pts[t];
  for (auto _ : st) {
    if constexpr (Parallel) {
      model.rhs_batch(v, dv);
    } else {
      model.rhs_batch_serial(v, dv);
    }
    benchmark::DoNotOptimize(dv.data());
  }
}

}  // namespace

BENCHMARK(BM_CsrMatvec<false>)->Arg(64)->Arg(256)->Name("csr_matvec/serial");
BENCHMARK(BM_CsrMatvec<true>)->Arg(64)->Arg(256)->Name("csr_matvec/openmp");
BENCHMARK(BM_LocalSum<false>)->Arg(8)->Arg(11)->Name("local_sum/serial");
BENCHMARK(BM_LocalSum<true>)->Arg(8)->Arg(11)->Name("local_sum/openmp");
BENCHMARK(BM_PairSum<false>)->Arg(6)->Arg(8)->Name("pair_sum/serial");
BENCHMARK(BM_PairSum<true>)->Arg(6)->Arg(8)->Name("pair_sum/openmp");
BENCHMARK(BM_Dot<false>)->Arg(1 << 16)->Arg(1 << 20)->Name("dot/serial");
BENCHMARK(BM_Dot<true>)->Arg(1 << 16)->Arg(1 << 20)->Name("dot/openmp");
BENCHMARK(BM_GdtwaRhs<false>)->Arg(32)->Arg(128)->Name("gdtwa_rhs/serial");
BENCHMARK(BM_GdtwaRhs<true>)->Arg(32)->Arg(128)->Name("gdtwa_rhs/openmp");

BENCHMARK_MAIN();
