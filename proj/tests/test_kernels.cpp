#include <doctest.h>

#include <random>

#include <omp.h>

#include "oracles.hpp"
#include "qsq/dynamics.hpp"
#include "qsq/kernels.hpp"

using namespace qsq;

TEST_SUITE("kernels") {

TEST_CASE("OpenMP kernels are bit-identical to their serial references") {
  std::mt19937_64 rng(1);
  const int n = 7, d = 3;
  const std::size_t dim = checked_power(d, n, 1u << 20);
  const CVector x = oracle::random_state(static_cast<int>(dim), rng);
  const CMatrix a = oracle::random_hermitian(d, rng);
  const CMatrix k = oracle::random_hermitian(d * d, rng);
  const RMatrix w = power_law_couplings(n, 1.0, 0.7);

  for (int threads : {1, 3, 8}) {
    omp_set_num_threads(threads);
    CVector y1 = CVector::Zero(dim), y2 = CVector::Zero(dim);
    kernels::local_sum_apply(n, d, a, x.data(), y1.data());
    kernels::local_sum_apply_serial(n, d, a, x.data(), y2.data());
    CHECK((y1 - y2).norm() == 0.0);

    y1.setZero();
    y2.setZero();
    kernels::pair_sum_apply(n, d, k, w, x.data(), y1.data());
    kernels::pair_sum_apply_serial(n, d, k, w, x.data(), y2.data());
    CHECK((y1 - y2).norm() == 0.0);

    const SparseMatrix s = CollectiveOperator(Ensemble::dense(n, d), a).matrix();
    kernels::csr_matvec(s, x.data(), y1.data());
    kernels::csr_matvec_serial(s, x.data(), y2.data());
    CHECK((y1 - y2).norm() == 0.0);

    CHECK(kernels::dot(x.data(), y1.data(), dim) == kernels::dot_serial(x.data(), y1.data(), dim));
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("kernels against explicit operators") {
  std::mt19937_64 rng(5);
  const int n = 4, d = 3;
  const CVector x = oracle::random_state(81, rng);
  const CMatrix a = oracle::random_hermitian(d, rng);
  CVector y = CVector::Zero(81);
  kernels::local_sum_apply(n, d, a, x.data(), y.data());
  CHECK((y - oracle::collective(a, n) * x).norm() <= 1e-12);

  y.setZero();
  kernels::site_apply(n, d, 2, a, x.data(), y.data());
  CHECK((y - oracle::embed(a, 2, n) * x).norm() <= 1e-12);

  const CMatrix b = oracle::random_hermitian(d, rng);
  RMatrix w = RMatrix::Zero(n, n);
  w(1, 3) = 0.7;
  y.setZero();
  kernels::pair_sum_apply(n, d, oracle::kron(a, b), w, x.data(), y.data());
  CHECK((y - 0.7 * oracle::embed(a, 1, n) * oracle::embed(b, 3, n) * x).norm() <= 1e-12);

  CHECK(std::abs(kernels::dot(x.data(), y.data(), 81) - x.dot(y)) <= 1e-14);
}

TEST_CASE("checked_power guards overflow of the state space") {
  CHECK(checked_power(3, 4, 100) == 81);
  CHECK_THROWS_AS(checked_power(3, 5, 100), Error);
}

}
