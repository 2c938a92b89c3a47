// Serial reference vs OpenMP kernels on a Fig-3b-sized batch.

#include <benchmark/benchmark.h>

#include <cmath>

#include "modspike/estimator.hpp"
#include "modspike/kernels.hpp"
#include "modspike/lattice.hpp"
#include "modspike/model.hpp"

namespace {

using namespace modspike;

constexpr std::uint64_t kSeed = 7;

struct Fixture {
  std::size_t k;
  std::size_t n;
  std::vector<double> u;
  double nu;
  double delta;
  linalg::Matrix x, y;

  Fixture(std::size_t k_, std::size_t n_) : k(k_), n(n_), u(k_, 1.0 / std::sqrt(double(k_))) {
    nu = double(k) * double(k) * double(k);
    delta = 8.0 * std::sqrt(std::log(double(k)));
    x = linalg::Matrix(n, k);
    kernels::parallel::sample_spiked(u, nu, kSeed, 1, x);
    kernels::parallel::fold(x, delta, y);
  }
};

const Fixture& fixture(std::size_t k) {
  static const Fixture f30(30, 20000);
  static const Fixture f100(100, 20000);
  return k == 30 ? f30 : f100;
}

template <bool Parallel>
void BM_SampleSpiked(benchmark::State& state) {
  const auto& f = fixture(std::size_t(state.range(0)));
  linalg::Matrix x(f.n, f.k);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::sample_spiked(f.u, f.nu, kSeed, 1, x);
    } else {
      kernels::serial::sample_spiked(f.u, f.nu, kSeed, 1, x);
    }
    benchmark::DoNotOptimize(x.data().data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(f.n));
}

template <bool Parallel>
void BM_Fold(benchmark::State& state) {
  const auto& f = fixture(std::size_t(state.range(0)));
  linalg::Matrix y;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::fold(f.x, f.delta, y);
    } else {
      kernels::serial::fold(f.x, f.delta, y);
    }
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(f.n));
}

template <bool Parallel>
void BM_BallMoment(benchmark::State& state) {
  const auto& f = fixture(std::size_t(state.range(0)));
  const double r = estimator::default_radius(f.k);
  for (auto _ : state) {
    auto m = Parallel ? kernels::parallel::ball_second_moment(f.y, r) : kernels::serial::ball_second_moment(f.y, r);
    benchmark::DoNotOptimize(m.selected);
  }
  state.SetItemsProcessed(state.iterations() * int64_t(f.n));
}

template <bool Parallel>
void BM_IFDecode(benchmark::State& state) {
  const auto& f = fixture(std::size_t(state.range(0)));
  const auto dec = lattice::integer_forcing_matrix(linalg::spiked_covariance(f.u, f.nu), f.delta);
  linalg::Matrix xhat;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::decode_rows(f.y, dec, xhat);
    } else {
      kernels::serial::decode_rows(f.y, dec, xhat);
    }
    benchmark::DoNotOptimize(xhat.data().data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(f.n));
}

}  // namespace

BENCHMARK(BM_SampleSpiked<false>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleSpiked<true>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fold<false>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fold<true>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BallMoment<false>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BallMoment<true>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IFDecode<false>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IFDecode<true>)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
