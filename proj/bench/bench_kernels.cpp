// Serial reference vs OpenMP vs sort-based kernels, plus the parallel
// lambda loop of quantization validation at 1 and max threads.
//
//   bench_kernels [repetitions]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "dequant/dequantizer.hpp"
#include "dequant/kernels.hpp"
#include "dequant/qv.hpp"
#include "dequant/rng.hpp"
#include "dequant/synthgen.hpp"

using namespace dequant;

namespace {

double best_seconds(int reps, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Quantized-looking values so both tie branches get exercised.
std::vector<double> sample(Rng& rng, std::size_t n, double grain) {
  std::vector<double> v(n);
  for (double& x : v) x = grain * static_cast<double>(static_cast<long>(rng.uniform(0.0, 10.0) / grain));
  return v;
}

volatile std::int64_t sink = 0;

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads available: %d\n\n", omp_get_max_threads());
  std::printf("%-8s %12s %12s %12s %12s %12s %12s  %s\n", "n", "kendall_ser", "kendall_omp", "kendall_sort",
              "ties_ser", "ties_omp", "ties_sort", "agree");

  Rng rng(2024);
  for (std::size_t n : {240u, 1278u, 4000u, 12000u}) {
    const auto truth = sample(rng, n, 1e-3);
    const auto estimate = sample(rng, n, 1e-5);
    kernels::KendallCounts a, b, c;
    std::int64_t ta = 0, tb = 0, tc = 0;
    const double k_ser = best_seconds(reps, [&] { a = kernels::kendall_counts_serial(truth, estimate, 0.0, 1e-4); });
    const double k_omp = best_seconds(reps, [&] { b = kernels::kendall_counts_parallel(truth, estimate, 0.0, 1e-4); });
    const double k_sort = best_seconds(reps, [&] { c = kernels::kendall_counts_sorted(truth, estimate, 0.0, 1e-4); });
    const double t_ser = best_seconds(reps, [&] { ta = kernels::count_ties_serial(estimate, 1e-4); });
    const double t_omp = best_seconds(reps, [&] { tb = kernels::count_ties_parallel(estimate, 1e-4); });
    const double t_sort = best_seconds(reps, [&] { tc = kernels::count_ties_sorted(estimate, 1e-4); });
    sink = a.ordered + ta;
    const bool agree = a == b && a == c && ta == tb && ta == tc;
    std::printf("%-8zu %12.6f %12.6f %12.6f %12.6f %12.6f %12.6f  %s\n", n, k_ser, k_omp, k_sort, t_ser, t_omp, t_sort,
                agree ? "yes" : "NO");
  }

  SynthConfig config;
  config.seed = 11;
  const SynthInstance instance = generate(config);
  const int max_threads = omp_get_max_threads();
  std::printf("\nquantization validation, default instance, 40 candidates\n");
  for (int threads : {1, max_threads}) {
    omp_set_num_threads(threads);
    double lambda = 0.0;
    const double s = best_seconds(std::max(1, reps / 2), [&] {
      lambda = select_lambda(instance.dataset, QVConfig{}, DequantizerConfig{}).selected_lambda;
    });
    std::printf("  threads %-3d %10.4f s  (lambda %.4f)\n", threads, s, lambda);
    if (max_threads == 1) break;
  }
  return 0;
}
