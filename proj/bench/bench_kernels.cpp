// Timing comparison of the OpenMP kernels against their serial references.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stacklab/dataset.hpp"
#include "stacklab/kernels.hpp"
#include "stacklab/renderer.hpp"
#include "stacklab/rng.hpp"

using namespace stacklab;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor random_tensor(int r, int c, Rng& rng) {
  Tensor t(r, c);
  for (double& x : t.v) x = rng.uniform(-1, 1);
  return t;
}

void bench_matmul(int m, int k, int n, int reps) {
  Rng rng(1);
  const Tensor a = random_tensor(m, k, rng);
  const Tensor b = random_tensor(k, n, rng);
  Tensor out;
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) kernels::matmul_serial(a, b, out);
  const double serial = seconds_since(t0) / reps;
  t0 = Clock::now();
  for (int i = 0; i < reps; ++i) kernels::matmul_parallel(a, b, out);
  const double parallel = seconds_since(t0) / reps;
  std::printf("matmul %4dx%4dx%4d  serial %8.3f ms  parallel %8.3f ms  speedup %.2fx\n",
              m, k, n, serial * 1e3, parallel * 1e3, serial / parallel);
}

void bench_render(int reps) {
  const auto specs = catalog_standard();
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i)
    for (const ObjectSpec& s : specs) render_object_serial(s, Orientation::Upright);
  const double serial = seconds_since(t0) / reps;
  t0 = Clock::now();
  for (int i = 0; i < reps; ++i)
    for (const ObjectSpec& s : specs) render_object(s, Orientation::Upright);
  const double parallel = seconds_since(t0) / reps;
  std::printf("render catalog        serial %8.3f ms  parallel %8.3f ms  speedup %.2fx\n",
              serial * 1e3, parallel * 1e3, serial / parallel);
}

void bench_episodes(int episodes) {
  const auto pool = episode_pool(Mode::Linear);
#ifdef _OPENMP
  const int workers = omp_get_max_threads();
  omp_set_num_threads(1);
#endif
  auto t0 = Clock::now();
  const auto serial_records = generate_dataset(7, episodes, pool, Mode::Linear, 5);
  const double serial = seconds_since(t0);
#ifdef _OPENMP
  omp_set_num_threads(workers);
#endif
  t0 = Clock::now();
  const auto parallel_records = generate_dataset(7, episodes, pool, Mode::Linear, 5);
  const double parallel = seconds_since(t0);
  bool identical = serial_records.size() == parallel_records.size();
  for (std::size_t i = 0; identical && i < serial_records.size(); ++i)
    identical = record_to_json(serial_records[i]) == record_to_json(parallel_records[i]);
  std::printf("episodes x%-10d  serial %8.3f ms  parallel %8.3f ms  speedup %.2fx%s\n",
              episodes, serial * 1e3, parallel * 1e3, serial / parallel,
              identical ? "" : "  MISMATCH");
}

}  // namespace

int main() {
  std::printf("workers: %d\n", kernels::worker_count());
  bench_matmul(1, 1024, 256, 200);
  bench_matmul(1024, 1, 256, 200);  // outer-product shape of the backward pass
  bench_matmul(64, 64, 64, 200);
  bench_matmul(256, 256, 256, 10);
  bench_render(5);
  bench_episodes(100);
  return 0;
}
