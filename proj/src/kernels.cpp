#include "stacklab/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stacklab {

bool Tensor::all_finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::size_t scalar_count(const std::vector<const Tensor*>& ts) {
  std::size_t n = 0;
  for (const Tensor* t : ts) n += t->size();
  return n;
}

namespace kernels {

namespace {
std::atomic<bool> g_parallel{true};

// below this many output elements the fork/join overhead dominates
constexpr int kParallelCutoff = 2048;
}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul_serial(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.cols == b.rows);
  out = Tensor(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = &a.v[static_cast<std::size_t>(i) * a.cols];
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * b.at(k, j);
      out.at(i, j) = s;
    }
  }
}

void matmul_parallel(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.cols == b.rows);
  out = Tensor(a.rows, b.cols);
#pragma omp parallel for schedule(static) collapse(2)
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      const double* ai = &a.v[static_cast<std::size_t>(i) * a.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * b.at(k, j);
      out.at(i, j) = s;
    }
  }
}

void matmul_at_b_serial(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.rows == b.rows);
  out = Tensor(a.cols, b.cols);
  for (int i = 0; i < a.cols; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.rows; ++k) s += a.at(k, i) * b.at(k, j);
      out.at(i, j) = s;
    }
  }
}

void matmul_at_b_parallel(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.rows == b.rows);
  out = Tensor(a.cols, b.cols);
#pragma omp parallel for schedule(static) collapse(2)
  for (int i = 0; i < a.cols; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.rows; ++k) s += a.at(k, i) * b.at(k, j);
      out.at(i, j) = s;
    }
  }
}

void matmul_a_bt_serial(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.cols == b.cols);
  out = Tensor(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = &a.v[static_cast<std::size_t>(i) * a.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* bj = &b.v[static_cast<std::size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      out.at(i, j) = s;
    }
  }
}

void matmul_a_bt_parallel(const Tensor& a, const Tensor& b, Tensor& out) {
  assert(a.cols == b.cols);
  out = Tensor(a.rows, b.rows);
#pragma omp parallel for schedule(static) collapse(2)
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.rows; ++j) {
      const double* ai = &a.v[static_cast<std::size_t>(i) * a.cols];
      const double* bj = &b.v[static_cast<std::size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      out.at(i, j) = s;
    }
  }
}

namespace {
bool use_parallel(std::size_t out_elems, std::size_t inner) {
  return g_parallel.load() && out_elems * inner >= kParallelCutoff;
}
}  // namespace

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
  if (use_parallel(static_cast<std::size_t>(a.rows) * b.cols, a.cols))
    matmul_parallel(a, b, out);
  else
    matmul_serial(a, b, out);
}

void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& out) {
  if (use_parallel(static_cast<std::size_t>(a.cols) * b.cols, a.rows))
    matmul_at_b_parallel(a, b, out);
  else
    matmul_at_b_serial(a, b, out);
}

void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& out) {
  if (use_parallel(static_cast<std::size_t>(a.rows) * b.rows, a.cols))
    matmul_a_bt_parallel(a, b, out);
  else
    matmul_a_bt_serial(a, b, out);
}

}  // namespace kernels
}  // namespace stacklab
