#pragma once

#include "stacklab/tensor.hpp"

namespace stacklab::kernels {

// Parallel kernels with serial reference implementations. Every parallel
// variant computes each output element with the same summation order as the
// serial one, so results are bit-identical for any thread count.

void matmul_serial(const Tensor& a, const Tensor& b, Tensor& out);          // [m,k]x[k,n]
void matmul_parallel(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_at_b_serial(const Tensor& a, const Tensor& b, Tensor& out);     // A^T B: [k,m]x[k,n] -> [m,n]
void matmul_at_b_parallel(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_a_bt_serial(const Tensor& a, const Tensor& b, Tensor& out);     // A B^T: [m,k]x[n,k] -> [m,n]
void matmul_a_bt_parallel(const Tensor& a, const Tensor& b, Tensor& out);

// Dispatchers used by the autodiff engine; honour set_parallel().
void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& out);

void set_parallel(bool enabled);
bool parallel_enabled();
int worker_count();

}  // namespace stacklab::kernels
