#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace stacklab {

// Dense row-major 2-D tensor of 64-bit floats. Vectors are 1xN.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor row(std::vector<double> values) {
    Tensor t;
    t.rows = 1;
    t.cols = static_cast<int>(values.size());
    t.v = std::move(values);
    return t;
  }

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const;
};

// number of trainable scalars in a list of tensors
std::size_t scalar_count(const std::vector<const Tensor*>& ts);

}  // namespace stacklab
