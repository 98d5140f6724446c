#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "stacklab/tensor.hpp"

namespace stacklab {

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const char* what) : std::runtime_error(what) {}
};

struct EmptyGraph : std::runtime_error {
  EmptyGraph() : std::runtime_error("aggregate over an empty graph") {}
};

// Reverse-mode tape over dense 2-D tensors. Leaves reference external
// tensors; gradients accumulate per node and are read back after backward().
class Tape {
 public:
  int leaf(const Tensor* external);    // parameter or input; not owned
  int constant(Tensor value);          // owned constant leaf

  int matmul(int a, int b);            // [m,k]x[k,n]
  int add(int a, int b);               // same shape
  int add_rowvec(int a, int bias);     // bias 1xC broadcast over rows
  int leaky_relu(int a);               // slope 0.01
  int sigmoid(int a);
  int concat_cols(std::span<const int> rows);  // 1xCi rows -> 1xSum
  int select_row(int a, int row);      // 1xC view of row
  int mean_max_rows(int a);            // n x c -> 1 x 2c (mean then max)
  int mse(int a, const Tensor& target);          // scalar 1x1
  int sign_hinge(int a, const Tensor& target);   // scalar 1x1
  int add_scaled(int a, int b, double s);        // a + s*b

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].val; }
  void backward(int id);
  const Tensor& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // adds a leaf's accumulated gradient into dst
  void accumulate_grad(int leaf_id, Tensor& dst) const;

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  static constexpr double kLeakySlope = 0.01;

 private:
  enum class Op {
    Leaf,
    Const,
    MatMul,
    Add,
    AddRowVec,
    LeakyRelu,
    Sigmoid,
    ConcatCols,
    SelectRow,
    MeanMaxRows,
    Mse,
    SignHinge,
    AddScaled,
  };

  struct Node {
    Op op;
    int a = -1, b = -1;
    std::vector<int> srcs;   // ConcatCols
    int row = 0;             // SelectRow
    double scalar = 1.0;     // AddScaled
    Tensor val;
    Tensor aux;              // loss target
    Tensor grad;
    const Tensor* ext = nullptr;
    std::vector<int> argmax; // MeanMaxRows
  };

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  Tensor& grad_of(int id);

  std::vector<Node> nodes_;
};

}  // namespace stacklab
