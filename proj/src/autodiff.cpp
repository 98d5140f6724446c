#include "stacklab/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "stacklab/kernels.hpp"

namespace stacklab {

namespace {
void require(bool cond, const char* what) {
  if (!cond) throw ShapeMismatch(what);
}
}  // namespace

int Tape::leaf(const Tensor* external) {
  Node n;
  n.op = Op::Leaf;
  n.ext = external;
  n.val = *external;
  return push(std::move(n));
}

int Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Const;
  n.val = std::move(value);
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.cols == tb.rows, "matmul inner dims");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  kernels::matmul(ta, tb, n.val);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "add shapes");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.val = ta;
  for (std::size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] += tb.v[i];
  return push(std::move(n));
}

int Tape::add_rowvec(int a, int bias) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(bias);
  require(tb.rows == 1 && tb.cols == ta.cols, "bias shape");
  Node n;
  n.op = Op::AddRowVec;
  n.a = a;
  n.b = bias;
  n.val = ta;
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c) n.val.at(r, c) += tb.at(0, c);
  return push(std::move(n));
}

int Tape::leaky_relu(int a) {
  Node n;
  n.op = Op::LeakyRelu;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v)
    if (x < 0) x *= kLeakySlope;
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

int Tape::concat_cols(std::span<const int> rows) {
  int total = 0;
  for (int id : rows) {
    require(value(id).rows == 1, "concat expects row vectors");
    total += value(id).cols;
  }
  Node n;
  n.op = Op::ConcatCols;
  n.srcs.assign(rows.begin(), rows.end());
  n.val = Tensor(1, total);
  int at = 0;
  for (int id : rows)
    for (int c = 0; c < value(id).cols; ++c) n.val.at(0, at++) = value(id).at(0, c);
  return push(std::move(n));
}

int Tape::select_row(int a, int row) {
  const Tensor& ta = value(a);
  require(row >= 0 && row < ta.rows, "row index");
  Node n;
  n.op = Op::SelectRow;
  n.a = a;
  n.row = row;
  n.val = Tensor(1, ta.cols);
  for (int c = 0; c < ta.cols; ++c) n.val.at(0, c) = ta.at(row, c);
  return push(std::move(n));
}

int Tape::mean_max_rows(int a) {
  const Tensor& ta = value(a);
  if (ta.rows == 0) throw EmptyGraph();
  Node n;
  n.op = Op::MeanMaxRows;
  n.a = a;
  n.val = Tensor(1, 2 * ta.cols);
  n.argmax.resize(static_cast<std::size_t>(ta.cols));
  for (int c = 0; c < ta.cols; ++c) {
    double mean = 0;
    double best = ta.at(0, c);
    int best_row = 0;
    for (int r = 0; r < ta.rows; ++r) {
      mean += ta.at(r, c);
      if (ta.at(r, c) > best) {  // first index wins ties
        best = ta.at(r, c);
        best_row = r;
      }
    }
    n.val.at(0, c) = mean / ta.rows;
    n.val.at(0, ta.cols + c) = best;
    n.argmax[static_cast<std::size_t>(c)] = best_row;
  }
  return push(std::move(n));
}

int Tape::mse(int a, const Tensor& target) {
  const Tensor& ta = value(a);
  require(ta.same_shape(target), "mse shapes");
  Node n;
  n.op = Op::Mse;
  n.a = a;
  n.aux = target;
  double acc = 0;
  for (std::size_t i = 0; i < ta.v.size(); ++i) {
    const double d = ta.v[i] - target.v[i];
    acc += d * d;
  }
  n.val = Tensor(1, 1);
  n.val.v[0] = acc / static_cast<double>(ta.v.size());
  return push(std::move(n));
}

int Tape::sign_hinge(int a, const Tensor& target) {
  const Tensor& ta = value(a);
  require(ta.same_shape(target), "sign loss shapes");
  Node n;
  n.op = Op::SignHinge;
  n.a = a;
  n.aux = target;
  double acc = 0;
  for (std::size_t i = 0; i < ta.v.size(); ++i) {
    if (target.v[i] == 0.0) continue;  // zero targets contribute nothing
    const double s = target.v[i] > 0 ? 1.0 : -1.0;
    acc += std::max(0.0, -ta.v[i] * s);
  }
  n.val = Tensor(1, 1);
  n.val.v[0] = acc / static_cast<double>(ta.v.size());
  return push(std::move(n));
}

int Tape::add_scaled(int a, int b, double s) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "add_scaled shapes");
  Node n;
  n.op = Op::AddScaled;
  n.a = a;
  n.b = b;
  n.scalar = s;
  n.val = ta;
  for (std::size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] += s * tb.v[i];
  return push(std::move(n));
}

Tensor& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.v.empty()) n.grad = Tensor(n.val.rows, n.val.cols);
  return n.grad;
}

void Tape::backward(int id) {
  for (Node& n : nodes_) n.grad = Tensor();
  {
    Tensor& g = grad_of(id);
    for (double& x : g.v) x = 1.0;
  }
  for (int i = id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.v.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        break;
      case Op::MatMul: {
        const Tensor& ta = value(n.a);
        const Tensor& tb = value(n.b);
        Tensor ga, gb;
        kernels::matmul_a_bt(g, tb, ga);  // dA = G B^T
        kernels::matmul_at_b(ta, g, gb);  // dB = A^T G
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k) da.v[k] += ga.v[k];
        Tensor& db = grad_of(n.b);
        for (std::size_t k = 0; k < db.v.size(); ++k) db.v[k] += gb.v[k];
        break;
      }
      case Op::Add: {
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k) da.v[k] += g.v[k];
        Tensor& db = grad_of(n.b);
        for (std::size_t k = 0; k < db.v.size(); ++k) db.v[k] += g.v[k];
        break;
      }
      case Op::AddRowVec: {
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k) da.v[k] += g.v[k];
        Tensor& db = grad_of(n.b);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) db.at(0, c) += g.at(r, c);
        break;
      }
      case Op::LeakyRelu: {
        const Tensor& input = value(n.a);
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k)
          da.v[k] += g.v[k] * (input.v[k] >= 0 ? 1.0 : kLeakySlope);
        break;
      }
      case Op::Sigmoid: {
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k) {
          const double y = n.val.v[k];
          da.v[k] += g.v[k] * y * (1.0 - y);
        }
        break;
      }
      case Op::ConcatCols: {
        int at = 0;
        for (int src : n.srcs) {
          Tensor& ds = grad_of(src);
          for (int c = 0; c < ds.cols; ++c) ds.at(0, c) += g.at(0, at++);
        }
        break;
      }
      case Op::SelectRow: {
        Tensor& da = grad_of(n.a);
        for (int c = 0; c < g.cols; ++c) da.at(n.row, c) += g.at(0, c);
        break;
      }
      case Op::MeanMaxRows: {
        const Tensor& input = value(n.a);
        Tensor& da = grad_of(n.a);
        const int cols = input.cols;
        for (int c = 0; c < cols; ++c) {
          const double gm = g.at(0, c) / input.rows;
          for (int r = 0; r < input.rows; ++r) da.at(r, c) += gm;
          da.at(n.argmax[static_cast<std::size_t>(c)], c) += g.at(0, cols + c);
        }
        break;
      }
      case Op::Mse: {
        const Tensor& input = value(n.a);
        Tensor& da = grad_of(n.a);
        const double scale = 2.0 * g.v[0] / static_cast<double>(input.v.size());
        for (std::size_t k = 0; k < da.v.size(); ++k)
          da.v[k] += scale * (input.v[k] - n.aux.v[k]);
        break;
      }
      case Op::SignHinge: {
        const Tensor& input = value(n.a);
        Tensor& da = grad_of(n.a);
        const double scale = g.v[0] / static_cast<double>(input.v.size());
        for (std::size_t k = 0; k < da.v.size(); ++k) {
          if (n.aux.v[k] == 0.0) continue;
          const double s = n.aux.v[k] > 0 ? 1.0 : -1.0;
          if (-input.v[k] * s > 0) da.v[k] += scale * (-s);
        }
        break;
      }
      case Op::AddScaled: {
        Tensor& da = grad_of(n.a);
        for (std::size_t k = 0; k < da.v.size(); ++k) da.v[k] += g.v[k];
        Tensor& db = grad_of(n.b);
        for (std::size_t k = 0; k < db.v.size(); ++k) db.v[k] += n.scalar * g.v[k];
        break;
      }
    }
  }
}

void Tape::accumulate_grad(int leaf_id, Tensor& dst) const {
  const Node& n = nodes_[static_cast<std::size_t>(leaf_id)];
  assert(n.op == Op::Leaf);
  if (n.grad.v.empty()) return;
  assert(dst.same_shape(n.grad));
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += n.grad.v[i];
}

}  // namespace stacklab
