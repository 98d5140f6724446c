#pragma once

#include <map>
#include <string>
#include <vector>

#include "stacklab/autodiff.hpp"
#include "stacklab/rng.hpp"
#include "stacklab/tensor.hpp"

namespace stacklab {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols),
        adam_m(rows, cols), adam_v(rows, cols) {}

  void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

struct Linear {
  Param w, b;

  Linear() = default;
  Linear(const std::string& name, int d_in, int d_out)
      : w(name + ".w", d_in, d_out), b(name + ".b", 1, d_out) {}

  // y = x W + b with recorded backward; leaves are registered per call
  int apply(Tape& tape, int x) {
    const int wid = tape.leaf(&w.value);
    const int bid = tape.leaf(&b.value);
    leaf_w = wid;
    leaf_b = bid;
    return tape.add_rowvec(tape.matmul(x, wid), bid);
  }

  void collect(const Tape& tape) {
    tape.accumulate_grad(leaf_w, w.grad);
    tape.accumulate_grad(leaf_b, b.grad);
  }

  std::vector<Param*> params() { return {&w, &b}; }
  std::size_t scalar_count() const { return w.value.size() + b.value.size(); }

 private:
  int leaf_w = -1, leaf_b = -1;
};

// U(-sqrt(1/fan_in), sqrt(1/fan_in)) init
void init_linear(Linear& layer, Rng& rng);

// lr(t) = lr0 * gamma^(t / step_size) with t in scheduler steps
double lr_schedule(double lr0, double gamma, int step_size, long scheduler_steps);

class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Param*>& params, double lr);
  long steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

// Symmetric graph-convolution normalization D^-1/2 (A + I) D^-1/2 over the
// union of the directed edges and their reverses.
Tensor adjacency_normalize(int n, const std::vector<std::pair<int, int>>& edges);

// --- snapshots ------------------------------------------------------------

// Binary format: magic, version, param manifest (name, rows, cols), then all
// values as little-endian doubles. `sidecar_json` is stored next to it.
void save_snapshot(const std::string& path, const std::vector<const Param*>& params,
                   const std::string& sidecar_json);
// Loads values into an existing parameter set (shapes must match).
void load_snapshot(const std::string& path, const std::vector<Param*>& params);
std::string snapshot_sidecar(const std::string& path);

std::size_t param_scalar_count(const std::vector<const Param*>& params);

struct EmptyDataset : std::runtime_error {
  EmptyDataset() : std::runtime_error("empty dataset") {}
};

struct ModelNotLoaded : std::runtime_error {
  ModelNotLoaded() : std::runtime_error("model snapshot not loaded") {}
};

}  // namespace stacklab
