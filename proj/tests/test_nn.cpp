#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "stacklab/kernels.hpp"
#include "stacklab/nn.hpp"
#include "test_oracles.hpp"

using namespace stacklab;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (double& x : t.v) x = rng.uniform(lo, hi);
  return t;
}

// Central finite differences against the tape gradient for every coordinate
// of every listed tensor. `forward` must rebuild the computation from the
// tensors' current values and return the scalar loss.
void gradcheck(std::vector<Tensor*> inputs,
               const std::function<double(Tape*, std::vector<int>*)>& forward,
               double tol = 1e-5) {
  Tape tape;
  std::vector<int> leaf_ids;
  forward(&tape, &leaf_ids);
  REQUIRE(leaf_ids.size() == inputs.size());

  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Tensor analytic = tape.grad(leaf_ids[t]);
    for (std::size_t i = 0; i < inputs[t]->v.size(); ++i) {
      const double x0 = inputs[t]->v[i];
      const double h = 1e-6;
      inputs[t]->v[i] = x0 + h;
      const double fp = forward(nullptr, nullptr);
      inputs[t]->v[i] = x0 - h;
      const double fm = forward(nullptr, nullptr);
      inputs[t]->v[i] = x0;
      const double numeric = (fp - fm) / (2 * h);
      const double got = analytic.v.empty() ? 0.0 : analytic.v[i];
      CHECK(testing::rel_err(numeric, got) < tol);
    }
  }
}

}  // namespace

TEST_CASE("linear layer forward") {
  Linear id("id", 3, 3);
  for (int i = 0; i < 3; ++i) id.w.value.at(i, i) = 1.0;
  Tensor x = Tensor::row({1.0, -2.0, 3.0});
  Tape tape;
  const int out = id.apply(tape, tape.leaf(&x));
  CHECK(tape.value(out).v == x.v);

  Linear tiny("tiny", 1, 1);
  tiny.w.value.v[0] = 2.0;
  tiny.b.value.v[0] = 1.0;
  Tensor x1 = Tensor::row({3.0});
  Tape t2;
  const int y = tiny.apply(t2, t2.leaf(&x1));
  CHECK(t2.value(y).v[0] == doctest::Approx(7.0));
}

TEST_CASE("linear layer gradients match finite differences") {
  Rng rng(5);
  Tensor w = random_tensor(4, 3, rng);
  Tensor b = random_tensor(1, 3, rng);
  Tensor x = random_tensor(2, 4, rng);
  const Tensor target = random_tensor(2, 3, rng);

  auto forward = [&](Tape* out_tape, std::vector<int>* ids) {
    Tape local;
    Tape& tape = out_tape ? *out_tape : local;
    const int wid = tape.leaf(&w);
    const int bid = tape.leaf(&b);
    const int xid = tape.leaf(&x);
    const int loss = tape.mse(tape.add_rowvec(tape.matmul(xid, wid), bid), target);
    if (out_tape) {
      tape.backward(loss);
      *ids = {wid, bid, xid};
    }
    return tape.value(loss).v[0];
  };
  gradcheck({&w, &b, &x}, forward, 1e-6);
}

TEST_CASE("graph convolution forward") {
  // single node with a self-loop and identity weights is the identity
  Tensor adj1 = adjacency_normalize(1, {});
  CHECK(adj1.v[0] == doctest::Approx(1.0));
  Tensor feats = Tensor::row({0.3, -0.7});
  Tensor w(2, 2);
  w.at(0, 0) = w.at(1, 1) = 1.0;
  Tape tape;
  const int out = tape.matmul(tape.matmul(tape.constant(adj1), tape.leaf(&feats)),
                              tape.leaf(&w));
  CHECK(tape.value(out).v[0] == doctest::Approx(0.3));
  CHECK(tape.value(out).v[1] == doctest::Approx(-0.7));

  // two nodes, edge both ways: A+I has all degrees 2, rows average to 0.5
  Tensor adj2 = adjacency_normalize(2, {{1, 0}});
  Tensor feats2(2, 2);
  feats2.at(0, 0) = 1.0;
  feats2.at(1, 1) = 1.0;
  Tape t2;
  const int out2 = t2.matmul(t2.matmul(t2.constant(adj2), t2.leaf(&feats2)),
                             t2.leaf(&w));
  for (double v : t2.value(out2).v) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("graph convolution gradients on a random 5-node graph") {
  Rng rng(17);
  const Tensor adj = adjacency_normalize(5, {{1, 0}, {2, 1}, {3, 2}, {4, 1}});
  Tensor feats = random_tensor(5, 3, rng);
  Tensor w = random_tensor(3, 4, rng);
  const Tensor target = random_tensor(5, 4, rng);

  auto forward = [&](Tape* out_tape, std::vector<int>* ids) {
    Tape local;
    Tape& tape = out_tape ? *out_tape : local;
    const int fid = tape.leaf(&feats);
    const int wid = tape.leaf(&w);
    const int loss =
        tape.mse(tape.leaky_relu(tape.matmul(tape.matmul(tape.constant(adj), fid), wid)),
                 target);
    if (out_tape) {
      tape.backward(loss);
      *ids = {fid, wid};
    }
    return tape.value(loss).v[0];
  };
  gradcheck({&feats, &w}, forward, 1e-5);
}

TEST_CASE("mean-max aggregation") {
  Tensor one = Tensor::row({2.5, -1.0});
  Tape tape;
  const int agg = tape.mean_max_rows(tape.leaf(&one));
  CHECK(tape.value(agg).v == std::vector<double>{2.5, -1.0, 2.5, -1.0});

  Tensor two(2, 2);
  two.at(0, 0) = 1;
  two.at(0, 1) = 3;
  two.at(1, 0) = 5;
  two.at(1, 1) = 1;
  Tape t2;
  const int a2 = t2.mean_max_rows(t2.leaf(&two));
  CHECK(t2.value(a2).v == std::vector<double>{3.0, 2.0, 5.0, 3.0});

  // tie: gradient of the max path flows to row 0 only
  Tensor tie(2, 1);
  tie.at(0, 0) = 2.0;
  tie.at(1, 0) = 2.0;
  Tape t3;
  const int leaf = t3.leaf(&tie);
  const int a3 = t3.mean_max_rows(leaf);
  const int maxcomp = t3.select_row(a3, 0);  // 1x2: [mean, max]
  Tensor target = Tensor::row({0.0, 0.0});
  const int loss = t3.mse(maxcomp, target);
  t3.backward(loss);
  const Tensor g = t3.grad(leaf);
  // mean contributes equally, max only to the first row
  CHECK(g.at(0, 0) > g.at(1, 0));

  Tensor empty(0, 3);
  Tape t4;
  CHECK_THROWS_AS(t4.mean_max_rows(t4.leaf(&empty)), EmptyGraph);
}

TEST_CASE("activations") {
  Tensor x = Tensor::row({-1.0, 0.0, 2.0});
  Tape tape;
  const int lr = tape.leaky_relu(tape.leaf(&x));
  CHECK(tape.value(lr).v[0] == doctest::Approx(-0.01));
  CHECK(tape.value(lr).v[2] == doctest::Approx(2.0));
  const int sg = tape.sigmoid(tape.leaf(&x));
  CHECK(tape.value(sg).v[1] == doctest::Approx(0.5));

  Rng rng(23);
  Tensor input = random_tensor(3, 4, rng);
  for (double& v : input.v)
    if (std::abs(v) < 0.05) v += 0.1;  // keep clear of the leaky kink
  const Tensor target = random_tensor(3, 4, rng);
  auto forward = [&](Tape* out_tape, std::vector<int>* ids) {
    Tape local;
    Tape& tape2 = out_tape ? *out_tape : local;
    const int xid = tape2.leaf(&input);
    const int loss = tape2.mse(tape2.sigmoid(tape2.leaky_relu(xid)), target);
    if (out_tape) {
      tape2.backward(loss);
      *ids = {xid};
    }
    return tape2.value(loss).v[0];
  };
  gradcheck({&input}, forward, 1e-6);
}

TEST_CASE("losses") {
  Tensor pred = Tensor::row({1.0, -2.0, 0.5});
  Tensor target = pred;
  Tape tape;
  CHECK(tape.value(tape.mse(tape.leaf(&pred), target)).v[0] == 0.0);
  CHECK(tape.value(tape.sign_hinge(tape.leaf(&pred), target)).v[0] == 0.0);

  // flipped signs: hinge equals mean |pred| over all components
  Tensor flipped = Tensor::row({-1.0, 2.0, -0.5});
  Tape t2;
  const double hinge = t2.value(t2.sign_hinge(t2.leaf(&flipped), target)).v[0];
  CHECK(hinge == doctest::Approx((1.0 + 2.0 + 0.5) / 3.0));

  // zero targets contribute nothing
  Tensor zt = Tensor::row({0.0, 2.0, 0.0});
  Tape t3;
  const double h3 = t3.value(t3.sign_hinge(t3.leaf(&flipped), zt)).v[0];
  CHECK(h3 == doctest::Approx(0.0));  // component 1 agrees in sign

  // combined loss gradcheck away from hinge kinks
  Rng rng(31);
  Tensor p = random_tensor(1, 6, rng);
  Tensor t = random_tensor(1, 6, rng);
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    if (std::abs(p.v[i]) < 0.05) p.v[i] += 0.2;
    if (std::abs(t.v[i]) < 0.05) t.v[i] += 0.2;
  }
  auto forward = [&](Tape* out_tape, std::vector<int>* ids) {
    Tape local;
    Tape& tape4 = out_tape ? *out_tape : local;
    const int pid = tape4.leaf(&p);
    const int loss = tape4.add_scaled(tape4.mse(pid, t), tape4.sign_hinge(pid, t), 1.0);
    if (out_tape) {
      tape4.backward(loss);
      *ids = {pid};
    }
    return tape4.value(loss).v[0];
  };
  gradcheck({&p}, forward, 1e-5);
}

TEST_CASE("adam") {
  Param p("p", 1, 1);
  p.value.v[0] = 1.5;
  Adam adam;
  // zero gradient leaves parameters and moments untouched
  adam.step({&p}, 1e-2);
  CHECK(p.value.v[0] == 1.5);
  CHECK(p.adam_m.v[0] == 0.0);
  CHECK(p.adam_v.v[0] == 0.0);

  // schedule
  CHECK(lr_schedule(1e-4, 0.95, 500, 0) == doctest::Approx(1e-4));
  CHECK(lr_schedule(1e-4, 0.95, 500, 500) == doctest::Approx(9.5e-5));
  CHECK(lr_schedule(1e-4, 0.95, 500, 1000) == doctest::Approx(9.025e-5));

  // minimize x^2 from 1.5
  Param q("q", 1, 1);
  q.value.v[0] = 1.5;
  Adam opt;
  for (int i = 0; i < 2000; ++i) {
    q.grad.v[0] = 2.0 * q.value.v[0];
    opt.step({&q}, 1e-2);
  }
  CHECK(std::abs(q.value.v[0]) < 1e-3);
}

TEST_CASE("parallel kernels match the serial reference bitwise") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + rng.index(40);
    const int k = 1 + rng.index(40);
    const int n = 1 + rng.index(40);
    const Tensor a = random_tensor(m, k, rng);
    const Tensor b = random_tensor(k, n, rng);
    Tensor s, p;
    kernels::matmul_serial(a, b, s);
    kernels::matmul_parallel(a, b, p);
    CHECK(s.v == p.v);
    const Tensor at = random_tensor(k, m, rng);
    kernels::matmul_at_b_serial(at, b, s);
    kernels::matmul_at_b_parallel(at, b, p);
    CHECK(s.v == p.v);
    const Tensor bt = random_tensor(n, k, rng);
    kernels::matmul_a_bt_serial(a, bt, s);
    kernels::matmul_a_bt_parallel(a, bt, p);
    CHECK(s.v == p.v);
  }
}

TEST_CASE("snapshot round trip is bitwise") {
  Rng rng(43);
  Param a("layer.w", 7, 3), b("layer.b", 1, 3);
  for (double& x : a.value.v) x = rng.uniform(-2, 2);
  for (double& x : b.value.v) x = rng.uniform(-2, 2);
  const std::string path = "/tmp/stacklab_test_snapshot.bin";
  save_snapshot(path, {&a, &b}, "{\"test\":true}");

  Param a2("layer.w", 7, 3), b2("layer.b", 1, 3);
  load_snapshot(path, {&a2, &b2});
  CHECK(a2.value.v == a.value.v);
  CHECK(b2.value.v == b.value.v);
  CHECK(snapshot_sidecar(path) == "{\"test\":true}");

  Param wrong("other.w", 7, 3);
  CHECK_THROWS(load_snapshot(path, {&wrong, &b2}));
  CHECK_THROWS_AS(load_snapshot("/tmp/does_not_exist.bin", {&a2, &b2}), ModelNotLoaded);
}

TEST_CASE("shape mismatches throw") {
  Tensor a(2, 3), b(4, 5);
  Tape tape;
  CHECK_THROWS_AS(tape.matmul(tape.leaf(&a), tape.leaf(&b)), ShapeMismatch);
  CHECK_THROWS_AS(tape.add(tape.leaf(&a), tape.leaf(&b)), ShapeMismatch);
  Tensor t(9, 9);
  CHECK_THROWS_AS(tape.mse(tape.leaf(&a), t), ShapeMismatch);
}
