#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dff/autodiff/adapter.hpp"
#include "dff/autodiff/checkpoint.hpp"
#include "dff/autodiff/optim.hpp"
#include "dff/autodiff/tensor.hpp"
#include "dff/core/rng.hpp"
#include "fd_check.hpp"

using namespace dff;
using namespace dff::autodiff;
using dff::testutil::max_grad_error;

namespace {

Tensor random_param(Rng& rng, const std::string& name, int r, int c, double lo = -2.0,
                    double hi = 2.0) {
  std::vector<double> v(static_cast<std::size_t>(r) * c);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::param(name, r, c, std::move(v));
}

Tensor random_const(Rng& rng, int r, int c) {
  std::vector<double> v(static_cast<std::size_t>(r) * c);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(r, c, std::move(v));
}

/// Scalarizes an arbitrary output with fixed random weights so every entry's
/// gradient is exercised.
Tensor weighted_sum(const Tensor& out, const Tensor& w) { return sum_all(mul(out, w)); }

}  // namespace

TEST_CASE("op forward semantics") {
  Tensor a = Tensor::from(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::from(3, 2, {1, 0, 0, 1, 1, 1});
  Tensor c = matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c.at(0, 0) == 4.0);   // 1 + 3
  CHECK(c.at(1, 1) == 11.0);  // 5 + 6

  Tensor eye = Tensor::from(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor n = column_norm(eye);
  CHECK(n.rows() == 1);
  CHECK(n.cols() == 3);
  for (int i = 0; i < 3; ++i) CHECK(n.at(0, i) == 1.0);

  Tensor r = relu(Tensor::from(1, 2, {-1.0, 2.0}));
  CHECK(r.at(0, 0) == 0.0);
  CHECK(r.at(0, 1) == 2.0);

  Tensor sm = softmax_rows(Tensor::from(1, 3, {0.0, 0.0, 0.0}));
  for (int i = 0; i < 3; ++i) CHECK(sm.at(0, i) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_WITH_AS(matmul(a, a), doctest::Contains("matmul"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("add"), std::invalid_argument);
}

TEST_CASE("gradients match finite differences on randomized shapes") {
  Rng rng(17);
  auto dims = [&]() { return static_cast<int>(rng.uniform_int(1, 5)); };

  for (int trial = 0; trial < 50; ++trial) {
    int m = dims(), k = dims(), n = dims();

    SUBCASE_IN_LOOP:;
    {
      Tensor a = random_param(rng, "a", m, k);
      Tensor b = random_param(rng, "b", m, k);
      Tensor w = random_const(rng, m, k);
      CHECK(max_grad_error([&] { return weighted_sum(add(a, b), w); }, {a, b}) <= 1e-4);
      CHECK(max_grad_error([&] { return weighted_sum(sub(a, b), w); }, {a, b}) <= 1e-4);
      CHECK(max_grad_error([&] { return weighted_sum(mul(a, b), w); }, {a, b}) <= 1e-4);
      CHECK(max_grad_error([&] { return weighted_sum(mul_scalar(a, 1.7), w); }, {a}) <= 1e-4);
    }
    {
      Tensor a = random_param(rng, "a", m, k);
      Tensor bias = random_param(rng, "bias", 1, k);
      Tensor w = random_const(rng, m, k);
      CHECK(max_grad_error([&] { return weighted_sum(add(a, bias), w); }, {a, bias}) <= 1e-4);
      CHECK(max_grad_error([&] { return weighted_sum(mul_rowvec(a, bias), w); }, {a, bias}) <=
            1e-4);
    }
    {
      Tensor a = random_param(rng, "a", m, k);
      Tensor v = random_param(rng, "v", 1, k, 0.5, 2.0);  // away from zero
      Tensor w = random_const(rng, m, k);
      CHECK(max_grad_error([&] { return weighted_sum(div_rowvec(a, v), w); }, {a, v}) <= 1e-4);
    }
    {
      Tensor a = random_param(rng, "a", m, k);
      Tensor b = random_param(rng, "b", k, n);
      Tensor w = random_const(rng, m, n);
      CHECK(max_grad_error([&] { return weighted_sum(matmul(a, b), w); }, {a, b}) <= 1e-4);
      Tensor wt = random_const(rng, k, m);
      CHECK(max_grad_error([&] { return weighted_sum(transpose(a), wt); }, {a}) <= 1e-4);
    }
    {
      // keep relu/abs inputs away from the kink
      Tensor a = random_param(rng, "a", m, k, 0.2, 2.0);
      Tensor s = random_param(rng, "s", m, k, -2.0, -0.2);
      Tensor w = random_const(rng, m, k);
      CHECK(max_grad_error([&] { return weighted_sum(relu(a), w); }, {a}) <= 1e-4);
      CHECK(max_grad_error([&] { return weighted_sum(abs_val(s), w); }, {s}) <= 1e-4);
    }
    {
      Tensor a = random_param(rng, "a", m, k);
      Tensor w = random_const(rng, m, k);
      CHECK(max_grad_error([&] { return weighted_sum(softmax_rows(a), w); }, {a}) <= 1e-4);
      CHECK(max_grad_error([&] { return mean_all(a); }, {a}) <= 1e-4);
      CHECK(max_grad_error([&] { return sum_all(a); }, {a}) <= 1e-4);
    }
    {
      int cols = k + n;
      Tensor a = random_param(rng, "a", m, k);
      Tensor b = random_param(rng, "b", m, n);
      Tensor w = random_const(rng, m, cols);
      CHECK(max_grad_error([&] { return weighted_sum(concat_cols({a, b}), w); }, {a, b}) <= 1e-4);
      Tensor ws = random_const(rng, m, k);
      Tensor big = random_param(rng, "big", m, cols);
      CHECK(max_grad_error([&] { return weighted_sum(slice_cols(big, n, k), ws); }, {big}) <=
            1e-4);
    }
    {
      Tensor x = random_param(rng, "x", m, k + 1);  // >= 2 cols keeps variance finite
      Tensor g = random_param(rng, "g", 1, k + 1, 0.5, 1.5);
      Tensor bi = random_param(rng, "bi", 1, k + 1);
      Tensor w = random_const(rng, m, k + 1);
      CHECK(max_grad_error([&] { return weighted_sum(layer_norm_rows(x, g, bi), w); },
                           {x, g, bi}) <= 1e-4);
    }
    {
      Tensor a = random_param(rng, "a", m, k, 0.3, 2.0);
      Tensor w = random_const(rng, 1, k);
      CHECK(max_grad_error([&] { return weighted_sum(column_norm(a), w); }, {a}) <= 1e-4);
    }
  }
}

TEST_CASE("backward edge cases") {
  Tensor a = Tensor::param("a", 2, 2, {1, 2, 3, 4});
  Tensor unused = Tensor::param("unused", 2, 2, {1, 1, 1, 1});
  Tensor loss = sum_all(mul(a, a));
  backward(loss);
  CHECK(a.grad()[0] == doctest::Approx(2.0));
  CHECK(a.grad()[3] == doctest::Approx(8.0));
  CHECK(unused.grad().empty());  // never touched by this graph

  CHECK_THROWS_WITH_AS(backward(a), doctest::Contains("scalar"), std::invalid_argument);
}

TEST_CASE("adamw update rule") {
  SUBCASE("zero gradient and zero decay leave parameters unchanged") {
    Tensor p = Tensor::param("p", 1, 3, {1.0, -2.0, 3.0});
    AdamWOptions o;
    o.weight_decay = 0.0;
    AdamW opt({p}, o);
    auto before = p.values();
    opt.step();
    CHECK(p.values() == before);
  }
  SUBCASE("first step moves against the sign of the gradient by ~lr") {
    Tensor p = Tensor::param("p", 1, 2, {0.5, -0.25});
    AdamWOptions o;
    o.lr = 1e-3;
    o.weight_decay = 0.0;
    AdamW opt({p}, o);
    p.node()->ensure_grad();
    p.grad()[0] = 0.2;
    p.grad()[1] = -4.0;
    opt.step();
    // bias-corrected first step: -lr * g / (|g| + eps)
    CHECK(p.values()[0] == doctest::Approx(0.5 - 1e-3 * 0.2 / (0.2 + 1e-8)).epsilon(1e-9));
    CHECK(p.values()[1] == doctest::Approx(-0.25 + 1e-3 * 4.0 / (4.0 + 1e-8)).epsilon(1e-9));
  }
  SUBCASE("NaN gradient aborts with the parameter name") {
    Tensor p = Tensor::param("theta", 1, 1, {1.0});
    AdamW opt({p});
    p.grad()[0] = std::nan("");
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("theta"), std::runtime_error);
  }
}

TEST_CASE("fresh adapters preserve the base forward pass") {
  Rng rng(5);
  for (auto method : {PeftMethod::lora, PeftMethod::dora}) {
    Linear lin = Linear::make("q_proj", 8, 6, rng);
    Tensor x = random_const(rng, 4, 6);
    Tensor base = lin.forward(x);

    AdapterSpec spec;
    spec.method = method;
    spec.rank = 2;
    Rng ar(9);
    lin.attach_adapter(spec, ar);
    Tensor adapted = lin.forward(x);
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(std::abs(adapted.values()[i] - base.values()[i]) <= 1e-12);
  }
}

TEST_CASE("dora column norms equal the magnitude vector") {
  Rng rng(6);
  Linear lin = Linear::make("v_proj", 10, 7, rng);
  AdapterSpec spec;
  spec.method = PeftMethod::dora;
  spec.rank = 3;
  Rng ar(2);
  lin.attach_adapter(spec, ar);

  // perturb the low-rank factors, then the property must still hold exactly
  for (auto& v : lin.adapter->b.values()) v = rng.uniform(-0.5, 0.5);
  for (auto& v : lin.adapter->a.values()) v = rng.uniform(-0.5, 0.5);
  Tensor w = lin.effective_weight();
  Tensor norms = column_norm(w);
  for (int c = 0; c < w.cols(); ++c)
    CHECK(std::abs(norms.at(0, c) - lin.adapter->m.at(0, c)) <= 1e-9);
}

TEST_CASE("adapter gradients pass finite differences through the dora norm") {
  Rng rng(12);
  Linear lin = Linear::make("k_proj", 6, 5, rng);
  AdapterSpec spec;
  spec.method = PeftMethod::dora;
  spec.rank = 2;
  Rng ar(3);
  lin.attach_adapter(spec, ar);
  for (auto& v : lin.adapter->b.values()) v = rng.uniform(-0.4, 0.4);

  Tensor x = random_const(rng, 3, 5);
  Tensor w = random_const(rng, 3, 6);
  auto loss = [&] { return sum_all(mul(lin.forward(x), w)); };
  CHECK(max_grad_error(loss, lin.trainable_adapter_params()) <= 1e-4);
  CHECK(lin.weight.grad().empty());  // frozen base receives nothing
}

TEST_CASE("merge reproduces the adapted forward") {
  Rng rng(21);
  for (auto method : {PeftMethod::lora, PeftMethod::dora}) {
    Linear lin = Linear::make("out_proj", 9, 7, rng);
    AdapterSpec spec;
    spec.method = method;
    spec.rank = 2;
    Rng ar(4);
    lin.attach_adapter(spec, ar);
    for (auto& v : lin.adapter->b.values()) v = rng.uniform(-0.3, 0.3);
    for (auto& v : lin.adapter->a.values()) v = rng.uniform(-0.3, 0.3);

    Tensor x = random_const(rng, 5, 7);
    Tensor adapted = lin.forward(x);
    lin.merge_adapter();
    CHECK(!lin.adapter.has_value());
    Tensor merged = lin.forward(x);
    for (std::size_t i = 0; i < adapted.size(); ++i)
      CHECK(std::abs(adapted.values()[i] - merged.values()[i]) <= 1e-6);
  }
}

TEST_CASE("frozen base weights never move under training steps") {
  Rng rng(33);
  Linear lin = Linear::make("q_proj", 6, 6, rng);
  AdapterSpec spec;
  Rng ar(1);
  lin.attach_adapter(spec, ar);
  auto w0_hash = tensor_hash(lin.weight);

  AdamWOptions o;
  o.lr = 1e-2;
  AdamW opt(lin.trainable_adapter_params(), o);
  Tensor x = random_const(rng, 4, 6);
  for (int step = 0; step < 100; ++step) {
    opt.zero_grad();
    Tensor y = lin.forward(x);
    backward(mean_all(mul(y, y)));
    opt.step();
  }
  CHECK(tensor_hash(lin.weight) == w0_hash);
  CHECK(tensor_hash(lin.adapter->b) != 0);  // adapters did move
}

TEST_CASE("adapter spec validation") {
  Rng rng(3);
  Linear lin = Linear::make("q_proj", 4, 4, rng);
  AdapterSpec spec;
  spec.rank = 4;  // not < min(d, k)
  Rng ar(0);
  CHECK_THROWS(lin.attach_adapter(spec, ar));
}

TEST_CASE("checkpoint container round-trips") {
  Checkpoint c;
  c.kind = "adapter";
  AdapterSpec spec;
  spec.method = PeftMethod::dora;
  c.adapter_spec = spec;
  c.meta["seed"] = "7";
  c.tensors.push_back({"layer0.q_proj.lora_a", 2, 3, {1.0, -2.0, 3.5, 0.25, 1e-17, -4.0}});
  std::string path = "/tmp/dff_test_ckpt.bin";
  save_checkpoint(c, path);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.kind == "adapter");
  REQUIRE(back.adapter_spec.has_value());
  CHECK(back.adapter_spec->method == PeftMethod::dora);
  CHECK(back.meta.at("seed") == "7");
  REQUIRE(back.tensors.size() == 1);
  CHECK(back.tensors[0].name == c.tensors[0].name);
  CHECK(back.tensors[0].data == c.tensors[0].data);  // bit-exact
  std::remove(path.c_str());
}
