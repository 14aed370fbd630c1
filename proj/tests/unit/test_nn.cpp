#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "doctest.h"
#include "grasp/nn/checkpoint.hpp"
#include "grasp/nn/graph.hpp"
#include "grasp/nn/network.hpp"
#include "grasp/nn/optim.hpp"

using namespace grasp;
using namespace grasp::nn;

namespace {

using LossFn = std::function<Var(Graph<double>&, ParameterSet<double>&)>;

Tensor<double> random_tensor(std::vector<int> shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data) v = n(rng);
  return t;
}

double eval_loss(const LossFn& f, ParameterSet<double>& ps) {
  Graph<double> g;
  return g.value(f(g, ps))[0];
}

// Largest relative error between reverse-mode gradients and central differences (h = 1e-6).
double max_fd_error(const LossFn& f, ParameterSet<double>& ps) {
  ps.zero_grad();
  {
    Graph<double> g;
    g.backward(f(g, ps));
  }
  double worst = 0.0;
  const double h = 1e-6;
  for (auto& e : ps.entries()) {
    for (std::size_t k = 0; k < e.value.size(); ++k) {
      const double orig = e.value[k];
      e.value[k] = orig + h;
      const double up = eval_loss(f, ps);
      e.value[k] = orig - h;
      const double down = eval_loss(f, ps);
      e.value[k] = orig;
      const double fd = (up - down) / (2.0 * h);
      const double an = e.grad[k];
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("architecture presets") {
  const auto p32 = arch_preset(32);
  CHECK(p32.convs == std::vector<ConvLayer>{{4, 2, 4}, {8, 1, 2}});
  const auto p80 = arch_preset(80);
  CHECK(p80.convs == std::vector<ConvLayer>{{16, 8, 4}, {32, 4, 2}});
  const auto p128 = arch_preset(128);
  REQUIRE(p128.convs.size() == 3);
  CHECK(p128.convs[2] == ConvLayer{64, 2, 1});
  const auto p256 = arch_preset(256);
  REQUIRE(p256.convs.size() == 4);
  CHECK(p256.convs[3] == ConvLayer{72, 2, 1});
  for (int r : {32, 80, 128, 256})
    for (const auto& s : arch_preset(r).conv_shapes()) {
      CHECK(s[1] >= 1);
      CHECK(s[2] >= 1);
    }
  CHECK(p32.conv_shapes().back() == std::array<int, 3>{8, 4, 4});
  CHECK(p80.conv_shapes().back() == std::array<int, 3>{32, 8, 8});
  CHECK_THROWS_AS(arch_preset(64), Error);
  NetworkSpec tiny;
  tiny.height = tiny.width = 4;
  tiny.convs = {{2, 8, 1}};
  CHECK_THROWS_AS(tiny.validate(), Error);
  CHECK(arch_preset(80).hash() == arch_preset(80).hash());
  CHECK(arch_preset(80).hash() != arch_preset(80, 4).hash());
}

TEST_CASE("trivial forward examples") {
  ParameterSet<double> ps;
  auto& w = ps.add("w", {3, 3});
  for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
  ps.add("b", {3});
  Graph<double> g;
  const Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
  const Var y = g.dense(g.constant(x), g.param(ps, "w"), g.param(ps, "b"));
  CHECK(g.value(y).data == x.data);

  ParameterSet<double> cs;
  cs.add("w", {1, 1, 1, 1}, 2.0);
  cs.add("b", {1});
  const Tensor<double> img({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Var z = g.conv2d(g.constant(img), g.param(cs, "w"), g.param(cs, "b"), 1);
  for (std::size_t i = 0; i < 9; ++i) CHECK(g.value(z)[i] == 2.0 * img[i]);
}

TEST_CASE("batch rows are independent") {
  const auto spec = arch_preset(32);
  auto ps = init_policy_params<double>(spec, 3);
  std::mt19937_64 rng(1);
  auto one = random_tensor({1, 1, 32, 32}, rng);
  Tensor<double> two({2, 1, 32, 32});
  std::copy(one.data.begin(), one.data.end(), two.data.begin());
  std::copy(one.data.begin(), one.data.end(), two.data.begin() + 1024);
  Graph<double> g;
  const auto out = policy_forward(g, spec, ps, g.constant(two));
  const auto& m = g.value(out.mean);
  for (int j = 0; j < 4; ++j) CHECK(m[j] == m[4 + j]);
  CHECK(g.value(out.value).shape == std::vector<int>{2, 1});
  CHECK(g.value(out.log_std).shape == std::vector<int>{4});
  Graph<double> bad;
  CHECK_THROWS_AS(policy_forward(bad, spec, ps, bad.constant(Tensor<double>({1, 1, 16, 16}))), Error);
}

TEST_CASE("trivial backward examples") {
  ParameterSet<double> ps;
  ps.add("a", {2, 3}, 0.5);
  ps.add("b", {4}, -1.0);
  {
    Graph<double> g;
    g.backward(g.add(g.sum(g.param(ps, "a")), g.sum(g.param(ps, "b"))));
  }
  for (const auto& e : ps.entries())
    for (double v : e.grad.data) CHECK(v == 1.0);
  ps.zero_grad();
  {
    Graph<double> g;
    g.param(ps, "a");
    g.backward(g.constant(Tensor<double>({1}, {3.0})));
  }
  for (const auto& e : ps.entries())
    for (double v : e.grad.data) CHECK(v == 0.0);
}

TEST_CASE("gradients match finite differences for every layer type") {
  std::mt19937_64 rng(42);
  ParameterSet<double> ps;
  ps.add("x", {2, 2, 7, 7}) = random_tensor({2, 2, 7, 7}, rng);
  ps.add("c0/w", {3, 2, 3, 3}) = random_tensor({3, 2, 3, 3}, rng, 0.5);
  ps.add("c0/b", {3}) = random_tensor({3}, rng, 0.1);
  ps.add("c1/w", {2, 3, 2, 2}) = random_tensor({2, 3, 2, 2}, rng, 0.5);
  ps.add("c1/b", {2}) = random_tensor({2}, rng, 0.1);
  ps.add("d/w", {4, 8}) = random_tensor({4, 8}, rng, 0.5);
  ps.add("d/b", {4}) = random_tensor({4}, rng, 0.1);
  ps.add("e", {2, 3}) = random_tensor({2, 3}, rng);
  ps.add("row", {7}) = random_tensor({7}, rng);
  ps.add("ls", {4}) = random_tensor({4}, rng, 0.3);
  const auto actions = random_tensor({2, 4}, rng);
  const auto old_mean = random_tensor({2, 4}, rng);
  const auto old_ls = random_tensor({4}, rng, 0.3);

  auto trunk = [](Graph<double>& g, ParameterSet<double>& p) {
    Var x = g.param(p, "x");
    x = g.tanh(g.conv2d(x, g.param(p, "c0/w"), g.param(p, "c0/b"), 2));  // 3x3
    x = g.relu(g.conv2d(x, g.param(p, "c1/w"), g.param(p, "c1/b"), 1));  // 2x2
    return g.flatten(x);                                                    // [2, 8]
  };

  SUBCASE("conv, dense, activations and Gaussian terms") {
    const LossFn f = [&](Graph<double>& g, ParameterSet<double>& p) {
      const Var h = g.dense(trunk(g, p), g.param(p, "d/w"), g.param(p, "d/b"));
      const Var ls = g.param(p, "ls");
      Var loss = g.sum(g.gaussian_log_prob(actions, h, ls));
      loss = g.add(loss, g.gaussian_entropy(ls));
      loss = g.add(loss, g.mean(g.gaussian_kl(old_mean, old_ls, h, ls)));
      loss = g.add(loss, g.sum(g.square(g.exp(g.scale(h, 0.3)))));
      return loss;
    };
    CHECK(max_fd_error(f, ps) < 1e-5);
  }
  SUBCASE("elementwise and structural ops") {
    const LossFn f = [&](Graph<double>& g, ParameterSet<double>& p) {
      const Var a = g.dense(trunk(g, p), g.param(p, "d/w"), g.param(p, "d/b"));  // [2,4]
      const Var e = g.param(p, "e");                                              // [2,3]
      const Var cat = g.concat_cols(a, e);                                        // [2,7]
      const Var shifted = g.add_row(cat, g.param(p, "row"));
      const Var m = g.minimum(g.mul(shifted, shifted), g.add_scalar(g.clip(shifted, -0.7, 0.9), 0.4));
      return g.sum(g.sub(m, g.scale(cat, 0.25)));
    };
    CHECK(max_fd_error(f, ps) < 1e-5);
  }
}

TEST_CASE("network gradients match finite differences") {
  NetworkSpec spec;
  spec.channels = 2;
  spec.height = spec.width = 9;
  spec.convs = {{3, 3, 2}, {2, 2, 1}};
  spec.hidden = {6};
  spec.conv_activation = Activation::Tanh;
  spec.mean_head_gain = 1.0;
  std::mt19937_64 rng(3);
  const auto obs = random_tensor({3, 2, 9, 9}, rng);
  const auto actions = random_tensor({3, 4}, rng);
  for (bool separate : {false, true}) {
    spec.separate_value = separate;
    auto ps = init_policy_params<double>(spec, 11);
    const LossFn f = [&](Graph<double>& g, ParameterSet<double>& p) {
      const auto out = policy_forward(g, spec, p, g.constant(obs));
      return g.add(g.sum(g.gaussian_log_prob(actions, out.mean, out.log_std)), g.sum(g.square(out.value)));
    };
    CHECK(max_fd_error(f, ps) < 1e-5);
  }
  auto actor = init_actor_params<double>(spec, 5);
  const LossFn fa = [&](Graph<double>& g, ParameterSet<double>& p) {
    return g.sum(g.square(actor_forward(g, spec, p, g.constant(obs))));
  };
  CHECK(max_fd_error(fa, actor) < 1e-5);
  auto critic = init_critic_params<double>(spec, 6, 5);
  const LossFn fc = [&](Graph<double>& g, ParameterSet<double>& p) {
    return g.sum(g.square(critic_forward(g, spec, p, g.constant(obs), g.constant(actions))));
  };
  CHECK(max_fd_error(fc, critic) < 1e-5);
}

TEST_CASE("forward-mode mean derivative matches finite differences") {
  NetworkSpec spec;
  spec.height = spec.width = 8;
  spec.convs = {{3, 2, 2}};
  spec.hidden = {5};
  spec.separate_value = true;
  spec.mean_head_gain = 1.0;
  std::mt19937_64 rng(9);
  const auto obs = random_tensor({2, 1, 8, 8}, rng);
  auto ps = init_policy_params<double>(spec, 2);
  ParameterSet<double> tangent;
  for (const auto& e : ps.entries())
    if (is_policy_param(e.name)) tangent.add(e.name, e.value.shape) = random_tensor(e.value.shape, rng);
  const auto [mean, dmean] = policy_mean_jvp(spec, ps, tangent, obs);
  auto mean_at = [&](double eps) {
    auto shifted = ps;
    for (auto& e : shifted.entries())
      if (tangent.contains(e.name))
        for (std::size_t k = 0; k < e.value.size(); ++k) e.value[k] += eps * tangent.value(e.name)[k];
    Graph<double> g;
    return g.value(policy_forward(g, spec, shifted, g.constant(obs)).mean);
  };
  const auto up = mean_at(1e-6), down = mean_at(-1e-6), base = mean_at(0.0);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    CHECK(mean[k] == doctest::Approx(base[k]).epsilon(1e-12));
    CHECK(dmean[k] == doctest::Approx((up[k] - down[k]) / 2e-6).epsilon(1e-5));
  }
}

TEST_CASE("Gaussian helpers") {
  const Tensor<double> ls({2}, {std::log(0.5), 0.0});
  const std::vector<double> mean{0.1, -0.2};
  const double lp = gaussian_log_density({0.1, -0.2}, mean, {ls[0], ls[1]});
  CHECK(lp == doctest::Approx(-std::log(2.0 * std::numbers::pi) - ls[0]));
  Graph<double> g;
  const Var e = g.gaussian_entropy(g.constant(ls));
  CHECK(g.value(e)[0] == doctest::Approx(std::log(2.0 * std::numbers::pi * std::numbers::e) + ls[0]));

  std::mt19937_64 rng(4);
  double s0 = 0, s1 = 0, q0 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto a = gaussian_sample(mean.data(), ls, rng);
    s0 += a[0];
    s1 += a[1];
    q0 += (a[0] - 0.1) * (a[0] - 0.1);
  }
  CHECK(s0 / n == doctest::Approx(0.1).epsilon(0.05));
  CHECK(s1 / n == doctest::Approx(-0.2).epsilon(0.05));
  CHECK(std::sqrt(q0 / n) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("initialization variance") {
  NetworkSpec spec;
  spec.height = spec.width = 32;
  spec.convs = {};
  spec.hidden = {256};
  const auto ps = init_policy_params<double>(spec, 1);
  const auto& w = ps.value("pi/fc0/w");
  double sq = 0.0;
  for (double v : w.data) sq += v * v;
  CHECK(sq / w.size() == doctest::Approx(1.0 / 1024.0).epsilon(0.03));
  for (double v : ps.value("pi/fc0/b").data) CHECK(v == 0.0);
  for (double v : ps.value("pi/log_std").data) CHECK(std::exp(v) == doctest::Approx(0.5));
  CHECK(init_policy_params<double>(spec, 1).flat_values() == ps.flat_values());
  CHECK_FALSE(init_policy_params<double>(spec, 2).flat_values() == ps.flat_values());
}

TEST_CASE("checkpoint round trip") {
  const auto spec = arch_preset(32);
  const auto ps = init_policy_params<float>(spec, 7);
  const auto dir = std::filesystem::temp_directory_path() / "grasp_nn_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ck.bin";
  save_checkpoint(path, ps, spec.hash());
  const auto ck = load_checkpoint(path);
  CHECK(ck.spec_hash == spec.hash());
  REQUIRE(ck.params.entries().size() == ps.entries().size());
  for (std::size_t i = 0; i < ps.entries().size(); ++i) {
    CHECK(ck.params.entries()[i].name == ps.entries()[i].name);
    CHECK(ck.params.entries()[i].value == ps.entries()[i].value);
  }
  {
    std::ofstream os(dir / "junk.bin", std::ios::binary);
    os << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.bin"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), Error);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("optimizer utilities") {
  ParameterSet<double> ps;
  ps.add("a", {2}, 1.0);
  ps.grad("a").data = {3.0, 4.0};
  CHECK(clip_grad_norm(ps, 1.0) == doctest::Approx(5.0));
  CHECK(ps.grad("a")[0] == doctest::Approx(0.6));
  CHECK(ps.grad("a")[1] == doctest::Approx(0.8));

  // Adam's first step moves each coordinate by lr against the gradient sign.
  Adam<double> adam;
  adam.step(ps, 0.1);
  CHECK(ps.value("a")[0] == doctest::Approx(0.9));
  CHECK(ps.value("a")[1] == doctest::Approx(0.9));
  CHECK(adam.steps() == 1);

  ParameterSet<double> target;
  target.add("a", {2}, 0.0);
  soft_update(target, ps, 0.1);
  CHECK(target.value("a")[0] == doctest::Approx(0.09));

  sgd_step(ps, 1.0, [](const std::string& n) { return n != "a"; });
  CHECK(ps.value("a")[0] == doctest::Approx(0.9));
  CHECK(all_finite(ps));
  ps.value("a")[1] = std::nan("");
  CHECK_FALSE(all_finite(ps));

  // Adam minimizes a quadratic.
  ParameterSet<double> q;
  q.add("x", {3}) = Tensor<double>({3}, {2.0, -1.0, 0.5});
  Adam<double> opt;
  for (int i = 0; i < 3000; ++i) {
    q.zero_grad();
    Graph<double> g;
    g.backward(g.sum(g.square(g.add_scalar(g.param(q, "x"), -0.3))));
    opt.step(q, 0.01);
  }
  for (double v : q.value("x").data) CHECK(v == doctest::Approx(0.3).epsilon(1e-3));
}
