// Acceptance suite: one PASS/FAIL line per criterion. Run all, or one with --criterion N.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grasp/curriculum.hpp"
#include "grasp/env.hpp"
#include "grasp/geom.hpp"
#include "grasp/harness/config.hpp"
#include "grasp/harness/evaluate.hpp"
#include "grasp/harness/train.hpp"
#include "grasp/nn/graph.hpp"
#include "grasp/nn/network.hpp"
#include "grasp/render.hpp"
#include "grasp/reward.hpp"
#include "grasp/scene.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using namespace grasp;
using namespace grasp::harness;

namespace {

// ---- pinned tolerances ------------------------------------------------------------------------

constexpr double kRewardTol = 1e-12;
constexpr double kHalfLsb = 0.0031373;
constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-5;
// Relative error is |fd - an| / max(|fd|, |an|, floor); below the floor the check is absolute.
constexpr double kFdDenomFloor = 1e-3;
constexpr double kRayTol = 1e-9;
constexpr double kOverlapBand = 1e-3;
constexpr double kOverlapAgreement = 0.999;
constexpr double kReachSuccess = 0.8;
constexpr int kReachSeedsNeeded = 2;
constexpr double kBaselineFactor = 5.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("grasp_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig load_preset(const std::string& file) { return load_config(fs::path(GRASP_SOURCE_DIR) / "configs" / file); }

// ---- 1: reward examples -----------------------------------------------------------------------

Outcome reward_examples() {
  struct Ex {
    const char* name;
    double got, want;
  };
  const RewardConstants k;
  StepGeometry idle;
  idle.prev_pos = idle.cur_pos = {0.0, 0.6, 0.6};
  idle.target = {0.0, 0.6, 0.15};
  idle.z_ee = {0.0, 0.0, -1.0};
  StepGeometry success = idle;
  success.prev_pos = {0.0, 0.6, 0.3};
  success.cur_pos = {0.0, 0.6, 0.2};
  success.goal = GoalCheck{true, true};
  StepGeometry touching = success;
  touching.report = ContactReport{true, 0};
  StepGeometry hit = idle;
  hit.report = ContactReport{false, 1};
  const auto r_idle = total_reward(idle), r_succ = total_reward(success), r_touch = total_reward(touching);
  const auto r_hit = total_reward(hit);

  const std::vector<Ex> ex{
      {"k1", k.k1, 0.03},
      {"k2", k.k2, 0.01},
      {"touch constant", k.touch, 0.1},
      {"collision constant", k.collision, -0.1},
      {"pos constant", k.pos, 0.5},
      {"rot constant", k.rot, 0.5},
      {"touched", reward_touch(ContactReport{true, 0}), 0.1},
      {"touched with collisions", reward_touch(ContactReport{true, 3}), 0.1},
      {"not touched", reward_touch(ContactReport{false, 0}), 0.0},
      {"0 collisions", reward_collision(ContactReport{false, 0}), 0.0},
      {"1 collision", reward_collision(ContactReport{false, 1}), -0.1},
      {"3 collisions", reward_collision(ContactReport{false, 3}), -0.3},
      {"goal (T,T)", reward_goal(true, true), 1.0},
      {"goal (T,F)", reward_goal(true, false), 0.5},
      {"goal (F,T)", reward_goal(false, true), 0.0},
      {"goal (F,F)", reward_goal(false, false), 0.0},
      {"approach step", reward_fmt({0, 0, 0}, {0, 0, 0.1}, {0, 0, 1}), 0.003},
      {"no motion", reward_fmt({0, 0, 0.1}, {0, 0, 0.1}, {0, 0, 1}), 0.0},
      {"moving away", reward_fmt({0, 0, 0.1}, {0, 0, 0}, {0, 0, 1}), -0.003},
      {"facing anti-parallel", reward_fft({0, 0, -1}, {0, 0, 1}), 0.01},
      {"facing parallel", reward_fft({0, 0, 1}, {0, 0, 1}), -0.01},
      {"facing orthogonal", reward_fft({1, 0, 0}, {0, 0, 1}), 0.0},
      {"idle total", r_idle.total, r_idle.r_fft},
      {"idle facing", r_idle.r_fft, 0.01},
      {"success total", r_succ.total, 1.0 + r_succ.r_fmt + r_succ.r_fft},
      {"success approach", r_succ.r_fmt, 0.003},
      {"success with touch", r_touch.total, 1.0 + 0.1 + r_touch.r_fmt + r_touch.r_fft},
      {"one collision, no motion", r_hit.total, -0.1 + r_hit.r_fft},
  };
  double worst = 0.0;
  std::string bad;
  for (const auto& e : ex) {
    const double err = std::abs(e.got - e.want);
    if (err > worst) worst = err;
    if (err > kRewardTol) bad += std::string(" ") + e.name;
  }
  return {bad.empty(), fmt("%zu examples, max |err| %.2e (tol %.0e)", ex.size(), worst, kRewardTol) +
                           (bad.empty() ? "" : "; failing:" + bad)};
}

// ---- 2: quantization round trip ---------------------------------------------------------------

Outcome quantization_fidelity() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.4, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double v = u(rng);
    const double back = dequantize_value(quantize_value(v, 0.4, 2.0), 0.4, 2.0);
    worst = std::max(worst, std::abs(back - v));
  }
  return {worst <= kHalfLsb, fmt("1e6 depths, max |deq(q(v)) - v| = %.7f m (bound %.7f)", worst, kHalfLsb)};
}

// ---- 3: finite-difference gradient checks -----------------------------------------------------

using nn::Graph;
using nn::ParameterSet;
using nn::Tensor;
using nn::Var;

Tensor<double> random_tensor(const std::vector<int>& shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor<double> t(shape);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data) v = n(rng);
  return t;
}

// Moves values sitting within `gap` of a kink at `at` out of its neighbourhood.
void keep_off(Tensor<double>& t, double at, double gap = 1e-3) {
  for (auto& v : t.data)
    if (std::abs(v - at) < gap) v = at + (v < at ? -2.0 * gap : 2.0 * gap);
}

struct GradCase {
  std::string name;
  // Fills the parameter set for one random instance.
  std::function<void(ParameterSet<double>&, std::mt19937_64&)> init;
  std::function<Var(Graph<double>&, ParameterSet<double>&)> build;
};

// loss = sum(w * (out - out0)) with out0 the unperturbed output, so entries the perturbation does
// not reach cancel exactly.
struct FdError {
  double rel = 0.0;
  double abs = 0.0;
};

FdError max_fd_error(const GradCase& c, std::mt19937_64& rng) {
  ParameterSet<double> ps;
  c.init(ps, rng);
  Tensor<double> out0;
  {
    Graph<double> g;
    out0 = g.value(c.build(g, ps));
  }
  const Tensor<double> w = random_tensor(out0.shape, rng);
  auto loss = [&](Graph<double>& g) {
    const Var out = c.build(g, ps);
    return g.sum(g.mul(g.sub(out, g.constant(out0)), g.constant(w)));
  };
  ps.zero_grad();
  {
    Graph<double> g;
    g.backward(loss(g));
  }
  auto eval = [&] {
    Graph<double> g;
    return g.value(loss(g))[0];
  };
  FdError worst;
  for (auto& e : ps.entries()) {
    for (std::size_t k = 0; k < e.value.size(); ++k) {
      const double orig = e.value[k];
      e.value[k] = orig + kFdStep;
      const double up = eval();
      e.value[k] = orig - kFdStep;
      const double down = eval();
      e.value[k] = orig;
      const double fd = (up - down) / (2.0 * kFdStep);
      const double an = e.grad[k];
      worst.abs = std::max(worst.abs, std::abs(fd - an));
      worst.rel = std::max(worst.rel, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), kFdDenomFloor}));
    }
  }
  return worst;
}

std::vector<GradCase> gradient_cases() {
  using PS = ParameterSet<double>;
  auto set = [](PS& ps, const std::string& name, Tensor<double> t) { ps.add(name, t.shape) = std::move(t); };
  auto one = [&](std::vector<int> shape, double kink = NAN) {
    return [=](PS& ps, std::mt19937_64& rng) {
      auto t = random_tensor(shape, rng);
      if (!std::isnan(kink)) keep_off(t, kink);
      set(ps, "a", std::move(t));
    };
  };
  auto two = [&](std::vector<int> sa, std::vector<int> sb) {
    return [=](PS& ps, std::mt19937_64& rng) {
      set(ps, "a", random_tensor(sa, rng));
      set(ps, "b", random_tensor(sb, rng));
    };
  };
  auto p = [](Graph<double>& g, PS& ps, const char* n) { return g.param(ps, n); };

  std::vector<GradCase> cases;
  cases.push_back({"dense", [=](PS& ps, std::mt19937_64& rng) {
                     set(ps, "x", random_tensor({3, 5}, rng));
                     set(ps, "w", random_tensor({4, 5}, rng, 0.5));
                     set(ps, "b", random_tensor({4}, rng, 0.1));
                   },
                   [=](Graph<double>& g, PS& ps) { return g.dense(p(g, ps, "x"), p(g, ps, "w"), p(g, ps, "b")); }});
  for (int stride : {1, 2}) {
    cases.push_back({"conv2d stride " + std::to_string(stride),
                     [=](PS& ps, std::mt19937_64& rng) {
                       set(ps, "x", random_tensor({2, 2, 6, 6}, rng));
                       set(ps, "w", random_tensor({3, 2, 3, 3}, rng, 0.5));
                       set(ps, "b", random_tensor({3}, rng, 0.1));
                     },
                     [=](Graph<double>& g, PS& ps) {
                       return g.conv2d(p(g, ps, "x"), p(g, ps, "w"), p(g, ps, "b"), stride);
                     }});
  }
  cases.push_back({"flatten", one({2, 3, 2, 2}), [=](Graph<double>& g, PS& ps) { return g.flatten(p(g, ps, "a")); }});
  cases.push_back({"concat_cols", two({3, 2}, {3, 4}),
                   [=](Graph<double>& g, PS& ps) { return g.concat_cols(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back({"relu", one({4, 6}, 0.0), [=](Graph<double>& g, PS& ps) { return g.relu(p(g, ps, "a")); }});
  cases.push_back({"tanh", one({4, 6}), [=](Graph<double>& g, PS& ps) { return g.tanh(p(g, ps, "a")); }});
  cases.push_back({"exp", one({4, 6}), [=](Graph<double>& g, PS& ps) { return g.exp(p(g, ps, "a")); }});
  cases.push_back({"square", one({4, 6}), [=](Graph<double>& g, PS& ps) { return g.square(p(g, ps, "a")); }});
  cases.push_back({"scale", one({4, 6}), [=](Graph<double>& g, PS& ps) { return g.scale(p(g, ps, "a"), -1.7); }});
  cases.push_back(
      {"add_scalar", one({4, 6}), [=](Graph<double>& g, PS& ps) { return g.add_scalar(p(g, ps, "a"), 0.3); }});
  cases.push_back({"clip",
                   [=](PS& ps, std::mt19937_64& rng) {
                     auto t = random_tensor({4, 6}, rng);
                     keep_off(t, -0.5);
                     keep_off(t, 0.8);
                     set(ps, "a", std::move(t));
                   },
                   [=](Graph<double>& g, PS& ps) { return g.clip(p(g, ps, "a"), -0.5, 0.8); }});
  cases.push_back(
      {"add", two({3, 4}, {3, 4}), [=](Graph<double>& g, PS& ps) { return g.add(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back(
      {"sub", two({3, 4}, {3, 4}), [=](Graph<double>& g, PS& ps) { return g.sub(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back(
      {"mul", two({3, 4}, {3, 4}), [=](Graph<double>& g, PS& ps) { return g.mul(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back({"minimum",
                   [=](PS& ps, std::mt19937_64& rng) {
                     auto a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
                     for (std::size_t i = 0; i < a.size(); ++i)
                       if (std::abs(a[i] - b[i]) < 1e-3) a[i] += 2e-3;
                     set(ps, "a", std::move(a));
                     set(ps, "b", std::move(b));
                   },
                   [=](Graph<double>& g, PS& ps) { return g.minimum(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back({"add_row", two({3, 4}, {4}),
                   [=](Graph<double>& g, PS& ps) { return g.add_row(p(g, ps, "a"), p(g, ps, "b")); }});
  cases.push_back({"sum", one({3, 4}), [=](Graph<double>& g, PS& ps) { return g.sum(p(g, ps, "a")); }});
  cases.push_back({"mean", one({3, 4}), [=](Graph<double>& g, PS& ps) { return g.mean(p(g, ps, "a")); }});

  // Gaussian terms. The actions and the old policy are fixed per instance.
  auto actions = std::make_shared<Tensor<double>>(), old_mean = std::make_shared<Tensor<double>>(),
       old_ls = std::make_shared<Tensor<double>>();
  auto gaussian_init = [=](PS& ps, std::mt19937_64& rng) {
    set(ps, "mean", random_tensor({3, kActionDim}, rng));
    set(ps, "log_std", random_tensor({kActionDim}, rng, 0.3));
    *actions = random_tensor({3, kActionDim}, rng);
    *old_mean = random_tensor({3, kActionDim}, rng);
    *old_ls = random_tensor({kActionDim}, rng, 0.3);
  };
  cases.push_back({"gaussian log-density", gaussian_init, [=](Graph<double>& g, PS& ps) {
                     return g.gaussian_log_prob(*actions, p(g, ps, "mean"), p(g, ps, "log_std"));
                   }});
  cases.push_back({"gaussian entropy", gaussian_init,
                   [=](Graph<double>& g, PS& ps) { return g.gaussian_entropy(p(g, ps, "log_std")); }});
  cases.push_back({"gaussian kl", gaussian_init, [=](Graph<double>& g, PS& ps) {
                     return g.gaussian_kl(*old_mean, *old_ls, p(g, ps, "mean"), p(g, ps, "log_std"));
                   }});

  // The stochastic policy density through the whole network, for both value-trunk layouts.
  for (bool separate : {false, true}) {
    nn::NetworkSpec spec;
    spec.channels = 1;
    spec.height = spec.width = 8;
    spec.convs = {{2, 3, 2}, {3, 2, 1}};
    spec.hidden = {5};
    spec.conv_activation = nn::Activation::Tanh;
    spec.mean_head_gain = 1.0;
    spec.separate_value = separate;
    auto obs = std::make_shared<Tensor<double>>();
    auto acts = std::make_shared<Tensor<double>>();
    cases.push_back({separate ? "policy log-density (separate value trunk)" : "policy log-density (shared trunk)",
                     [=](PS& ps, std::mt19937_64& rng) {
                       ps = nn::init_policy_params<double>(spec, rng());
                       *obs = random_tensor({2, 1, 8, 8}, rng);
                       *acts = random_tensor({2, kActionDim}, rng);
                     },
                     [=](Graph<double>& g, PS& ps) {
                       const auto out = nn::policy_forward(g, spec, ps, g.constant(*obs));
                       return g.gaussian_log_prob(*acts, out.mean, out.log_std);
                     }});
  }
  return cases;
}

Outcome gradient_checks() {
  std::mt19937_64 rng(77);
  std::string bad;
  FdError overall;
  const auto cases = gradient_cases();
  for (const auto& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto e = max_fd_error(c, rng);
      worst = std::max(worst, e.rel);
      overall.abs = std::max(overall.abs, e.abs);
    }
    overall.rel = std::max(overall.rel, worst);
    if (!(worst < kFdRelTol)) bad += " " + c.name + fmt("(%.1e)", worst);
  }
  return {bad.empty(), fmt("%zu cases x 100 instances, worst relative error %.2e (tol %.0e, denominator floor "
                           "%.0e), worst absolute error %.1e",
                           cases.size(), overall.rel, kFdRelTol, kFdDenomFloor, overall.abs) +
                           (bad.empty() ? "" : "; failing:" + bad)};
}

// ---- 4: geometry oracles ----------------------------------------------------------------------

Outcome geometry_oracles() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> count(1, 3);
  std::normal_distribution<double> n01(0.0, 1.0);

  // Ray caster against per-face plane intersection.
  long rays = 0, ray_fail = 0;
  double ray_worst = 0.0;
  for (int scene = 0; scene < 10000; ++scene) {
    std::vector<Obb> boxes;
    for (int i = count(rng); i > 0; --i) boxes.push_back(oracle::random_obb(rng, 0.5, 0.02, 0.3));
    for (int r = 0; r < 8; ++r) {
      const Vec3 origin = oracle::random_vec(rng, -1.5, 1.5);
      // Aim near a random box so most rays hit something.
      const Obb& aim = boxes[static_cast<std::size_t>(r) % boxes.size()];
      const Vec3 dir = normalize(aim.center + oracle::random_vec(rng, -0.3, 0.3) - origin);
      std::optional<double> got, want;
      for (const auto& b : boxes) {
        if (b.contains(origin)) continue;
        if (const auto t = ray_obb_intersect(origin, dir, b); t && (!got || *t < *got)) got = t;
        if (const auto t = oracle::face_plane_hit(origin, dir, b); t && (!want || *t < *want)) want = t;
      }
      ++rays;
      if (got.has_value() != want.has_value()) {
        ++ray_fail;
      } else if (got) {
        const double e = std::abs(*got - *want);
        ray_worst = std::max(ray_worst, e);
        if (e >= kRayTol) ++ray_fail;
      }
    }
  }

  // Rendered depth of sampled episodes against the same oracle.
  long pixels = 0, pixel_fail = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto ep = sample_episode(seed, RandomizationRanges{});
    const auto cam = episode_intrinsics(ep, 32, 32, 60.0);
    const auto img = render_depth(ep, cam);
    std::vector<Obb> scene{ep.support};
    for (const auto& b : ep.blocks)
      for (const auto& part : b.world_parts()) scene.push_back(part);
    for (int row = 0; row < 32; ++row) {
      for (int col = 0; col < 32; ++col) {
        const auto ray = pixel_ray(ep.camera.pose, cam, row, col);
        std::optional<double> t;
        for (const auto& b : scene)
          if (const auto h = oracle::face_plane_hit(ray.origin, ray.dir, b); h && (!t || *h < *t)) t = h;
        const double want = t ? std::clamp(*t * ray.depth_per_length, cam.near, cam.far) : cam.far;
        const double e = std::abs(img.at(row, col) - want);
        ray_worst = std::max(ray_worst, e);
        ++pixels;
        if (e >= kRayTol) ++pixel_fail;
      }
    }
  }

  // Overlap test against points sampled along every edge of both boxes.
  auto edge_points_inside = [](const Obb& from, const Obb& other, int per_edge) {
    const std::array<double, 3> h{from.half_extents.x, from.half_extents.y, from.half_extents.z};
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (double su : {-1.0, 1.0}) {
        for (double sv : {-1.0, 1.0}) {
          for (int i = 0; i <= per_edge; ++i) {
            std::array<double, 3> local{};
            local[axis] = h[axis] * (2.0 * i / per_edge - 1.0);
            local[u] = su * h[u];
            local[v] = sv * h[v];
            const Vec3 p = from.center + from.rotation.rotate({local[0], local[1], local[2]});
            if (other.contains(p)) return true;
          }
        }
      }
    }
    return false;
  };
  int considered = 0, agree = 0, banded = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const Obb a = oracle::random_obb(rng, 0.3, 0.03, 0.2), b = oracle::random_obb(rng, 0.3, 0.03, 0.2);
    const double d = kOverlapBand / 2.0;
    if (oracle::overlap_by_vertices(oracle::grown(a, d), oracle::grown(b, d)) !=
        oracle::overlap_by_vertices(oracle::grown(a, -d), oracle::grown(b, -d))) {
      ++banded;
      continue;
    }
    ++considered;
    // 24 edges x 417 samples ~ 1e4 points per pair.
    const bool sampled = edge_points_inside(a, b, 416) || edge_points_inside(b, a, 416);
    if (sampled == obb_overlap(a, b)) ++agree;
  }
  const double agreement = considered ? static_cast<double>(agree) / considered : 0.0;
  const bool pass = ray_fail == 0 && pixel_fail == 0 && considered > 0 && agreement >= kOverlapAgreement;
  return {pass, fmt("rays %ld (fail %ld), pixels %ld (fail %ld), max |dt| %.1e (tol %.0e); overlap agreement "
                    "%d/%d = %.4f (need %.3f, %d pairs in band)",
                    rays, ray_fail, pixels, pixel_fail, ray_worst, kRayTol, agree, considered, agreement,
                    kOverlapAgreement, banded)};
}

// ---- 5: PPO on the reduced reach task ---------------------------------------------------------

Outcome ppo_reach() {
  int reached = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto cfg = load_preset("reach32_ppo.json");
    cfg.seed = seed;
    cfg.out_dir = scratch("reach_" + std::to_string(seed)).string();
    const auto r = train(cfg);
    const bool ok = r.episodes >= cfg.stop_window && r.trailing_success >= kReachSuccess;
    reached += ok ? 1 : 0;
    detail += fmt("%sseed %llu: %.3f after %ld steps", detail.empty() ? "" : ", ",
                  static_cast<unsigned long long>(seed), r.trailing_success, r.env_steps);
    fs::remove_all(cfg.out_dir);
  }
  return {reached >= kReachSeedsNeeded,
          fmt("%d/3 seeds at >= %.2f success over the last 500 episodes (need %d); ", reached, kReachSuccess,
              kReachSeedsNeeded) +
              detail};
}

// ---- 6: algorithm sanity on the goal-offset variant -------------------------------------------

Outcome algorithm_sanity() {
  const auto base = load_preset("goal_vector.json");
  const int episodes = 200;
  const double baseline = evaluate(base, random_policy(), episodes, base.eval_seed).mean_return;
  bool pass = baseline > 0.0;
  std::string detail = fmt("random baseline %.4f; ", baseline);
  std::vector<std::pair<double, std::string>> finals;
  for (auto algo : {Algorithm::Ppo, Algorithm::Trpo, Algorithm::Ddpg}) {
    auto cfg = base;
    cfg.algorithm = algo;
    cfg.seed = 1;
    cfg.out_dir = scratch("sanity_" + to_string(algo)).string();
    train(cfg);
    const auto rep = evaluate(cfg, checkpoint_policy(cfg, fs::path(cfg.out_dir) / "final.bin"), episodes, cfg.eval_seed);
    const double ratio = rep.mean_return / baseline;
    pass = pass && ratio >= kBaselineFactor;
    detail += fmt("%s %.4f (x%.2f, success %.3f); ", to_string(algo).c_str(), rep.mean_return, ratio, rep.success_rate);
    finals.emplace_back(rep.mean_return, to_string(algo));
    fs::remove_all(cfg.out_dir);
  }
  const bool ordered = finals[0].first >= finals[1].first && finals[1].first >= finals[2].first;
  detail += fmt("need x%.1f each; ppo >= trpo >= ddpg: %s (reported only)", kBaselineFactor, ordered ? "yes" : "no");
  return {pass, detail};
}

// ---- 7: curriculum state machine --------------------------------------------------------------

Outcome curriculum_machine() {
  const auto schedule = build_schedule();
  bool ok = schedule.size() == 19;
  ok = ok && schedule[18].xy_tol == 0.01 && schedule[18].yaw_tol == 2.0;
  ok = ok && schedule[0].xy_tol == 0.10 && schedule[0].yaw_tol == 10.0;
  ok = ok && std::abs(schedule[9].xy_tol - 0.055) < 1e-12 && std::abs(schedule[9].yaw_tol - 6.0) < 1e-12;
  bool monotone = true;
  for (std::size_t i = 1; i < schedule.size(); ++i)
    monotone = monotone && schedule[i].xy_tol <= schedule[i - 1].xy_tol && schedule[i].yaw_tol <= schedule[i - 1].yaw_tol;

  // Window of 4: means of four equal values are exact, so ties with a threshold stay ties.
  const double t3 = schedule[2].advance_threshold;
  const std::vector<double> pushes{1, 1, 1, 1, -1, -1, -1, -1, 5, t3, t3, t3, t3, 1, 0.5, 0.5, 0.5, 0.5};
  const std::vector<int> expected{1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 5};
  CurriculumState s;
  s.window_size = 4;
  std::vector<int> got;
  for (double r : pushes) {
    s = update(s, r, schedule);
    got.push_back(s.lesson);
  }
  CurriculumState top;
  top.window_size = 4;
  top.lesson = 19;
  for (int i = 0; i < 12; ++i) top = update(top, 100.0, schedule);

  std::ostringstream traj;
  for (int l : got) traj << l;
  const bool pass = ok && monotone && got == expected && top.lesson == 19;
  return {pass, "lesson 19 = " + fmt("%.2f m / %.1f deg", schedule[18].xy_tol, schedule[18].yaw_tol) +
                    ", monotone " + (monotone ? "yes" : "no") + ", trajectory " + traj.str() +
                    (got == expected ? " (expected)" : " (MISMATCH)") + ", cap " + std::to_string(top.lesson)};
}

// ---- 8: determinism ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Outcome determinism() {
  std::string detail;
  bool pass = true;
  for (auto algo : {Algorithm::Ppo, Algorithm::Trpo, Algorithm::Ddpg}) {
    RunConfig cfg;
    cfg.algorithm = algo;
    cfg.seed = 11;
    cfg.total_steps = 1000;
    cfg.steps_per_update = 250;
    cfg.checkpoint_every = 1;
    cfg.record_wall_clock = false;
    cfg.ddpg.warmup = 200;
    cfg.ddpg.batch = 32;
    const auto a = scratch("det_a"), b = scratch("det_b");
    cfg.out_dir = a.string();
    train(cfg);
    cfg.out_dir = b.string();
    train(cfg);
    int files = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file() || e.path().filename() == "config.json") continue;
      ++files;
      const auto other = b / fs::relative(e.path(), a);
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    pass = pass && differ == 0 && files > 2;
    detail += fmt("%s %d files, %d differ; ", to_string(algo).c_str(), files, differ);
    fs::remove_all(a);
    fs::remove_all(b);
  }
  return {pass, detail + "1000 steps each, metrics.csv and every checkpoint compared byte for byte"};
}

// ---- 9: frame grab and depth+rgb --------------------------------------------------------------

Outcome frame_modes() {
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int within = 0, episodes = 0;
  for (auto mode : {ObservationMode::Depth, ObservationMode::DepthRgb}) {
    EnvConfig ec;
    ec.observation = mode;
    ec.frame_grab = true;
    Env env(ec);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto first = env.reset(seed, Lesson{}).observation;
      bool same = true;
      while (!env.done()) same = same && env.step(Action::clamped({u(rng), u(rng), u(rng), u(rng)})).observation == first;
      within += same ? 1 : 0;
      ++episodes;
      if (mode == ObservationMode::DepthRgb) {
        EnvConfig dc = ec;
        dc.observation = ObservationMode::Depth;
        Env depth_env(dc);
        const auto d = depth_env.reset(seed, Lesson{}).observation;
        const std::size_t plane = static_cast<std::size_t>(d.height) * d.width;
        const bool layout = first.channels == 4 && d.channels == 1 &&
                            std::equal(d.values.begin(), d.values.end(), first.values.begin()) &&
                            first.values.size() == 4 * plane;
        pass = pass && layout;
      }
    }
  }
  pass = pass && within == episodes;
  detail += fmt("frame-grab identical in %d/%d episodes; depth+rgb 4 channels with depth first: %s; oracle success ",
                within, episodes, pass ? "yes" : "no");
  for (auto mode : {ObservationMode::Depth, ObservationMode::DepthRgb}) {
    RunConfig cfg;
    cfg.env.observation = mode;
    cfg.env.frame_grab = true;
    const auto rep = evaluate(cfg, oracle_policy(), 50, cfg.eval_seed);
    pass = pass && rep.success_rate == 1.0;
    detail += fmt("%s %.2f ", to_string(mode).c_str(), rep.success_rate);
  }
  return {pass, detail};
}

// ---- 10: collision and touch accounting -------------------------------------------------------

Block box_at(Vec3 xy, Vec3 dims, double yaw = 0.0) {
  Block b;
  b.shape = compose_shape(ShapeKind::Box, dims, 0.3 * std::min(dims.x, dims.y));
  b.pose = Pose{{xy.x, xy.y, 0.1 + dims.z / 2.0}, Rotation::from_yaw_deg(yaw)};
  return b;
}

Outcome obstacle_accounting() {
  EpisodeConfig scene;
  scene.support = RandomizationRanges{}.support;
  scene.blocks = {box_at({0.0, 0.6, 0}, {0.2, 0.1, 0.05}), box_at({0.16, 0.6, 0}, {0.1, 0.08, 0.03}, 20.0),
                  box_at({-0.14, 0.62, 0}, {0.06, 0.12, 0.09}, -35.0)};
  scene.target_index = 0;

  // Brute force: every (tool piece, non-target block) pair and every tool piece against the support.
  auto oracle_counts = [&](const ToolState& tool) {
    int collisions = 0;
    bool touch = false;
    for (std::size_t piece = 0; piece < tool.body.size(); ++piece) {
      for (std::size_t bi = 0; bi < scene.blocks.size(); ++bi) {
        bool hit = false;
        for (const auto& part : scene.blocks[bi].world_parts())
          hit = hit || oracle::overlap_by_vertices(tool.body[piece], part);
        if (static_cast<int>(bi) == scene.target_index) {
          if (piece == 0 && hit) touch = true;
        } else if (hit) {
          ++collisions;
        }
      }
      if (oracle::overlap_by_vertices(tool.body[piece], scene.support)) ++collisions;
    }
    return std::pair{touch, collisions};
  };

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ux(-0.25, 0.25), uy(0.5, 0.7), uz(0.08, 0.2), uyaw(-180.0, 180.0);
  int cases = 0, mismatched = 0, touched_with_collision = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto tool = tool_from_pose(Pose{{ux(rng), uy(rng), uz(rng)}, Rotation::from_yaw_deg(uyaw(rng))});
    const auto [touch, collisions] = oracle_counts(tool);
    StepGeometry s;
    s.report = classify_contacts(tool, scene);
    s.prev_pos = s.cur_pos = tool.tooltip;
    s.target = goal_region(scene, Lesson{}).center;
    s.z_ee = tool.z_ee;
    const auto r = total_reward(s);
    ++cases;
    if (touch && collisions > 0) ++touched_with_collision;
    if (std::abs(r.r_collision - (-0.1 * collisions)) > kRewardTol || std::abs(r.r_touch - (touch ? 0.1 : 0.0)) > kRewardTol)
      ++mismatched;
  }

  // Holding a pose inside the support costs -0.1 on every step, not once per episode.
  EnvConfig ec;
  ec.observation = ObservationMode::GoalVector;
  ec.ranges.block_count_min = ec.ranges.block_count_max = 1;
  ec.ranges.block_x = ec.ranges.block_y = Interval{0.0, 0.0};
  ec.ranges.block_yaw = Interval{0.0, 0.0};
  ec.ranges.kind_weights = {1.0, 0.0, 0.0};
  ec.bounds.z = Interval{0.09, 0.5};
  Env env(ec);
  env.reset(3, Lesson{});
  const Action into_support = pose_to_action({0.3, 0.8, 0.095}, 0.0, ec.bounds);
  int steps = 0, per_step_ok = 0;
  while (!env.done()) {
    const auto r = env.step(into_support);
    ++steps;
    if (std::abs(r.reward.r_collision + 0.1) <= kRewardTol && r.info.contacts.undesired_collisions == 1) ++per_step_ok;
  }
  const bool pass = mismatched == 0 && touched_with_collision > 0 && per_step_ok == steps && steps == ec.max_steps;
  return {pass, fmt("%d constructed poses, %d mismatches vs brute-force pair count (%d touching while colliding); "
                    "support contact charged on %d/%d steps",
                    cases, mismatched, touched_with_collision, per_step_ok, steps)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double limit_s;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "reward unit suite", reward_examples, 1.0},
      {2, "quantization half-LSB bound", quantization_fidelity, 5.0},
      {3, "finite-difference gradients", gradient_checks, 60.0},
      {4, "geometry oracles", geometry_oracles, 60.0},
      {5, "PPO reduced reach task", ppo_reach, 1800.0},
      {6, "algorithm sanity vs random", algorithm_sanity, 900.0},
      {7, "curriculum state machine", curriculum_machine, 1.0},
      {8, "single-worker determinism", determinism, 120.0},
      {9, "frame-grab and depth+rgb", frame_modes, 60.0},
      {10, "obstacle accounting", obstacle_accounting, 1.0},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.limit_s;
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %s %s: %s (%.2f s, limit %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
