#include "grasp/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include "grasp/nn/checkpoint.hpp"
#include "json.hpp"

namespace grasp::harness {

using json = nlohmann::json;

std::string to_json(const EvalReport& r) {
  json j;
  j["episodes"] = r.episodes;
  j["success_rate"] = r.success_rate;
  j["mean_pos_error"] = r.mean_pos_error;
  j["p95_pos_error"] = r.p95_pos_error;
  j["mean_yaw_error"] = r.mean_yaw_error;
  j["p95_yaw_error"] = r.p95_yaw_error;
  j["mean_return"] = r.mean_return;
  return j.dump(2);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

EvalReport evaluate(const RunConfig& cfg, const PolicyFn& policy, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error(ErrorKind::Config, "evaluation needs at least one episode");
  cfg.validate();
  Env env(cfg.env);
  const Lesson lesson = lesson_at(cfg, cfg.curriculum.start_lesson);
  Rng rng(seed ^ 0x9FB21C651E98DF25ULL);
  std::vector<double> pos, yaw;
  EvalReport r;
  r.episodes = episodes;
  int successes = 0;
  for (int i = 0; i < episodes; ++i) {
    const auto s = run_episode(env, episode_seed(seed, static_cast<std::uint64_t>(i), kEvalStream), lesson, policy, rng);
    successes += s.success ? 1 : 0;
    r.mean_return += s.episode_return;
    pos.push_back(s.pos_error);
    yaw.push_back(s.yaw_error);
  }
  r.success_rate = static_cast<double>(successes) / episodes;
  r.mean_return /= episodes;
  for (double p : pos) r.mean_pos_error += p / episodes;
  for (double y : yaw) r.mean_yaw_error += y / episodes;
  r.p95_pos_error = percentile(pos, 0.95);
  r.p95_yaw_error = percentile(yaw, 0.95);
  return r;
}

PolicyFn oracle_policy() {
  return [](const Env& env, const Observation&, Rng&) { return env.goal_action(); };
}

PolicyFn random_policy() {
  return [](const Env&, const Observation&, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, kActionDim> a{};
    for (auto& x : a) x = u(rng);
    return Action::clamped(a);
  };
}

PolicyFn checkpoint_policy(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
  const nn::NetworkSpec spec = network_spec(cfg);
  auto ck = nn::load_checkpoint(checkpoint);
  if (ck.spec_hash != spec.hash())
    throw Error(ErrorKind::SpecMismatch, "checkpoint '" + checkpoint.string() + "' was written for another network (" +
                                             spec.describe() + ")");
  auto params = std::make_shared<nn::ParameterSet<float>>(std::move(ck.params));
  const bool actor = params->contains("actor/out/w");
  return [spec, params, actor](const Env&, const Observation& obs, Rng&) {
    nn::Graph<float> g;
    const nn::Var x = g.constant(observation_batch(obs));
    const nn::Var out = actor ? nn::actor_forward(g, spec, *params, x) : nn::policy_forward(g, spec, *params, x).mean;
    const auto& v = g.value(out);
    std::array<double, kActionDim> a{};
    for (int j = 0; j < kActionDim; ++j) a[j] = v[j];
    return Action::clamped(a);
  };
}

namespace {

int to_byte(float v) { return static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

}  // namespace

std::vector<std::filesystem::path> render_frame(const RunConfig& cfg, std::uint64_t seed,
                                                const std::filesystem::path& prefix) {
  cfg.validate();
  if (cfg.env.observation == ObservationMode::GoalVector)
    throw Error(ErrorKind::Config, "render-frame needs an image observation mode");
  Env env(cfg.env);
  const auto reset = env.reset(seed, lesson_at(cfg, cfg.curriculum.start_lesson));
  const Observation& obs = reset.observation;
  const int h = obs.height, w = obs.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (prefix.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(prefix.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + prefix.parent_path().string() + "': " + ec.message());
  }

  std::vector<std::filesystem::path> files;
  const std::filesystem::path depth_path = prefix.string() + "_depth.pgm";
  {
    std::ofstream os(depth_path);
    if (!os) throw Error(ErrorKind::IoError, "cannot write '" + depth_path.string() + "'");
    os << "P2\n" << w << " " << h << "\n255\n";
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) os << (c ? " " : "") << to_byte(obs.values[static_cast<std::size_t>(r) * w + c]);
      os << "\n";
    }
    if (!os) throw Error(ErrorKind::IoError, "failed writing '" + depth_path.string() + "'");
    files.push_back(depth_path);
  }
  if (obs.channels == 4) {
    const std::filesystem::path rgb_path = prefix.string() + "_rgb.ppm";
    std::ofstream os(rgb_path);
    if (!os) throw Error(ErrorKind::IoError, "cannot write '" + rgb_path.string() + "'");
    os << "P3\n" << w << " " << h << "\n255\n";
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * w + c;
        os << (c ? "  " : "") << to_byte(obs.values[plane + k]) << " " << to_byte(obs.values[2 * plane + k]) << " "
           << to_byte(obs.values[3 * plane + k]);
      }
      os << "\n";
    }
    if (!os) throw Error(ErrorKind::IoError, "failed writing '" + rgb_path.string() + "'");
    files.push_back(rgb_path);
  }

  json j;
  j["seed"] = seed;
  j["width"] = w;
  j["height"] = h;
  j["depth_min_m"] = cfg.env.min_v;
  j["depth_max_m"] = cfg.env.max_v;
  j["depth_encoding"] = "pixel = round(255 * (z - min) / (max - min)), z-depth along the optical axis";
  j["noise_sigma"] = cfg.env.noise_sigma;
  j["target_index"] = reset.config.target_index;
  j["camera_position"] = {reset.config.camera.pose.position.x, reset.config.camera.pose.position.y,
                          reset.config.camera.pose.position.z};
  json blocks = json::array();
  for (const auto& b : reset.config.blocks) {
    blocks.push_back({{"kind", to_string(b.shape.kind)},
                      {"position", {b.pose.position.x, b.pose.position.y, b.pose.position.z}},
                      {"yaw_deg", b.yaw_deg()},
                      {"dims", {b.shape.dims.x, b.shape.dims.y, b.shape.dims.z}}});
  }
  j["blocks"] = blocks;
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  j["files"] = names;
  const std::filesystem::path meta = prefix.string() + ".json";
  std::ofstream os(meta);
  os << j.dump(2) << "\n";
  if (!os) throw Error(ErrorKind::IoError, "failed writing '" + meta.string() + "'");
  return files;
}

void dump_schedule(const RunConfig& cfg, std::ostream& os) {
  if (!cfg.curriculum.enabled) throw Error(ErrorKind::Config, "curriculum is disabled");
  const auto schedule = schedule_of(cfg);
  os << "lesson,xy_tol_m,z_lo_m,z_hi_m,yaw_tol_deg,threshold\n";
  char buf[160];
  for (const auto& l : schedule) {
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.4f,%.4f,%.4f\n", l.index, l.xy_tol, l.z_range.lo, l.z_range.hi,
                  l.yaw_tol, l.advance_threshold);
    os << buf;
  }
}

}  // namespace grasp::harness
