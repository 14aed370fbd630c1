#include "grasp/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace grasp::harness {

using json = nlohmann::json;

Algorithm parse_algorithm(const std::string& s) {
  if (s == "ppo") return Algorithm::Ppo;
  if (s == "trpo") return Algorithm::Trpo;
  if (s == "ddpg") return Algorithm::Ddpg;
  throw Error(ErrorKind::Config, "unknown algorithm '" + s + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Ppo: return "ppo";
    case Algorithm::Trpo: return "trpo";
    case Algorithm::Ddpg: return "ddpg";
  }
  return "?";
}

ObservationMode parse_observation(const std::string& s) {
  if (s == "depth") return ObservationMode::Depth;
  if (s == "depth_rgb") return ObservationMode::DepthRgb;
  if (s == "goal_vector") return ObservationMode::GoalVector;
  throw Error(ErrorKind::Config, "unknown observation mode '" + s + "'");
}

std::string to_string(ObservationMode m) {
  switch (m) {
    case ObservationMode::Depth: return "depth";
    case ObservationMode::DepthRgb: return "depth_rgb";
    case ObservationMode::GoalVector: return "goal_vector";
  }
  return "?";
}

namespace {

struct Field {
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

// Value conversions with error reporting in Config terms.
template <class T>
T as(const json& j) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw std::invalid_argument("expected a boolean");
    return j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw std::invalid_argument("expected an integer");
    return j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw std::invalid_argument("expected a number");
    return j.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw std::invalid_argument("expected a string");
    return j.get<std::string>();
  } else if constexpr (std::is_same_v<T, Interval>) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [lo, hi]");
    return Interval{as<double>(j[0]), as<double>(j[1])};
  } else if constexpr (std::is_same_v<T, Vec3>) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
    return Vec3{as<double>(j[0]), as<double>(j[1]), as<double>(j[2])};
  } else {
    return j.get<T>();
  }
}

template <class T>
json to_j(const T& v) {
  if constexpr (std::is_same_v<T, Interval>) {
    return json::array({v.lo, v.hi});
  } else if constexpr (std::is_same_v<T, Vec3>) {
    return json::array({v.x, v.y, v.z});
  } else {
    return json(v);
  }
}

template <class T, class Ref>
Field ref_field(Ref ref) {
  return Field{[ref](RunConfig& c, const json& j) { ref(c) = as<T>(j); },
               [ref](const RunConfig& c) { return to_j<T>(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field optional_double(Ref ref) {
  return Field{[ref](RunConfig& c, const json& j) {
                 if (j.is_null()) ref(c).reset();
                 else ref(c) = as<double>(j);
               },
               [ref](const RunConfig& c) -> json {
                 const auto& o = ref(const_cast<RunConfig&>(c));
                 return o ? json(*o) : json(nullptr);
               }};
}

#define GRASP_FIELD(T, key, expr) \
  m[key] = ref_field<T>([](RunConfig& c) -> T& { return expr; })

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> m;
    m["algorithm"] = Field{[](RunConfig& c, const json& j) { c.algorithm = parse_algorithm(as<std::string>(j)); },
                           [](const RunConfig& c) { return json(to_string(c.algorithm)); }};
    GRASP_FIELD(std::uint64_t, "seed", c.seed);
    GRASP_FIELD(long, "total_steps", c.total_steps);
    GRASP_FIELD(std::string, "out_dir", c.out_dir);
    GRASP_FIELD(int, "workers", c.workers);
    GRASP_FIELD(bool, "deterministic", c.deterministic);
    GRASP_FIELD(bool, "record_wall_clock", c.record_wall_clock);
    GRASP_FIELD(int, "checkpoint_every", c.checkpoint_every);
    GRASP_FIELD(int, "steps_per_update", c.steps_per_update);
    GRASP_FIELD(double, "stop_success_rate", c.stop_success_rate);
    GRASP_FIELD(int, "stop_window", c.stop_window);
    GRASP_FIELD(int, "eval.episodes", c.eval_episodes);
    GRASP_FIELD(std::uint64_t, "eval.seed", c.eval_seed);

    m["env.observation"] = Field{
        [](RunConfig& c, const json& j) { c.env.observation = parse_observation(as<std::string>(j)); },
        [](const RunConfig& c) { return json(to_string(c.env.observation)); }};
    GRASP_FIELD(bool, "env.frame_grab", c.env.frame_grab);
    GRASP_FIELD(int, "env.max_steps", c.env.max_steps);
    GRASP_FIELD(double, "env.noise_sigma", c.env.noise_sigma);
    GRASP_FIELD(bool, "env.quantize", c.env.quantize);
    GRASP_FIELD(double, "env.min_v", c.env.min_v);
    GRASP_FIELD(double, "env.max_v", c.env.max_v);
    GRASP_FIELD(int, "env.resolution", c.env.resolution);
    GRASP_FIELD(double, "env.fov_deg", c.env.fov_deg);
    GRASP_FIELD(Vec3, "env.home", c.env.home);
    GRASP_FIELD(double, "env.home_yaw", c.env.home_yaw);
    m["env.fixed_tool_z"] = optional_double([](RunConfig& c) -> std::optional<double>& { return c.env.fixed_tool_z; });
    GRASP_FIELD(Interval, "env.bounds.x", c.env.bounds.x);
    GRASP_FIELD(Interval, "env.bounds.y", c.env.bounds.y);
    GRASP_FIELD(Interval, "env.bounds.z", c.env.bounds.z);
    GRASP_FIELD(Interval, "env.bounds.yaw", c.env.bounds.yaw);

    GRASP_FIELD(double, "reward.k1", c.env.reward.k1);
    GRASP_FIELD(double, "reward.k2", c.env.reward.k2);
    GRASP_FIELD(double, "reward.touch", c.env.reward.touch);
    GRASP_FIELD(double, "reward.collision", c.env.reward.collision);
    GRASP_FIELD(double, "reward.pos", c.env.reward.pos);
    GRASP_FIELD(double, "reward.rot", c.env.reward.rot);
    GRASP_FIELD(bool, "reward.literal_facing", c.env.reward.literal_facing);

    GRASP_FIELD(Vec3, "tool.head_half", c.env.tool.head_half);
    GRASP_FIELD(Vec3, "tool.segment_half", c.env.tool.segment_half);
    GRASP_FIELD(Vec3, "tool.tooltip_offset", c.env.tool.tooltip_offset);

    GRASP_FIELD(int, "ranges.block_count_min", c.env.ranges.block_count_min);
    GRASP_FIELD(int, "ranges.block_count_max", c.env.ranges.block_count_max);
    GRASP_FIELD(Interval, "ranges.block_x", c.env.ranges.block_x);
    GRASP_FIELD(Interval, "ranges.block_y", c.env.ranges.block_y);
    GRASP_FIELD(Interval, "ranges.block_yaw", c.env.ranges.block_yaw);
    GRASP_FIELD(Interval, "ranges.block_scale", c.env.ranges.block_scale);
    GRASP_FIELD(Interval, "ranges.dims_x", c.env.ranges.dims_x);
    GRASP_FIELD(Interval, "ranges.dims_y", c.env.ranges.dims_y);
    GRASP_FIELD(Interval, "ranges.dims_z", c.env.ranges.dims_z);
    GRASP_FIELD(Interval, "ranges.wall_ratio", c.env.ranges.wall_ratio);
    m["ranges.kind_weights"] = Field{
        [](RunConfig& c, const json& j) {
          if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [box, l_shape, u_shape]");
          for (std::size_t i = 0; i < 3; ++i) c.env.ranges.kind_weights[i] = as<double>(j[i]);
        },
        [](const RunConfig& c) { return json(c.env.ranges.kind_weights); }};
    GRASP_FIELD(Vec3, "ranges.camera_position", c.env.ranges.camera_position);
    GRASP_FIELD(Vec3, "ranges.camera_look_at", c.env.ranges.camera_look_at);
    GRASP_FIELD(Interval, "ranges.camera_jitter", c.env.ranges.camera_jitter);
    GRASP_FIELD(Interval, "ranges.camera_angle_jitter", c.env.ranges.camera_angle_jitter);
    GRASP_FIELD(Interval, "ranges.near_clip", c.env.ranges.near_clip);
    GRASP_FIELD(Interval, "ranges.far_clip", c.env.ranges.far_clip);
    GRASP_FIELD(Interval, "ranges.light_x", c.env.ranges.light_x);
    GRASP_FIELD(Interval, "ranges.light_y", c.env.ranges.light_y);
    GRASP_FIELD(Interval, "ranges.light_z", c.env.ranges.light_z);
    GRASP_FIELD(Interval, "ranges.light_intensity", c.env.ranges.light_intensity);
    m["ranges.target_rule"] = Field{
        [](RunConfig& c, const json& j) {
          const auto s = as<std::string>(j);
          if (s == "nearest_camera") c.env.ranges.target_rule = TargetRule::NearestCamera;
          else if (s == "fixed_index") c.env.ranges.target_rule = TargetRule::FixedIndex;
          else throw std::invalid_argument("expected nearest_camera or fixed_index");
        },
        [](const RunConfig& c) {
          return json(c.env.ranges.target_rule == TargetRule::NearestCamera ? "nearest_camera" : "fixed_index");
        }};
    GRASP_FIELD(int, "ranges.target_index", c.env.ranges.target_index);

    GRASP_FIELD(bool, "net.preset", c.net.preset);
    m["net.convs"] = Field{
        [](RunConfig& c, const json& j) {
          if (!j.is_array()) throw std::invalid_argument("expected [[filters, kernel, stride], ...]");
          c.net.convs.clear();
          for (const auto& l : j) {
            if (!l.is_array() || l.size() != 3) throw std::invalid_argument("expected [filters, kernel, stride]");
            c.net.convs.push_back({as<int>(l[0]), as<int>(l[1]), as<int>(l[2])});
          }
        },
        [](const RunConfig& c) {
          json a = json::array();
          for (const auto& l : c.net.convs) a.push_back({l.filters, l.kernel, l.stride});
          return a;
        }};
    m["net.hidden"] = Field{
        [](RunConfig& c, const json& j) {
          if (!j.is_array()) throw std::invalid_argument("expected a list of widths");
          c.net.hidden.clear();
          for (const auto& w : j) c.net.hidden.push_back(as<int>(w));
        },
        [](const RunConfig& c) { return json(c.net.hidden); }};
    GRASP_FIELD(double, "net.init_log_std", c.net.init_log_std);
    GRASP_FIELD(double, "net.mean_head_gain", c.net.mean_head_gain);

    GRASP_FIELD(bool, "curriculum.enabled", c.curriculum.enabled);
    GRASP_FIELD(int, "curriculum.start_lesson", c.curriculum.start_lesson);
    GRASP_FIELD(std::size_t, "curriculum.window", c.curriculum.window);
    GRASP_FIELD(double, "curriculum.start_xy", c.curriculum.schedule.start_xy);
    GRASP_FIELD(double, "curriculum.final_xy", c.curriculum.schedule.final_xy);
    GRASP_FIELD(double, "curriculum.start_yaw", c.curriculum.schedule.start_yaw);
    GRASP_FIELD(double, "curriculum.final_yaw", c.curriculum.schedule.final_yaw);
    GRASP_FIELD(double, "curriculum.start_threshold", c.curriculum.schedule.start_threshold);
    GRASP_FIELD(double, "curriculum.final_threshold", c.curriculum.schedule.final_threshold);
    GRASP_FIELD(Interval, "curriculum.z_range", c.curriculum.schedule.z_range);
    m["curriculum.xy_tol"] = optional_double([](RunConfig& c) -> std::optional<double>& { return c.curriculum.xy_tol; });
    m["curriculum.yaw_tol"] = optional_double([](RunConfig& c) -> std::optional<double>& { return c.curriculum.yaw_tol; });

    GRASP_FIELD(double, "ppo.clip", c.ppo.clip);
    GRASP_FIELD(double, "ppo.entropy_coef", c.ppo.entropy_coef);
    GRASP_FIELD(double, "ppo.value_coef", c.ppo.value_coef);
    GRASP_FIELD(int, "ppo.epochs", c.ppo.epochs);
    GRASP_FIELD(int, "ppo.minibatch", c.ppo.minibatch);
    GRASP_FIELD(double, "ppo.gamma", c.ppo.gamma);
    GRASP_FIELD(double, "ppo.lambda", c.ppo.lambda);
    GRASP_FIELD(double, "ppo.lr", c.ppo.lr.initial);
    m["ppo.lr_schedule"] = Field{
        [](RunConfig& c, const json& j) { c.ppo.lr.kind = algos::parse_lr_kind(as<std::string>(j)); },
        [](const RunConfig& c) { return json(algos::to_string(c.ppo.lr.kind)); }};
    GRASP_FIELD(double, "ppo.lr_power", c.ppo.lr.power);
    GRASP_FIELD(double, "ppo.lr_floor", c.ppo.lr.floor);
    GRASP_FIELD(double, "ppo.lr_end_factor", c.ppo.lr.end_factor);
    GRASP_FIELD(double, "ppo.max_grad_norm", c.ppo.max_grad_norm);

    GRASP_FIELD(double, "trpo.max_kl", c.trpo.max_kl);
    GRASP_FIELD(int, "trpo.cg_iters", c.trpo.cg_iters);
    GRASP_FIELD(double, "trpo.damping", c.trpo.damping);
    GRASP_FIELD(double, "trpo.backtrack_coef", c.trpo.backtrack_coef);
    GRASP_FIELD(int, "trpo.max_backtracks", c.trpo.max_backtracks);
    GRASP_FIELD(double, "trpo.gamma", c.trpo.gamma);
    GRASP_FIELD(double, "trpo.lambda", c.trpo.lambda);
    GRASP_FIELD(double, "trpo.vf_lr", c.trpo.vf_lr);
    GRASP_FIELD(int, "trpo.vf_epochs", c.trpo.vf_epochs);
    GRASP_FIELD(int, "trpo.vf_minibatch", c.trpo.vf_minibatch);

    GRASP_FIELD(double, "ddpg.noise_std", c.ddpg.noise_std);
    GRASP_FIELD(std::size_t, "ddpg.capacity", c.ddpg.capacity);
    GRASP_FIELD(int, "ddpg.batch", c.ddpg.batch);
    GRASP_FIELD(double, "ddpg.tau", c.ddpg.tau);
    GRASP_FIELD(double, "ddpg.actor_lr", c.ddpg.actor_lr);
    GRASP_FIELD(double, "ddpg.critic_lr", c.ddpg.critic_lr);
    GRASP_FIELD(double, "ddpg.gamma", c.ddpg.gamma);
    GRASP_FIELD(long, "ddpg.warmup", c.ddpg.warmup);
    GRASP_FIELD(int, "ddpg.updates_per_step", c.ddpg.updates_per_step);
    return m;
  }();
  return table;
}

#undef GRASP_FIELD

void set_json(RunConfig& cfg, const std::string& key, const json& value) {
  const auto& f = fields();
  const auto it = f.find(key);
  if (it == f.end()) throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
  try {
    it->second.set(cfg, value);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Config, "bad value for '" + key + "': " + e.what());
  }
}

void flatten_into(RunConfig& cfg, const json& j, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) flatten_into(cfg, *it, key);
    else set_json(cfg, key, *it);
  }
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  if (total_steps < 0) throw Error(ErrorKind::Config, "total_steps must be >= 0");
  if (workers < 1) throw Error(ErrorKind::Config, "workers must be >= 1");
  if (checkpoint_every < 1) throw Error(ErrorKind::Config, "checkpoint_every must be >= 1");
  if (steps_per_update < 1) throw Error(ErrorKind::Config, "steps_per_update must be >= 1");
  if (stop_success_rate < 0.0 || stop_success_rate > 1.0 || stop_window < 1)
    throw Error(ErrorKind::Config, "early-stop settings out of range");
  if (eval_episodes < 0) throw Error(ErrorKind::Config, "eval.episodes must be >= 0");
  if (curriculum.start_lesson < 1 || curriculum.start_lesson > kLessonCount)
    throw Error(ErrorKind::Config, "curriculum.start_lesson must lie in 1..19");
  if (curriculum.window < 1) throw Error(ErrorKind::Config, "curriculum.window must be >= 1");
  if ((curriculum.xy_tol && *curriculum.xy_tol <= 0.0) || (curriculum.yaw_tol && *curriculum.yaw_tol <= 0.0))
    throw Error(ErrorKind::Config, "frozen tolerances must be positive");
  if (!net.preset && env.observation != ObservationMode::GoalVector && net.convs.empty())
    throw Error(ErrorKind::Config, "net.preset is off but net.convs is empty");
  build_schedule(curriculum.schedule);
  ppo.validate();
  trpo.validate();
  ddpg.validate();
  network_spec(*this).validate();
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& json_value) {
  json v;
  try {
    v = json::parse(json_value);
  } catch (const json::parse_error&) {
    v = json_value;
  }
  set_json(cfg, key, v);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::Config, "override '" + assignment + "' is not of the form key=value");
  set_key(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  RunConfig cfg;
  flatten_into(cfg, j, "");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, f] : fields()) j[key] = f.get(cfg);
  return j.dump(2);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, f] : fields()) keys.push_back(key);
  return keys;
}

nn::NetworkSpec network_spec(const RunConfig& cfg) {
  nn::NetworkSpec spec;
  if (cfg.env.observation == ObservationMode::GoalVector) {
    spec.channels = 4;
    spec.height = 1;
    spec.width = 1;
    spec.convs = cfg.net.preset ? std::vector<nn::ConvLayer>{} : cfg.net.convs;
  } else {
    const int channels = cfg.env.observation == ObservationMode::DepthRgb ? 4 : 1;
    if (cfg.net.preset) {
      spec = nn::arch_preset(cfg.env.resolution, channels);
    } else {
      spec.channels = channels;
      spec.height = cfg.env.resolution;
      spec.width = cfg.env.resolution;
      spec.convs = cfg.net.convs;
    }
  }
  spec.hidden = cfg.net.hidden;
  spec.action_dim = kActionDim;
  spec.init_log_std = cfg.net.init_log_std;
  spec.mean_head_gain = cfg.net.mean_head_gain;
  spec.separate_value = cfg.algorithm == Algorithm::Trpo;
  return spec;
}

std::vector<Lesson> schedule_of(const RunConfig& cfg) { return build_schedule(cfg.curriculum.schedule); }

Lesson lesson_at(const RunConfig& cfg, int index) {
  const auto schedule = schedule_of(cfg);
  if (index < 1 || index > static_cast<int>(schedule.size()))
    throw Error(ErrorKind::Config, "lesson index " + std::to_string(index) + " out of range");
  Lesson l = schedule[static_cast<std::size_t>(index - 1)];
  if (cfg.curriculum.xy_tol) l.xy_tol = *cfg.curriculum.xy_tol;
  if (cfg.curriculum.yaw_tol) l.yaw_tol = *cfg.curriculum.yaw_tol;
  return l;
}

std::filesystem::path default_output_root() {
  if (const char* root = std::getenv("GRASPLAB_OUTPUT_ROOT"); root && *root) return root;
  return "runs";
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  return default_output_root() / (to_string(cfg.algorithm) + "_seed" + std::to_string(cfg.seed));
}

}  // namespace grasp::harness
