#include "grasp/harness/train.hpp"

#include <chrono>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "grasp/algos/ddpg.hpp"
#include "grasp/algos/ppo.hpp"
#include "grasp/algos/trpo.hpp"
#include "grasp/harness/episode.hpp"
#include "grasp/harness/metrics.hpp"
#include "grasp/nn/checkpoint.hpp"
#include "json.hpp"

namespace grasp::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Trailing {
  std::deque<double> returns;
  std::deque<bool> successes;
  std::size_t window = 500;

  void push(double r, bool s) {
    returns.push_back(r);
    successes.push_back(s);
    while (returns.size() > window) {
      returns.pop_front();
      successes.pop_front();
    }
  }
  double success_rate() const {
    if (successes.empty()) return 0.0;
    return static_cast<double>(std::count(successes.begin(), successes.end(), true)) / successes.size();
  }
  double mean_return() const {
    if (returns.empty()) return 0.0;
    return std::accumulate(returns.begin(), returns.end(), 0.0) / returns.size();
  }
};

// Everything a resumed run needs besides the parameters and optimizer moments.
struct LoopState {
  long env_steps = 0;
  long updates = 0;
  long episodes = 0;
  CurriculumState curriculum;
  Trailing trailing;
  double best_return = -1e300;
  Rng rng;
};

std::string rng_text(const Rng& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

json state_json(const LoopState& s, long adam_t) {
  json j;
  j["env_steps"] = s.env_steps;
  j["updates"] = s.updates;
  j["episodes"] = s.episodes;
  j["lesson"] = s.curriculum.lesson;
  j["curriculum_window"] = std::vector<double>(s.curriculum.window.begin(), s.curriculum.window.end());
  j["curriculum_episodes"] = s.curriculum.episodes;
  j["trailing_returns"] = std::vector<double>(s.trailing.returns.begin(), s.trailing.returns.end());
  j["trailing_successes"] = std::vector<bool>(s.trailing.successes.begin(), s.trailing.successes.end());
  j["best_return"] = s.best_return;
  j["rng"] = rng_text(s.rng);
  j["adam_t"] = adam_t;
  return j;
}

long load_state_json(const json& j, LoopState& s) {
  s.env_steps = j.at("env_steps").get<long>();
  s.updates = j.at("updates").get<long>();
  s.episodes = j.at("episodes").get<long>();
  s.curriculum.lesson = j.at("lesson").get<int>();
  const auto w = j.at("curriculum_window").get<std::vector<double>>();
  s.curriculum.window.assign(w.begin(), w.end());
  s.curriculum.episodes = j.at("curriculum_episodes").get<long>();
  const auto tr = j.at("trailing_returns").get<std::vector<double>>();
  const auto ts = j.at("trailing_successes").get<std::vector<bool>>();
  s.trailing.returns.assign(tr.begin(), tr.end());
  s.trailing.successes.assign(ts.begin(), ts.end());
  s.best_return = j.at("best_return").get<double>();
  std::istringstream is(j.at("rng").get<std::string>());
  is >> s.rng;
  return j.at("adam_t").get<long>();
}

void save_optimizer(const fs::path& path, const nn::ParameterSet<float>& ps, const nn::Adam<float>& opt,
                    std::uint64_t hash) {
  nn::ParameterSet<float> out;
  const auto& m = opt.first_moments();
  const auto& v = opt.second_moments();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& name = ps.entries()[i].name;
    out.add("m/" + name, m[i].shape) = m[i];
    out.add("v/" + name, v[i].shape) = v[i];
  }
  nn::save_checkpoint(path, out, hash);
}

void load_optimizer(const fs::path& path, const nn::ParameterSet<float>& ps, nn::Adam<float>& opt, long t) {
  const auto ck = nn::load_checkpoint(path);
  std::vector<nn::Tensor<float>> m, v;
  if (!ck.params.entries().empty()) {
    for (const auto& e : ps.entries()) {
      m.push_back(ck.params.value("m/" + e.name));
      v.push_back(ck.params.value("v/" + e.name));
    }
  }
  opt.restore(std::move(m), std::move(v), t);
}

std::string ckpt_name(long update) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06ld.bin", update);
  return buf;
}

class Run {
 public:
  Run(const RunConfig& cfg, const TrainOptions& opts)
      : cfg_(cfg), opts_(opts), spec_(network_spec(cfg)), hash_(spec_.hash()), schedule_(schedule_of(cfg)) {
    dir_ = output_dir(cfg_);
    fs::create_directories(dir_ / "checkpoints");
    fs::create_directories(dir_ / "resume");
    state_.curriculum.lesson = cfg_.curriculum.start_lesson;
    state_.curriculum.window_size = cfg_.curriculum.window;
    state_.trailing.window = static_cast<std::size_t>(cfg_.stop_window);
    state_.rng.seed(cfg_.seed ^ 0x2545F4914F6CDD1DULL);
    start_ = std::chrono::steady_clock::now();
  }

  TrainResult run() {
    {
      std::ofstream c(dir_ / "config.json");
      c << dump_config(cfg_) << "\n";
      if (!c) throw Error(ErrorKind::IoError, "cannot write config.json");
    }
    if (cfg_.algorithm == Algorithm::Ddpg) run_ddpg();
    else run_on_policy();
    TrainResult r;
    r.dir = dir_;
    r.env_steps = state_.env_steps;
    r.updates = state_.updates;
    r.episodes = state_.episodes;
    r.lesson = state_.curriculum.lesson;
    r.trailing_success = state_.trailing.success_rate();
    r.trailing_return = state_.trailing.mean_return();
    r.stopped_early = stopped_early_;
    return r;
  }

 private:
  Lesson current_lesson() const {
    return lesson_at(cfg_, cfg_.curriculum.enabled ? state_.curriculum.lesson : cfg_.curriculum.start_lesson);
  }

  void log(const std::string& msg) const {
    if (opts_.log) opts_.log(msg);
  }

  std::string wall_clock() const {
    if (!cfg_.record_wall_clock) return "";
    const auto dt = std::chrono::steady_clock::now() - start_;
    return fmt(std::chrono::duration<double>(dt).count());
  }

  void record_episode(const EpisodeSummary& s) {
    state_.env_steps += s.steps;
    state_.episodes += 1;
    metrics_->write({{"kind", "episode"},
                     {"global_step", std::to_string(state_.env_steps)},
                     {"episode", std::to_string(state_.episodes)},
                     {"update", std::to_string(state_.updates)},
                     {"episode_return", fmt(s.episode_return)},
                     {"success", s.success ? "1" : "0"},
                     {"lesson", std::to_string(state_.curriculum.lesson)},
                     {"r_touch", fmt(s.sums.r_touch)},
                     {"r_collision", fmt(s.sums.r_collision)},
                     {"r_pos", fmt(s.sums.r_pos)},
                     {"r_rot", fmt(s.sums.r_rot)},
                     {"r_fmt", fmt(s.sums.r_fmt)},
                     {"r_fft", fmt(s.sums.r_fft)},
                     {"wall_clock_s", wall_clock()}});
    state_.trailing.push(s.episode_return, s.success);
    if (cfg_.curriculum.enabled) {
      const int before = state_.curriculum.lesson;
      state_.curriculum = update(std::move(state_.curriculum), s.episode_return, schedule_);
      if (state_.curriculum.lesson != before) log("lesson " + std::to_string(state_.curriculum.lesson));
    }
  }

  void record_update(double policy_loss, double value_loss, double entropy, double kl, double clip_fraction,
                     double lr, double beta) {
    state_.updates += 1;
    metrics_->write({{"kind", "update"},
                     {"global_step", std::to_string(state_.env_steps)},
                     {"episode", std::to_string(state_.episodes)},
                     {"update", std::to_string(state_.updates)},
                     {"lesson", std::to_string(state_.curriculum.lesson)},
                     {"policy_loss", fmt(policy_loss)},
                     {"value_loss", fmt(value_loss)},
                     {"entropy", fmt(entropy)},
                     {"kl", fmt(kl)},
                     {"clip_fraction", fmt(clip_fraction)},
                     {"lr", fmt(lr)},
                     {"beta", fmt(beta)},
                     {"wall_clock_s", wall_clock()}});
  }

  bool should_stop(long updates_this_call) {
    if (cfg_.stop_success_rate > 0.0 && state_.trailing.successes.size() >= static_cast<std::size_t>(cfg_.stop_window) &&
        state_.trailing.success_rate() >= cfg_.stop_success_rate) {
      stopped_early_ = true;
      return true;
    }
    return opts_.stop_after_updates > 0 && updates_this_call >= opts_.stop_after_updates;
  }

  void checkpoint(const nn::ParameterSet<float>& ps, double batch_return) {
    if (state_.updates % cfg_.checkpoint_every == 0)
      nn::save_checkpoint(dir_ / "checkpoints" / ckpt_name(state_.updates), ps, hash_);
    if (batch_return > state_.best_return) {
      state_.best_return = batch_return;
      nn::save_checkpoint(dir_ / "best.bin", ps, hash_);
    }
  }

  // Whole episodes for one update. Episode k always uses seed index k and the lesson fixed at the
  // start of the batch, so the result does not depend on the worker count.
  std::vector<PolicyEpisode> collect(nn::ParameterSet<float>& ps, long target_steps) {
    std::vector<PolicyEpisode> out;
    const Lesson lesson = current_lesson();
    const int workers = cfg_.deterministic ? 1 : cfg_.workers;
    long steps = 0;
    long next = state_.episodes;
    while (steps < target_steps) {
      std::vector<PolicyEpisode> wave(static_cast<std::size_t>(workers));
      auto work = [&](int w) {
        nn::ParameterSet<float> local = ps;
        wave[w] = run_gaussian_episode(envs_[w], spec_, local, episode_seed(cfg_.seed, next + w, kTrainStream), lesson);
      };
      if (workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
      }
      for (auto& ep : wave) {
        if (steps >= target_steps) break;
        steps += ep.summary.steps;
        out.push_back(std::move(ep));
        next += 1;
      }
    }
    return out;
  }

  void run_on_policy() {
    const int workers = cfg_.deterministic ? 1 : cfg_.workers;
    for (int w = 0; w < workers; ++w) envs_.emplace_back(cfg_.env);
    nn::ParameterSet<float> ps = nn::init_policy_params<float>(spec_, cfg_.seed);
    nn::Adam<float> adam;
    const fs::path resume_dir = dir_ / "resume";
    const bool resuming = opts_.resume && fs::exists(resume_dir / "state.json");
    if (resuming) {
      const auto ck = nn::load_checkpoint(resume_dir / "params.bin");
      if (ck.spec_hash != hash_) throw Error(ErrorKind::SpecMismatch, "resume checkpoint was written for another network");
      ps = ck.params;
      std::ifstream in(resume_dir / "state.json");
      const long t = load_state_json(json::parse(in), state_);
      load_optimizer(resume_dir / "optim.bin", ps, adam, t);
      log("resumed at update " + std::to_string(state_.updates));
    }
    metrics_ = std::make_unique<MetricsWriter>(dir_ / "metrics.csv", resuming);
    if (!resuming) nn::save_checkpoint(dir_ / "checkpoints" / ckpt_name(0), ps, hash_);

    const obs_shape_t shape = obs_shape();
    long updates_this_call = 0;
    while (state_.env_steps < cfg_.total_steps) {
      const long target = std::min<long>(cfg_.steps_per_update, cfg_.total_steps - state_.env_steps);
      auto episodes = collect(ps, target);
      std::vector<algos::Trajectory> trajs;
      double batch_return = 0.0;
      for (auto& ep : episodes) {
        record_episode(ep.summary);
        batch_return += ep.summary.episode_return;
        trajs.push_back(std::move(ep.trajectory));
      }
      batch_return /= static_cast<double>(episodes.size());

      if (cfg_.algorithm == Algorithm::Ppo) {
        const double lr = algos::learning_rate(cfg_.ppo.lr, state_.env_steps, cfg_.total_steps);
        const double beta = algos::entropy_beta(cfg_.ppo.entropy_coef, state_.env_steps, cfg_.total_steps);
        const auto batch = algos::make_batch(trajs, shape, cfg_.ppo.gamma, cfg_.ppo.lambda);
        const auto st = algos::ppo_update(spec_, ps, adam, batch, cfg_.ppo, lr, beta, state_.rng);
        record_update(st.policy_loss, st.value_loss, st.entropy, st.approx_kl, st.clip_fraction, lr, beta);
      } else {
        const auto batch = algos::make_batch(trajs, shape, cfg_.trpo.gamma, cfg_.trpo.lambda);
        const auto st = algos::trpo_update(spec_, ps, batch, cfg_.trpo, state_.rng);
        record_update(-st.surrogate_after, st.value_loss, st.entropy, st.kl, 0.0, cfg_.trpo.vf_lr, 0.0);
        if (!st.accepted) log("line search failed at update " + std::to_string(state_.updates));
      }
      updates_this_call += 1;
      checkpoint(ps, batch_return);
      if (state_.updates % 10 == 0)
        log("update " + std::to_string(state_.updates) + " steps " + std::to_string(state_.env_steps) +
            " return " + fmt(state_.trailing.mean_return()) + " success " + fmt(state_.trailing.success_rate()));
      if (should_stop(updates_this_call)) break;
    }
    nn::save_checkpoint(dir_ / "final.bin", ps, hash_);
    nn::save_checkpoint(resume_dir / "params.bin", ps, hash_);
    save_optimizer(resume_dir / "optim.bin", ps, adam, hash_);
    std::ofstream st(resume_dir / "state.json");
    st << state_json(state_, adam.steps()).dump(2) << "\n";
    if (!st) throw Error(ErrorKind::IoError, "cannot write resume state");
  }

  void run_ddpg() {
    if (opts_.resume) throw Error(ErrorKind::Unsupported, "ddpg runs cannot be resumed (the replay buffer is not saved)");
    Env env(cfg_.env);
    algos::DdpgNets nets = algos::DdpgNets::create(spec_, cfg_.seed);
    algos::ReplayBuffer buffer(cfg_.ddpg.capacity);
    metrics_ = std::make_unique<MetricsWriter>(dir_ / "metrics.csv", false);
    nn::save_checkpoint(dir_ / "checkpoints" / ckpt_name(0), nets.actor, hash_);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    long updates_this_call = 0;

    while (state_.env_steps < cfg_.total_steps) {
      const Lesson lesson = current_lesson();
      const std::uint64_t seed = episode_seed(cfg_.seed, static_cast<std::uint64_t>(state_.episodes), kTrainStream);
      EpisodeSummary s;
      algos::DdpgStats acc;
      int n_updates = 0;
      Observation obs = env.reset(seed, lesson).observation;
      while (!env.done()) {
        std::vector<double> a(kActionDim);
        if (state_.env_steps + s.steps < cfg_.ddpg.warmup) {
          for (auto& x : a) x = uniform(state_.rng);
        } else {
          const auto mu = algos::actor_action(nets, observation_batch(obs));
          a = algos::exploration_action(std::vector<double>(mu.data.begin(), mu.data.end()), cfg_.ddpg.noise_std,
                                        state_.rng);
        }
        std::array<double, kActionDim> arr{};
        std::copy(a.begin(), a.end(), arr.begin());
        const StepResult r = env.step(Action::clamped(arr));
        buffer.push(algos::Transition{obs.values, a, r.reward.total, r.observation.values, r.done});
        s.episode_return += r.reward.total;
        s.success = s.success || r.info.success;
        s.steps += 1;
        s.sums.r_touch += r.reward.r_touch;
        s.sums.r_collision += r.reward.r_collision;
        s.sums.r_pos += r.reward.r_pos;
        s.sums.r_rot += r.reward.r_rot;
        s.sums.r_fmt += r.reward.r_fmt;
        s.sums.r_fft += r.reward.r_fft;
        obs = r.observation;
        if (state_.env_steps + s.steps >= cfg_.ddpg.warmup && buffer.size() >= static_cast<std::size_t>(cfg_.ddpg.batch)) {
          for (int u = 0; u < cfg_.ddpg.updates_per_step; ++u) {
            const auto st = algos::ddpg_update(nets, buffer, cfg_.ddpg, state_.rng);
            acc.critic_loss += st.critic_loss;
            acc.actor_loss += st.actor_loss;
            n_updates += 1;
          }
        }
      }
      s.pos_error = norm(env.tool().tooltip - env.goal().ideal_point());
      s.yaw_error = std::abs(yaw_error_deg(env.tool().pose.rotation.yaw_deg(), env.goal()));
      record_episode(s);
      if (n_updates > 0) {
        record_update(acc.actor_loss / n_updates, acc.critic_loss / n_updates, 0.0, 0.0, 0.0, cfg_.ddpg.actor_lr, 0.0);
        updates_this_call += 1;
        checkpoint(nets.actor, s.episode_return);
        if (state_.updates % 100 == 0)
          log("update " + std::to_string(state_.updates) + " steps " + std::to_string(state_.env_steps) +
              " return " + fmt(state_.trailing.mean_return()) + " success " + fmt(state_.trailing.success_rate()));
        if (should_stop(updates_this_call)) break;
      }
    }
    nn::save_checkpoint(dir_ / "final.bin", nets.actor, hash_);
  }

  using obs_shape_t = std::vector<int>;
  obs_shape_t obs_shape() const { return {spec_.channels, spec_.height, spec_.width}; }

  RunConfig cfg_;
  TrainOptions opts_;
  nn::NetworkSpec spec_;
  std::uint64_t hash_;
  std::vector<Lesson> schedule_;
  fs::path dir_;
  LoopState state_;
  std::vector<Env> envs_;
  std::unique_ptr<MetricsWriter> metrics_;
  std::chrono::steady_clock::time_point start_;
  bool stopped_early_ = false;
};

}  // namespace

TrainResult train(const RunConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  return Run(cfg, opts).run();
}

}  // namespace grasp::harness
