// grasplab: train, evaluate, render-frame, dump-schedule.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grasp/harness/config.hpp"
#include "grasp/harness/evaluate.hpp"
#include "grasp/harness/train.hpp"

namespace {

using namespace grasp;
using namespace grasp::harness;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::BadSchedule: return 2;
    case ErrorKind::IoError: return 3;
    case ErrorKind::SpecMismatch: return 4;
    case ErrorKind::NonFinite: return 5;
    case ErrorKind::Unsupported: return 6;
    default: return 7;
  }
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file (flat or nested keys)");
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_option("--override", c.overrides, "key=value, repeatable");
  cmd->add_option("--out", c.out, "output directory or file prefix");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grasplab: 2.5D suction-grasp reinforcement-learning lab"};
  app.require_subcommand(1);

  Common train_c, eval_c, frame_c, sched_c;
  bool resume = false;
  long stop_after = 0;
  auto* train_cmd = app.add_subcommand("train", "run the collect/update loop to the step budget");
  add_common(train_cmd, train_c);
  train_cmd->add_flag("--resume", resume, "continue from <out>/resume");
  train_cmd->add_option("--stop-after-updates", stop_after, "interrupt after this many updates");

  std::string checkpoint, policy = "checkpoint";
  std::optional<int> episodes;
  auto* eval_cmd = app.add_subcommand("evaluate", "run deterministic evaluation episodes");
  add_common(eval_cmd, eval_c);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file (policy=checkpoint)");
  eval_cmd->add_option("--policy", policy, "checkpoint | oracle | random")
      ->check(CLI::IsMember({"checkpoint", "oracle", "random"}));
  eval_cmd->add_option("--episodes", episodes, "episode count (default eval.episodes)");

  auto* frame_cmd = app.add_subcommand("render-frame", "write the first observation of a sampled episode");
  add_common(frame_cmd, frame_c);

  auto* sched_cmd = app.add_subcommand("dump-schedule", "print the curriculum table");
  add_common(sched_cmd, sched_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      RunConfig cfg = build_config(train_c);
      if (!train_c.out.empty()) cfg.out_dir = train_c.out;
      TrainOptions opts;
      opts.resume = resume;
      opts.stop_after_updates = stop_after;
      opts.log = [](const std::string& m) { std::cerr << m << "\n"; };
      const auto r = train(cfg, opts);
      std::cout << "dir " << r.dir.string() << "\nenv_steps " << r.env_steps << "\nupdates " << r.updates
                << "\nepisodes " << r.episodes << "\nlesson " << r.lesson << "\ntrailing_success "
                << r.trailing_success << "\ntrailing_return " << r.trailing_return << "\n";
    } else if (*eval_cmd) {
      const RunConfig cfg = build_config(eval_c);
      PolicyFn fn;
      if (policy == "oracle") fn = oracle_policy();
      else if (policy == "random") fn = random_policy();
      else {
        if (checkpoint.empty()) throw Error(ErrorKind::Config, "--checkpoint is required for policy=checkpoint");
        fn = checkpoint_policy(cfg, checkpoint);
      }
      const auto report = evaluate(cfg, fn, episodes.value_or(cfg.eval_episodes), cfg.eval_seed);
      const std::string text = to_json(report);
      std::cout << text << "\n";
      if (!eval_c.out.empty()) {
        std::ofstream os(eval_c.out);
        os << text << "\n";
        if (!os) throw Error(ErrorKind::IoError, "cannot write '" + eval_c.out + "'");
      }
    } else if (*frame_cmd) {
      const RunConfig cfg = build_config(frame_c);
      const std::filesystem::path prefix = frame_c.out.empty() ? default_output_root() / "frame" : std::filesystem::path(frame_c.out);
      for (const auto& f : render_frame(cfg, cfg.seed, prefix)) std::cout << f.string() << "\n";
    } else if (*sched_cmd) {
      dump_schedule(build_config(sched_c), std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
