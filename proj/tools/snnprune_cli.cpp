// snnprune: command-line driver for training, pruning, analysis and self-checks.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "snnprune/config.hpp"
#include "snnprune/errors.hpp"
#include "snnprune/pipelines.hpp"
#include "snnprune/verify.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string resume;
  std::optional<std::size_t> stop_after;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file (omitted: all defaults)");
  cmd->add_option("--seed", f.seed, "overrides the config seed");
  cmd->add_option("--out", f.out, "artifact directory (relative paths go under $SNNPRUNE_OUT_ROOT)");
  cmd->add_option("--resume", f.resume, "run checkpoint to continue from");
  cmd->add_option("--stop-after-epoch", f.stop_after, "write state.ckpt and stop after this many epochs");
}

snnprune::ExperimentConfig load(const RunFlags& f) {
  snnprune::ExperimentConfig cfg = f.config.empty() ? snnprune::parse_config("") : snnprune::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

int report(const snnprune::RunSummary& s, const std::string& out_dir) {
  std::printf("%s %s: epochs=%zu train_acc=%.4f test_acc=%.4f sparsity=%.6f out=%s\n", s.command.c_str(),
              s.completed ? "completed" : "stopped", s.epochs_run, s.train_accuracy, s.test_accuracy, s.sparsity,
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking network training and pruning with criticality-based regeneration"};
  app.require_subcommand(1);

  RunFlags train_flags, unstructured_flags, structured_flags;
  auto* train = app.add_subcommand("train", "dense surrogate-gradient training");
  add_run_flags(train, train_flags);
  auto* unstructured = app.add_subcommand("prune-unstructured", "gradual magnitude pruning with regeneration");
  add_run_flags(unstructured, unstructured_flags);
  auto* structured = app.add_subcommand("prune-structured", "BN-gamma channel pruning with regeneration");
  add_run_flags(structured, structured_flags);

  std::string ckpt_a, ckpt_b, metric;
  auto* analyze = app.add_subcommand("analyze", "feature and survival metrics over saved runs");
  analyze->add_option("--checkpoint", ckpt_a, "run checkpoint")->required();
  analyze->add_option("--checkpoint-b", ckpt_b, "second checkpoint (transition)");
  analyze->add_option("--metric", metric, "variance | cosine | transition | survival")
      ->required()
      ->check(CLI::IsMember({"variance", "cosine", "transition", "survival"}));

  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error:usage:" << e.what() << "\n";
    return 2;
  }

  try {
    auto run = [](const RunFlags& f, auto fn) {
      const snnprune::ExperimentConfig cfg = load(f);
      snnprune::RunOptions opts;
      opts.stop_after_epoch = f.stop_after;
      opts.resume_path = f.resume;
      opts.out_dir = snnprune::resolve_out_dir(cfg, f.out);
      return report(fn(cfg, opts), opts.out_dir);
    };
    if (*train) return run(train_flags, snnprune::run_train);
    if (*unstructured) return run(unstructured_flags, snnprune::run_unstructured);
    if (*structured) return run(structured_flags, snnprune::run_structured);
    if (*analyze) {
      std::cout << snnprune::analyze(ckpt_a, ckpt_b, metric);
      return 0;
    }
    if (*verify) {
      bool ok = true;
      for (const auto& p : snnprune::run_verify(verify_seed)) {
        std::printf("%s %s (%s)\n", p.passed ? "PASS" : "FAIL", p.name.c_str(), p.detail.c_str());
        ok = ok && p.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const snnprune::Error& e) {
    std::cerr << "error:" << e.category() << ":" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error:internal:" << e.what() << "\n";
    return 3;
  }
  return 0;
}
