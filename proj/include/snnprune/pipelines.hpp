#pragma once

#include <optional>
#include <string>

#include "snnprune/config.hpp"
#include "snnprune/data.hpp"
#include "snnprune/network.hpp"

namespace snnprune {

struct RunOptions {
  /// Stop (and write state.ckpt) once this many epochs have run in total.
  std::optional<std::size_t> stop_after_epoch;
  /// Run checkpoint (state.ckpt or final.ckpt) to continue from.
  std::string resume_path;
  /// Artifact directory; empty keeps everything in memory.
  std::string out_dir;
};

/// What a run leaves behind. The CSV texts are the exact bytes written to disk.
struct RunSummary {
  std::string command;
  bool completed = false;
  std::size_t epochs_run = 0;   ///< total epochs including resumed ones
  double train_accuracy = 0.0;  ///< last epoch, training mode
  double test_accuracy = 0.0;   ///< last epoch, eval mode
  double sparsity = 0.0;        ///< weight sparsity (unstructured) or channel sparsity (structured)
  std::size_t masked = 0;       ///< pruned connections or channels
  std::size_t structures = 0;   ///< prunable connections or channels
  std::string epochs_csv;
  std::string iterations_csv;
  std::string checkpoint;       ///< serialized final / state checkpoint
};

/// Artifact directory for a run: `override` or cfg.out, placed under
/// $SNNPRUNE_OUT_ROOT when that is set and the path is relative.
std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& override_dir = {});

/// Dense training for cfg.train.epochs epochs.
RunSummary run_train(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// Dense phase, then gradual magnitude pruning with criticality regeneration
/// over N_p epochs, then N_f epochs with frozen masks.
RunSummary run_unstructured(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// Dense phase, N_t epochs with the L1 penalty on BN gamma, channel selection
/// with regeneration, slimming, then N_f fine-tuning epochs.
RunSummary run_structured(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate(Network& net, const Dataset& data, std::size_t batch_size);

/// CSV for one analysis metric: variance | cosine | transition | survival.
/// `checkpoint_b` is needed by transition only.
std::string analyze(const std::string& checkpoint_a, const std::string& checkpoint_b,
                    const std::string& metric);

}  // namespace snnprune
