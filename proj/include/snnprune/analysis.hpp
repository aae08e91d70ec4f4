#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnprune/checkpoint.hpp"
#include "snnprune/data.hpp"
#include "snnprune/mask.hpp"
#include "snnprune/network.hpp"
#include "snnprune/prune_structured.hpp"

namespace snnprune {

// ---------------------------------------------------------------------------
// Feature geometry

enum class Split { Train, Test };

/// One row per sample: the time mean of the activation entering the classifier.
struct FeatureBank {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  Split split = Split::Train;
  bool normalized = false;

  /// Scales every row to unit L2 norm (zero rows stay zero).
  void normalize();
  /// Rows belonging to one class.
  Eigen::MatrixXd class_rows(int label) const;
};

FeatureBank extract_features(Network& net, const Dataset& data, Split split,
                             std::size_t batch_size = 256);

/// Mean squared L2 distance of the (normalized) class vectors to their mean.
double intra_cluster_variance(const FeatureBank& bank, int label);

/// Cosine of the angle between the class means of two banks.
double class_mean_cosine(const FeatureBank& train, const FeatureBank& test, int label);

// ---------------------------------------------------------------------------
// Importance transition of non-overlapping channels

struct TransitionResult {
  double mean_a = 0.0;  ///< mean normalized |gamma| over channels only model A keeps
  double mean_b = 0.0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::vector<double> layer_mean_a;  ///< NaN where a layer has no A-only channel
  std::vector<double> layer_mean_b;
};

/// `gammas_*[l]` lists gamma of the kept channels of layer l in plan order.
/// Each model's |gamma| is divided by its per-layer max. Returns nullopt when
/// the plans keep exactly the same channels.
std::optional<TransitionResult> importance_transition(const ChannelPlan& plan_a,
                                                      const std::vector<Tensor>& gammas_a,
                                                      const ChannelPlan& plan_b,
                                                      const std::vector<Tensor>& gammas_b);

// ---------------------------------------------------------------------------
// Regeneration survival

struct SurvivalRecord {
  std::size_t iteration = 0;
  std::size_t pruned = 0;       ///< removed by magnitude this iteration
  std::size_t regenerated = 0;  ///< brought back by criticality
  std::size_t rescued = 0;      ///< regenerated among this iteration's pruned
  double rescue_fraction = 0.0;
  friend bool operator==(const SurvivalRecord&, const SurvivalRecord&) = default;
};

/// Live bookkeeping of prune/regenerate iterations plus the provenance of every
/// structure: flagged while it is alive because of a regeneration.
class SurvivalLedger {
 public:
  SurvivalLedger() = default;
  explicit SurvivalLedger(std::size_t structures) : provenance_(structures, 0) {}

  void record(std::size_t iteration, std::span<const std::size_t> pruned,
              std::span<const std::size_t> regenerated);

  const std::vector<SurvivalRecord>& records() const { return records_; }
  const std::vector<char>& provenance() const { return provenance_; }
  /// Share of surviving structures that are alive via regeneration.
  double provenance_fraction(const std::vector<char>& alive) const;

  void save(Checkpoint& ckpt, const std::string& prefix = "ledger/") const;
  static SurvivalLedger load(const Checkpoint& ckpt, const std::string& prefix = "ledger/");

  friend bool operator==(const SurvivalLedger&, const SurvivalLedger&) = default;

 private:
  std::vector<SurvivalRecord> records_;
  std::vector<char> provenance_;
};

/// Per-iteration masks: before pruning, after pruning, after regeneration.
struct MaskSnapshot {
  std::size_t iteration = 0;
  std::vector<char> before;
  std::vector<char> after_prune;
  std::vector<char> after_regen;
};

struct MaskHistory {
  std::vector<MaskSnapshot> snapshots;

  Checkpoint to_checkpoint() const;
  static MaskHistory from_checkpoint(const Checkpoint& ckpt);
};

/// Rebuilds the ledger from mask differences alone.
SurvivalLedger recompute_survival(const MaskHistory& history, std::size_t structures);

/// CSV: iteration,pruned,regenerated,rescued,rescue_fraction, then a trailer row
/// "final,,,,<provenance fraction>".
std::string survival_report(const SurvivalLedger& ledger, const std::vector<char>& alive);

}  // namespace snnprune
