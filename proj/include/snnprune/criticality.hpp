#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnprune/lif.hpp"
#include "snnprune/network.hpp"

namespace snnprune {

enum class Aggregation { Mean, Max };

/// Per-unit scores of one batch, for every LIF layer (in LIF order). A unit is a
/// channel for image-shaped layers and a neuron for flat layers.
struct BatchScores {
  std::vector<std::vector<double>> mean;  ///< per-unit mean over the batch
  std::vector<std::vector<double>> sum;   ///< per-unit sum over the batch
  std::size_t samples = 0;
};

/// Time mean of g'(h - v_threshold) per neuron; spatial max or mean per channel
/// for image-shaped layers; then summed / averaged over the batch.
BatchScores score_batch(std::span<const LIFLayerState* const> states,
                        Aggregation aggregation = Aggregation::Max);

/// Running per-unit score sums. Scores are sum / count, in (0, 1].
class CriticalityTable {
 public:
  CriticalityTable() = default;
  explicit CriticalityTable(std::vector<std::size_t> units_per_layer);

  void accumulate(const BatchScores& batch);
  /// Adds another table's sums and counts (order-independent up to rounding).
  void merge(const CriticalityTable& other);
  /// Freezes sum / count. Throws StateError when nothing was accumulated.
  const std::vector<std::vector<double>>& finalize();

  bool finalized() const { return finalized_; }
  const std::vector<std::vector<double>>& scores() const;
  std::size_t layers() const { return sums_.size(); }
  std::size_t count() const { return count_; }

  /// CSV rows "layer,unit,score" (layer = LIF ordinal).
  std::string to_csv() const;

 private:
  std::vector<std::vector<double>> sums_;
  std::vector<std::vector<double>> scores_;
  std::size_t count_ = 0;
  bool finalized_ = false;
};

/// Units per LIF layer of a network, in LIF order.
std::vector<std::size_t> lif_unit_counts(const Network& net);

/// Per-weight criticality for one Conv/Linear layer (network layer index).
/// A weight inherits the score of its post-synaptic unit; the linear head,
/// which has no spiking output, inherits the score of its pre-synaptic unit.
Tensor connection_scores(const Network& net, const CriticalityTable& table, std::size_t layer);

/// connection_scores for every prunable weight, in prunable order.
std::vector<Tensor> connection_scores(const Network& net, const CriticalityTable& table);

}  // namespace snnprune
