#pragma once

#include <string>
#include <vector>

#include "snnprune/criticality.hpp"
#include "snnprune/network.hpp"

namespace snnprune {

/// Channel addressed by BatchNorm ordinal (not network layer index).
struct ChannelRef {
  std::size_t layer = 0;
  std::size_t channel = 0;
  friend bool operator==(const ChannelRef&, const ChannelRef&) = default;
  friend auto operator<=>(const ChannelRef&, const ChannelRef&) = default;
};

/// Surviving channel indices per BatchNorm layer.
struct ChannelPlan {
  std::vector<std::vector<std::size_t>> kept;
  std::vector<std::size_t> widths;

  static ChannelPlan full(const std::vector<std::size_t>& widths);
  void validate() const;
  std::size_t total() const;
  std::size_t kept_total() const;
  bool keeps(const ChannelRef& c) const;

  std::string to_string() const;
  static ChannelPlan parse(const std::string& text);
  friend bool operator==(const ChannelPlan&, const ChannelPlan&) = default;
};

std::vector<std::size_t> batchnorm_widths(const Network& net);
/// gamma of each BatchNorm layer, in order.
std::vector<Tensor> batchnorm_gammas(const Network& net);

/// Ascending |gamma| over every (layer, channel); ties by (layer, channel).
std::vector<ChannelRef> rank_channels(const std::vector<Tensor>& gammas);

struct ChannelSelection {
  ChannelPlan plan;
  double percent = 0.0;
  double extended_percent = 0.0;
  std::vector<ChannelRef> pruned;       ///< pruned at the extended percent
  std::vector<ChannelRef> regenerated;  ///< brought back by criticality
  std::vector<ChannelRef> force_kept;   ///< layer-collapse guard
};

/// Prunes the lowest-|gamma| channels up to percent' = percent + r (1 - percent),
/// then regenerates the pruned channels with the highest criticality until
/// round((1 - percent) total) survive. Ties: |gamma| desc, then (layer, channel).
/// A layer left empty keeps its highest-|gamma| channel.
/// `channel_scores[l]` holds one score per channel of BatchNorm layer l.
ChannelSelection prune_and_regenerate_channels(const std::vector<Tensor>& gammas, double percent,
                                               double regen_ratio,
                                               const std::vector<std::vector<double>>& channel_scores);

/// Channel scores per BatchNorm layer, taken from the LIF right after it.
std::vector<std::vector<double>> channel_scores(const Network& net, const CriticalityTable& table);

/// Architecture after removing the planned channels.
NetworkSpec slim_spec(const NetworkSpec& spec, const ChannelPlan& plan);

/// Physically removes pruned channels: conv outputs, BN entries, the next conv's
/// inputs and the following linear layer's input features.
Network slim(const Network& net, const ChannelPlan& plan);

/// Same architecture with gamma and beta zeroed on pruned channels; a zeroed
/// channel feeds 0 into its LIF, never spikes, and so contributes nothing.
Network mask_channels(const Network& net, const ChannelPlan& plan);

struct LayerFlops {
  std::size_t layer = 0;
  std::string kind;
  double dense = 0.0;
  double slim = 0.0;
};

/// Multiply-accumulates per sample per timestep: conv Cout Cin k k H' W',
/// linear in * out.
struct FlopsReport {
  std::vector<LayerFlops> layers;
  double dense_total = 0.0;
  double slim_total = 0.0;
  double reduction = 0.0;

  std::string to_json() const;
};

std::vector<double> layer_macs(const NetworkSpec& spec);
FlopsReport count_flops(const NetworkSpec& dense, const NetworkSpec& slimmed);
FlopsReport count_flops(const NetworkSpec& dense, const ChannelPlan& plan);

}  // namespace snnprune
