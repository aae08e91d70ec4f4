#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snnprune/criticality.hpp"
#include "snnprune/data.hpp"
#include "snnprune/lif.hpp"
#include "snnprune/network.hpp"
#include "snnprune/optim.hpp"

namespace snnprune {

enum class NetworkKind { VggMini, Mlp };

/// Everything one experiment needs. Parsed from a `key = value` text file; see
/// README for the key list. Omitted keys take the defaults below.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out = "run";

  NetworkKind network = NetworkKind::VggMini;
  std::vector<std::size_t> widths{16, 32};  // vgg-mini conv stages
  std::vector<std::size_t> hidden{64};      // mlp hidden layers
  std::size_t timesteps = 5;
  LIFParams lif;

  TrainConfig train;  // `epochs` here is the dense (pre)training length
  DatasetSpec dataset;
  std::size_t eval_batch = 256;

  // Unstructured pruning.
  std::size_t prune_epochs = 200;                  // N_p
  std::optional<std::size_t> finetune_epochs;     // N_f; 300 unstructured, 160 structured
  std::size_t interval = 2000;                     // delta_t, in optimizer steps
  double final_sparsity = 0.9;                     // s_f
  std::optional<double> regen_ratio;               // r
  Aggregation aggregation = Aggregation::Max;

  // Structured pruning.
  std::size_t sparsity_epochs = 160;    // N_t
  std::size_t drop1 = 80, drop2 = 120;  // N_1, N_2
  double l1 = 1e-4;                     // s
  double percent = 0.4522;
  double finetune_l1 = 0.0;

  /// r when set, else 0.5 / 0.2 / 0.1 for s_f up to 0.9 / 0.95 / above.
  double unstructured_regen_ratio() const;
  /// r when set, else 0.1.
  double structured_regen_ratio() const;
  std::size_t unstructured_finetune_epochs() const { return finetune_epochs.value_or(300); }
  std::size_t structured_finetune_epochs() const { return finetune_epochs.value_or(160); }

  /// The configured architecture for a dataset of the given shape.
  NetworkSpec network_spec(InputGeometry input, std::size_t classes) const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Canonical text: every key, fixed order, shortest round-trip numbers.
  std::string to_text() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace snnprune
