#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snnprune {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick self-check of the core invariants: surrogate, LIF, gradients,
/// schedule, sparsity, top-k regeneration, slimming, flops and checkpoints.
std::vector<PropertyResult> run_verify(std::uint64_t seed = 1);

}  // namespace snnprune
