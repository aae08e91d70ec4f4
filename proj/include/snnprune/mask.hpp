#pragma once

#include <vector>

#include "snnprune/tensor.hpp"

namespace snnprune {

/// Binary masks aligned element-for-element with the prunable weight tensors
/// (Network::prunable_weights order). Connections are addressed by a global
/// flat index: tensor order first, then offset within the tensor.
class PruneMask {
 public:
  PruneMask() = default;
  explicit PruneMask(const std::vector<Shape>& shapes);

  std::size_t tensors() const { return masks_.size(); }
  const Tensor& operator[](std::size_t i) const { return masks_.at(i); }
  std::size_t total() const { return total_; }
  std::size_t survivors() const;
  double sparsity() const;

  bool active(std::size_t flat) const;
  void set(std::size_t flat, bool active);
  /// (tensor index, offset) for a global flat index.
  std::pair<std::size_t, std::size_t> locate(std::size_t flat) const;
  std::size_t offset(std::size_t tensor) const { return offsets_.at(tensor); }

  /// Flat 0/1 vector over all connections.
  std::vector<char> bits() const;
  const std::vector<Tensor>& tensors_view() const { return masks_; }

  friend bool operator==(const PruneMask& a, const PruneMask& b) { return a.masks_ == b.masks_; }

 private:
  std::vector<Tensor> masks_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

}  // namespace snnprune
