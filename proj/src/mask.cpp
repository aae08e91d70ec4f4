#include "snnprune/mask.hpp"

#include <algorithm>

namespace snnprune {

PruneMask::PruneMask(const std::vector<Shape>& shapes) {
  for (const auto& s : shapes) {
    offsets_.push_back(total_);
    masks_.emplace_back(s, 1.0);
    total_ += numel(s);
  }
}

std::size_t PruneMask::survivors() const {
  std::size_t n = 0;
  for (const auto& m : masks_)
    for (double v : m.values()) n += v != 0.0;
  return n;
}

double PruneMask::sparsity() const {
  return total_ == 0 ? 0.0 : 1.0 - double(survivors()) / double(total_);
}

std::pair<std::size_t, std::size_t> PruneMask::locate(std::size_t flat) const {
  if (flat >= total_) throw ArgumentError("mask index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  const std::size_t t = std::size_t(it - offsets_.begin()) - 1;
  return {t, flat - offsets_[t]};
}

bool PruneMask::active(std::size_t flat) const {
  const auto [t, i] = locate(flat);
  return masks_[t][i] != 0.0;
}

void PruneMask::set(std::size_t flat, bool on) {
  const auto [t, i] = locate(flat);
  masks_[t][i] = on ? 1.0 : 0.0;
}

std::vector<char> PruneMask::bits() const {
  std::vector<char> out;
  out.reserve(total_);
  for (const auto& m : masks_)
    for (double v : m.values()) out.push_back(v != 0.0);
  return out;
}

}  // namespace snnprune
