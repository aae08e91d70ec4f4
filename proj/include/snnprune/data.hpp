#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snnprune/rng.hpp"
#include "snnprune/tensor.hpp"

namespace snnprune {

struct Dataset {
  Tensor images;            ///< [N, C, H, W]
  std::vector<int> labels;  ///< in [0, classes)
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  Tensor gather(std::span<const std::size_t> indices) const;
  std::vector<int> gather_labels(std::span<const std::size_t> indices) const;
};

enum class DataSource { Synthetic, Idx };

struct DatasetSpec {
  DataSource source = DataSource::Synthetic;
  std::size_t classes = 3;
  std::size_t train_samples = 600;
  std::size_t test_samples = 300;
  std::size_t channels = 1;
  std::size_t height = 8;
  std::size_t width = 8;
  double separation = 1.0;  ///< prototype scale relative to unit noise
  std::string train_images, train_labels, test_images, test_labels;
  double norm_mean = 0.0;   ///< Idx only: (pixel / 255 - mean) / std
  double norm_std = 1.0;

  void validate() const;
};

struct DataSplit {
  Dataset train;
  Dataset test;
};

/// Gaussian class blobs: each class draws a prototype image from N(0, 1); a
/// sample is separation * prototype + N(0, 1) noise. Labels cycle through the
/// classes. Draw order: prototypes, train samples, test samples.
DataSplit make_synthetic(const DatasetSpec& spec, Rng& rng);

/// Reads an IDX image file (u8, rank 3 or 4) and its IDX label file.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, double mean,
                 double std);

/// Synthetic draw or IDX load, per spec.source.
DataSplit load_dataset(const DatasetSpec& spec, Rng& rng);

}  // namespace snnprune
