#include "snnprune/data.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace snnprune {

Tensor Dataset::gather(std::span<const std::size_t> indices) const {
  const Shape4 s = images.shape4();
  const std::size_t per = s.channels * s.plane();
  Tensor out({indices.size(), s.channels, s.height, s.width});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= s.batch) throw ArgumentError("dataset index out of range");
    std::copy_n(images.data() + indices[i] * per, per, out.data() + i * per);
  }
  return out;
}

std::vector<int> Dataset::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels.at(i));
  return out;
}

void DatasetSpec::validate() const {
  if (source == DataSource::Idx) {
    if (train_images.empty() || train_labels.empty() || test_images.empty() || test_labels.empty()) {
      throw ArgumentError("idx dataset needs train/test image and label paths");
    }
    if (!(norm_std > 0)) throw ArgumentError("norm_std must be > 0");
    return;
  }
  if (classes < 2) throw ArgumentError("synthetic dataset needs at least 2 classes");
  if (channels == 0 || height == 0 || width == 0) throw ArgumentError("synthetic dataset has a zero dimension");
  if (train_samples == 0 || test_samples == 0) throw ArgumentError("synthetic dataset needs samples in both splits");
  if (!(separation >= 0)) throw ArgumentError("separation must be >= 0");
}

DataSplit make_synthetic(const DatasetSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t per = spec.channels * spec.height * spec.width;
  std::vector<std::vector<double>> prototypes(spec.classes, std::vector<double>(per));
  for (auto& p : prototypes)
    for (double& v : p) v = rng.normal();

  auto draw = [&](std::size_t n) {
    Dataset d;
    d.classes = spec.classes;
    d.images = Tensor({n, spec.channels, spec.height, spec.width});
    for (std::size_t i = 0; i < n; ++i) {
      const int label = int(i % spec.classes);
      d.labels.push_back(label);
      double* dst = d.images.data() + i * per;
      for (std::size_t j = 0; j < per; ++j) dst[j] = spec.separation * prototypes[label][j] + rng.normal();
    }
    return d;
  };
  DataSplit split;
  split.train = draw(spec.train_samples);
  split.test = draw(spec.test_samples);
  return split;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::uint32_t be32(const std::string& b, std::size_t pos) {
  if (pos + 4 > b.size()) throw IoError("idx: truncated header");
  return (std::uint32_t(std::uint8_t(b[pos])) << 24) | (std::uint32_t(std::uint8_t(b[pos + 1])) << 16) |
         (std::uint32_t(std::uint8_t(b[pos + 2])) << 8) | std::uint32_t(std::uint8_t(b[pos + 3]));
}

// Returns dims; data starts after the header.
std::vector<std::size_t> idx_header(const std::string& b, const std::string& path) {
  if (b.size() < 4 || b[0] != 0 || b[1] != 0) throw IoError("idx: bad magic in " + path);
  if (std::uint8_t(b[2]) != 0x08) throw IoError("idx: only unsigned byte data supported in " + path);
  const std::size_t rank = std::uint8_t(b[3]);
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < rank; ++i) dims.push_back(be32(b, 4 + 4 * i));
  std::size_t count = 1;
  for (std::size_t d : dims) count *= d;
  if (b.size() != 4 + 4 * rank + count) throw IoError("idx: size does not match header in " + path);
  return dims;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, double mean,
                 double std) {
  const std::string ib = read_file(images_path);
  const std::string lb = read_file(labels_path);
  const auto idims = idx_header(ib, images_path);
  const auto ldims = idx_header(lb, labels_path);
  if (idims.size() != 3 && idims.size() != 4) throw IoError("idx: images must be rank 3 or 4");
  if (ldims.size() != 1 || ldims[0] != idims[0]) throw IoError("idx: label count does not match images");

  Dataset d;
  const std::size_t n = idims[0];
  const std::size_t c = idims.size() == 4 ? idims[1] : 1;
  const std::size_t h = idims[idims.size() - 2], w = idims.back();
  d.images = Tensor({n, c, h, w});
  const std::size_t off = 4 + 4 * idims.size();
  for (std::size_t i = 0; i < d.images.size(); ++i)
    d.images[i] = (double(std::uint8_t(ib[off + i])) / 255.0 - mean) / std;
  const std::size_t loff = 4 + 4;
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = std::uint8_t(lb[loff + i]);
    d.labels.push_back(y);
    max_label = std::max(max_label, y);
  }
  d.classes = std::size_t(max_label) + 1;
  return d;
}

DataSplit load_dataset(const DatasetSpec& spec, Rng& rng) {
  if (spec.source == DataSource::Synthetic) return make_synthetic(spec, rng);
  spec.validate();
  DataSplit s;
  s.train = load_idx(spec.train_images, spec.train_labels, spec.norm_mean, spec.norm_std);
  s.test = load_idx(spec.test_images, spec.test_labels, spec.norm_mean, spec.norm_std);
  const std::size_t classes = std::max(s.train.classes, s.test.classes);
  s.train.classes = s.test.classes = classes;
  return s;
}

}  // namespace snnprune
