#include "snnprune/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace snnprune {
namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(char((std::uint64_t(value) >> (8 * i)) & 0xff));
  }
}

void put_string(std::string& out, const std::string& s) {
  put_le(out, std::uint32_t(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= std::uint64_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return T(v);
  }

  std::string get_string() {
    const auto len = get<std::uint32_t>();
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  void expect_magic() {
    need(sizeof(kMagic));
    if (std::memcmp(bytes_.data() + pos_, kMagic, sizeof(kMagic)) != 0) {
      throw IoError("checkpoint: bad magic");
    }
    pos_ += sizeof(kMagic);
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw IoError("checkpoint: missing metadata '" + key + "'");
  return it->second;
}

std::string Checkpoint::meta_or(const std::string& key, const std::string& fallback) const {
  auto it = metadata.find(key);
  return it == metadata.end() ? fallback : it->second;
}

double Checkpoint::meta_double(const std::string& key) const {
  const std::string& v = meta(key);
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw IoError("checkpoint: metadata '" + key + "' is not a number");
  }
}

long long Checkpoint::meta_int(const std::string& key) const {
  const std::string& v = meta(key);
  try {
    return std::stoll(v);
  } catch (const std::exception&) {
    throw IoError("checkpoint: metadata '" + key + "' is not an integer");
  }
}

const Tensor& Checkpoint::entry(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw IoError("checkpoint: missing entry '" + name + "'");
  return it->second;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kVersion);
  put_le(out, std::uint32_t(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    put_string(out, k);
    put_string(out, v);
  }
  put_le(out, std::uint32_t(ckpt.entries.size()));
  for (const auto& [name, t] : ckpt.entries) {
    put_string(out, name);
    put_le(out, std::uint32_t(t.rank()));
    for (std::size_t d : t.shape()) put_le(out, std::uint64_t(d));
    for (double v : t.values()) put_le(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic();
  if (r.get<std::uint32_t>() != kVersion) throw IoError("checkpoint: unsupported version");
  Checkpoint ckpt;
  const auto meta_count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = r.get_string();
    ckpt.metadata[k] = r.get_string();
  }
  const auto entry_count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < entry_count; ++i) {
    std::string name = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = std::size_t(r.get<std::uint64_t>());
    Tensor t(shape);
    for (double& v : t.values()) v = std::bit_cast<double>(r.get<std::uint64_t>());
    ckpt.entries.emplace(std::move(name), std::move(t));
  }
  if (!r.at_end()) throw IoError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  const std::string bytes = serialize_checkpoint(ckpt);
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace snnprune
