#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gazekit/common.hpp"
#include "gazekit/tensor.hpp"

namespace gazekit::io {

// Versioned binary tensor container: magic "GZTC", u32 version, string
// metadata map, then named tensors (dtype tag, shape table, raw buffer).
// All multi-byte integers and floats are little-endian. Used for model
// checkpoints, patch stores, and embedding caches.
inline constexpr char kMagic[4] = {'G', 'Z', 'T', 'C'};
inline constexpr std::uint32_t kVersion = 1;

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

struct TensorEntry {
  DType dtype = DType::F32;
  std::vector<std::size_t> shape;
  std::vector<float> f32;
  std::vector<double> f64;

  std::size_t numel() const { return nn::Tensor<float>::numel(shape); }

  template <class T>
  nn::Tensor<T> as() const {
    nn::Tensor<T> t(shape);
    if (dtype == DType::F32)
      for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = static_cast<T>(f32[i]);
    else
      for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = static_cast<T>(f64[i]);
    return t;
  }
};

class Container {
 public:
  std::map<std::string, std::string> meta;

  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  const TensorEntry& get(const std::string& name) const;
  std::vector<std::string> names() const;

  void put(const std::string& name, const nn::Tensor<float>& t);
  void put(const std::string& name, const nn::Tensor<double>& t);

  void save(const std::string& path) const;
  static Container load(const std::string& path);

  // Bytes as they would be written; basis for checkpoint hashes.
  std::vector<std::uint8_t> serialize() const;

 private:
  std::map<std::string, TensorEntry> entries_;
};

std::string sha256_hex(const std::uint8_t* data, std::size_t len);
std::string sha256_hex(const std::string& text);
std::string sha256_file_hex(const std::string& path);

}  // namespace gazekit::io
