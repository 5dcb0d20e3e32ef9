#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gazekit/common.hpp"

namespace gazekit::nn {

template <class T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    v.assign(numel(shape), T(0));
  }

  static std::size_t numel(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t size() const { return v.size(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void fill(T x) { std::fill(v.begin(), v.end(), x); }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

template <class T>
void require_shape(const Tensor<T>& t, const std::vector<std::size_t>& expect,
                   const char* what) {
  if (t.shape != expect)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": got " +
                                              shape_str(t.shape) + ", expected " +
                                              shape_str(expect));
}

// A trainable tensor with its gradient accumulator.
template <class T>
struct Param {
  std::string name;
  Tensor<T> w;
  Tensor<T> g;

  explicit Param(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), w(shape), g(shape) {}
  void zero_grad() { g.fill(T(0)); }
};

}  // namespace gazekit::nn
