#pragma once

#include "gazekit/container.hpp"
#include "gazekit/tensor.hpp"

namespace gazekit::nn {

template <class T>
std::vector<Tensor<T>> snapshot_params(const std::vector<Param<T>*>& params) {
  std::vector<Tensor<T>> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(p->w);
  return out;
}

template <class T>
void restore_params(const std::vector<Param<T>*>& params,
                    const std::vector<Tensor<T>>& values) {
  if (params.size() != values.size())
    throw Error(ErrorCode::ShapeMismatch, "snapshot/param list mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->w.shape != values[i].shape)
      throw Error(ErrorCode::ShapeMismatch, "snapshot shape mismatch at " + params[i]->name);
    params[i]->w = values[i];
  }
}

template <class T>
std::string params_hash(const std::vector<Param<T>*>& params) {
  io::Container c;
  for (auto* p : params) c.put(p->name, p->w);
  const auto bytes = c.serialize();
  return io::sha256_hex(bytes.data(), bytes.size());
}

}  // namespace gazekit::nn
