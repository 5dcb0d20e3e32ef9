#pragma once

#include <cmath>

#include "gazekit/tensor.hpp"

namespace gazekit::nn {

enum class OptKind { Sgd, Adam };

// SGD or Adam over a fixed parameter list. The exponential schedule
// multiplies the base rate by decay^epoch when enabled.
template <class T>
class Optimizer {
 public:
  static Optimizer sgd(double lr) {
    Optimizer o;
    o.kind_ = OptKind::Sgd;
    o.base_lr_ = lr;
    return o;
  }
  static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8) {
    Optimizer o;
    o.kind_ = OptKind::Adam;
    o.base_lr_ = lr;
    o.beta1_ = beta1;
    o.beta2_ = beta2;
    o.eps_ = eps;
    return o;
  }

  void enable_decay(double rate) { decay_ = rate; }
  void set_epoch(int epoch) { epoch_ = epoch; }
  double current_lr() const {
    return decay_ > 0 ? base_lr_ * std::pow(decay_, epoch_) : base_lr_;
  }
  OptKind kind() const { return kind_; }
  std::int64_t step_count() const { return step_; }

  void step(const std::vector<Param<T>*>& params) {
    for (auto* p : params)
      for (const T g : p->g.v)
        if (!is_finite(g))
          throw Error(ErrorCode::TrainingDiverged,
                      "non-finite gradient in " + p->name);
    const double lr = current_lr();
    ++step_;
    if (kind_ == OptKind::Sgd) {
      for (auto* p : params)
        for (std::size_t i = 0; i < p->w.size(); ++i)
          p->w.v[i] -= static_cast<T>(lr) * p->g.v[i];
      return;
    }
    if (m_.empty()) {
      for (auto* p : params) {
        m_.emplace_back(p->w.shape);
        v_.emplace_back(p->w.shape);
      }
    }
    if (m_.size() != params.size())
      throw Error(ErrorCode::InvalidInput, "optimizer bound to a different model");
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      auto& p = *params[pi];
      auto& m = m_[pi];
      auto& v = v_[pi];
      for (std::size_t i = 0; i < p.w.size(); ++i) {
        const double g = static_cast<double>(p.g.v[i]);
        const double mi = beta1_ * static_cast<double>(m.v[i]) + (1 - beta1_) * g;
        const double vi = beta2_ * static_cast<double>(v.v[i]) + (1 - beta2_) * g * g;
        m.v[i] = static_cast<T>(mi);
        v.v[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        p.w.v[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  OptKind kind_ = OptKind::Sgd;
  double base_lr_ = 1e-3;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  double decay_ = 0.0;
  int epoch_ = 0;
  std::int64_t step_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace gazekit::nn
