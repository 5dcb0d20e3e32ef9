#pragma once

#include <Eigen/Dense>
#include <array>

#include "gazekit/tensor.hpp"

namespace gazekit::gaze {

using Eigen::Vector2d;

struct LossWeights {
  double beta_r = 1.0;
  double beta_g = 1.0;
  double beta_c = 0.5;

  void validate() const {
    if (beta_r < 0 || beta_g < 0 || beta_c < 0)
      throw Error(ErrorCode::InvalidInput, "loss weights must be non-negative");
    if (beta_r == 0 && beta_g == 0 && beta_c == 0)
      throw Error(ErrorCode::InvalidInput, "loss weights cannot all be zero");
  }
};

inline constexpr double kConsistencyEps = 1e-8;

// Mean squared pixel error. Optional gradient w.r.t. the reconstruction.
template <class T>
double loss_reconstruction(const nn::Tensor<T>& target, const nn::Tensor<T>& recon,
                           nn::Tensor<T>* grad_recon = nullptr) {
  if (!target.same_shape(recon))
    throw Error(ErrorCode::ShapeMismatch,
                "reconstruction loss: " + nn::shape_str(target.shape) + " vs " +
                    nn::shape_str(recon.shape));
  const std::size_t n = target.size();
  if (n == 0) throw Error(ErrorCode::InvalidInput, "empty reconstruction target");
  if (grad_recon) *grad_recon = nn::Tensor<T>(recon.shape);
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(recon.v[i]) - static_cast<double>(target.v[i]);
    acc += d * d;
    if (grad_recon) grad_recon->v[i] = static_cast<T>(2.0 * d / static_cast<double>(n));
  }
  return acc / static_cast<double>(n);
}

// Weighted L2 over a batch of 2-d gaze predictions:
// (1/B) sum_i w_i * ||pred_i - true_i||^2.
template <class T>
double loss_gaze(const std::vector<nn::Tensor<T>>& pred,
                 const std::vector<Vector2d>& truth, const std::vector<double>& w,
                 std::vector<nn::Tensor<T>>* grad_pred = nullptr) {
  const std::size_t B = pred.size();
  if (B == 0 || truth.size() != B || w.size() != B)
    throw Error(ErrorCode::ShapeMismatch, "gaze loss batch sizes disagree");
  if (grad_pred) grad_pred->assign(B, nn::Tensor<T>({2}));
  double acc = 0;
  for (std::size_t i = 0; i < B; ++i) {
    if (pred[i].size() != 2)
      throw Error(ErrorCode::ShapeMismatch, "gaze prediction must have 2 values");
    const double dx = static_cast<double>(pred[i].v[0]) - truth[i].x();
    const double dy = static_cast<double>(pred[i].v[1]) - truth[i].y();
    if (!is_finite(dx) || !is_finite(dy) || !is_finite(w[i]))
      throw Error(ErrorCode::TrainingDiverged, "non-finite gaze loss input");
    acc += w[i] * (dx * dx + dy * dy);
    if (grad_pred) {
      (*grad_pred)[i].v[0] = static_cast<T>(2.0 * w[i] * dx / static_cast<double>(B));
      (*grad_pred)[i].v[1] = static_cast<T>(2.0 * w[i] * dy / static_cast<double>(B));
    }
  }
  return acc / static_cast<double>(B);
}

// Pairwise embedding-consistency loss. Gaze distances are normalized by the
// batch maximum; pair weights are w_i * w_j. Gradients flow to embeddings
// only (the gaze entries are labels).
template <class T>
double loss_consistency(const std::vector<nn::Tensor<T>>& z,
                        const std::vector<Vector2d>& g, const std::vector<double>& w,
                        double eps = kConsistencyEps,
                        std::vector<nn::Tensor<T>>* grad_z = nullptr) {
  const std::size_t B = z.size();
  if (B < 2 || g.size() != B || w.size() != B)
    throw Error(ErrorCode::ShapeMismatch, "consistency loss needs a batch of >= 2");
  const std::size_t D = z[0].size();
  for (const auto& zi : z)
    if (zi.size() != D)
      throw Error(ErrorCode::ShapeMismatch, "embedding sizes disagree");

  double gmax = 0;
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < B; ++j) gmax = std::max(gmax, (g[i] - g[j]).norm());

  if (grad_z) grad_z->assign(B, nn::Tensor<T>(z[0].shape));
  const double inv_b2 = 1.0 / (static_cast<double>(B) * static_cast<double>(B));
  double acc = 0;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      double zdist = 0;
      for (std::size_t d = 0; d < D; ++d) {
        const double diff = static_cast<double>(z[i].v[d]) - static_cast<double>(z[j].v[d]);
        zdist += diff * diff;
      }
      zdist = std::sqrt(zdist);
      const double delta = (g[i] - g[j]).norm() / (gmax + eps);
      const double wij = w[i] * w[j];
      const double resid = zdist - delta;
      acc += wij * resid * resid;
      if (grad_z && zdist > 1e-300 && i != j) {
        const double coef = inv_b2 * wij * 2.0 * resid / zdist;
        for (std::size_t d = 0; d < D; ++d) {
          const double diff =
              static_cast<double>(z[i].v[d]) - static_cast<double>(z[j].v[d]);
          (*grad_z)[i].v[d] += static_cast<T>(coef * diff);
          (*grad_z)[j].v[d] -= static_cast<T>(coef * diff);
        }
      }
    }
  }
  return acc * inv_b2;
}

inline double loss_total(double recon, double gz, double consist, const LossWeights& w) {
  w.validate();
  return w.beta_r * recon + w.beta_g * gz + w.beta_c * consist;
}

}  // namespace gazekit::gaze
