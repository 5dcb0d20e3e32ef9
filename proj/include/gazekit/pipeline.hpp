#pragma once

#include "gazekit/dataset.hpp"
#include "gazekit/headpose.hpp"
#include "gazekit/train.hpp"

namespace gazekit::pipe {

using geom::Vector2d;

// One manifest sample after geometry: solved metric pose, blink flag,
// normalized label, network-ready tensors.
struct PreparedSample {
  std::string user;
  std::int64_t ts = 0;
  bool grid = false;
  bool blink_suppressed = false;
  bool pose_converged = false;
  bool label_clamped = false;
  double left_ear = 0, right_ear = 0;
  pose::SolveReport pose;
  nn::Tensor<float> patch;   // (H,W,3)
  nn::Tensor<float> pose12;  // raw [R_provider | t_solved]
  Vector2d g = Vector2d::Zero();
};

struct PrepareOptions {
  pose::SolverConfig solver;
  double blink_threshold = prep::kDefaultBlinkThreshold;
};

struct PreparedDataset {
  std::vector<PreparedSample> samples;
  bool used_default_intrinsics = false;
  data::IterationStats stats;
};

PreparedDataset prepare(const data::DatasetManifest& manifest,
                        const PrepareOptions& opts = {});

// Flattened [R | t] head-pose input vector.
nn::Tensor<float> pose_vector(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

// Inverse-frequency weights from the given samples' labels.
prep::SampleWeightGrid weight_grid_of(const std::vector<const PreparedSample*>& samples);

gaze::TrainSample<float> to_train_sample(const PreparedSample& s,
                                         const prep::SampleWeightGrid& grid);

// Split helper: pointers to samples whose user is in `users`, skipping
// blink-suppressed ones when requested.
std::vector<const PreparedSample*> select(const PreparedDataset& ds,
                                          const std::vector<std::string>& users,
                                          bool drop_blinks);

}  // namespace gazekit::pipe
