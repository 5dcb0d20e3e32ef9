#pragma once

#include "gazekit/geometry.hpp"

namespace gazekit::pose {

using geom::CameraIntrinsics;
using geom::FacePoints3D;
using geom::LandmarkFrame;
using geom::Matrix3d;
using geom::Vector2d;
using geom::Vector3d;

struct HeadPose {
  Matrix3d R = Matrix3d::Identity();
  Vector3d t = Vector3d::Zero();  // cm

  bool is_rotation(double tol = 1e-6) const {
    return (R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(R.determinant() - 1.0) < tol;
  }
};

struct SolverConfig {
  double z0 = 60.0;        // initial nose depth, cm
  double beta = 0.1;       // radial vote scale
  double delta_max = 5.0;  // per-iteration depth step cap, cm
  double z_stop = 0.25;    // stop once |z update| falls below, cm
  int max_iters = 10;

  void validate() const {
    if (!(z0 > 0) || !(beta > 0) || !(delta_max > 0) || !(z_stop > 0) || max_iters <= 0)
      throw Error(ErrorCode::InvalidInput, "solver config values must be positive");
    if (!(z_stop < delta_max))
      throw Error(ErrorCode::InvalidInput, "z_stop must be below delta_max");
  }
};

struct SolveReport {
  HeadPose pose;
  int iterations = 0;
  double final_z_update = 0.0;        // cm
  double final_reprojection_rmse = 0; // px
  bool converged = false;
};

// Observed-vs-projected radial statistics shared by the vote step and the
// depth solve. m_ratio is the radial spread of the observed points over the
// projected ones, each measured about its own centroid, so a pure
// depth-induced dilation is recovered exactly.
struct RadialStats {
  double vote_sum = 0;   // sum of per-point expand(+1)/contract(-1) votes
  int voting = 0;        // pairs with usable separation
  int total = 0;
  double m_ratio = 1.0;  // observed radial spread / projected radial spread
};

RadialStats radial_stats(const std::vector<Vector2d>& observed,
                         const std::vector<Vector2d>& projected);

// Translation that pins the projected nose to the observed nose pixel at the
// given nose camera depth. With the nose at the face-frame origin this sets
// t.z = nose_depth_cm exactly.
Vector3d nose_pinned_translation(const Vector2d& nose_uv,
                                 const Vector3d& rotated_nose,
                                 double nose_depth_cm,
                                 const CameraIntrinsics& K);

Vector3d init_translation(const LandmarkFrame& frame,
                          const FacePoints3D& metric_points, const Matrix3d& R,
                          const CameraIntrinsics& K, const SolverConfig& cfg);

// Expand/contract consensus step: mean unit-vote scaled by beta, clipped.
// Bounded by beta in magnitude; the depth solve uses the same votes but takes
// its step size from the radial spread ratio.
double radial_step(const std::vector<Vector2d>& observed,
                   const std::vector<Vector2d>& projected,
                   const SolverConfig& cfg);

// Iterative metric-translation recovery: nose-pinned init, radial vote +
// spread-ratio depth updates, similar-triangles XY re-pinning each iteration.
SolveReport solve_translation(const LandmarkFrame& frame,
                              const FacePoints3D& metric_points,
                              const Matrix3d& R, const CameraIntrinsics& K,
                              const SolverConfig& cfg = {});

double reprojection_rmse(const LandmarkFrame& frame,
                         const FacePoints3D& metric_points, const Matrix3d& R,
                         const Vector3d& t, const CameraIntrinsics& K);

struct FramePoseResult {
  SolveReport report;
  double face_scale_cm = 0;        // cm per normalized unit
  FacePoints3D metric_points;      // nose-centered, camera-oriented
  std::string error;               // set when geometry failed; converged stays false
};

// Landmark-only pipeline: reproject with K, normalize about the nose, scale
// by the iris diameter, then solve for the metric translation. The
// reprojected points already carry the camera orientation, so the solve runs
// with an identity rotation; a provider rotation travels alongside the
// result, not through it.
FramePoseResult solve_from_frame(const LandmarkFrame& frame,
                                 const CameraIntrinsics& K,
                                 const SolverConfig& cfg = {});

}  // namespace gazekit::pose
