#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "gazekit/common.hpp"
#include "gazekit/screen.hpp"

namespace gazekit::geom {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Conventional iris diameter (cm) used for metric face scaling.
inline constexpr double kIrisDiameterCm = 1.2;

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0))
      throw Error(ErrorCode::InvalidInput, "focal lengths must be positive");
  }

  // Canonical fallback when a dataset carries no calibration: focal length =
  // image width, principal point = image center.
  static CameraIntrinsics default_for_image(double width_px, double height_px) {
    return {width_px, width_px, width_px / 2.0, height_px / 2.0};
  }
};

// Index map into a landmark set. Data-driven so meshes of any size (the
// 468-point face mesh, small synthetic meshes) go through the same code.
struct LandmarkTopology {
  int nose_idx = 4;
  int left_idx = 356;   // leftmost face edge
  int right_idx = 127;  // rightmost face edge
  std::vector<int> left_iris;
  std::vector<int> right_iris;
  std::array<int, 6> left_eye_ring{};   // p1..p6, p1-p4 horizontal corners
  std::array<int, 6> right_eye_ring{};  // p1..p6
  std::array<int, 4> eye_corner_idxs{}; // outer-left, inner-left, inner-right, outer-right

  void validate(std::size_t n_points) const;
};

// One frame of image-plane landmarks: (u px, v px, z relative depth).
struct LandmarkFrame {
  std::vector<Vector3d> points;
  LandmarkTopology topology;

  void validate() const;
};

enum class PointUnit { RelativeReprojected, Normalized, MetricCm };

struct FacePoints3D {
  std::vector<Vector3d> points;
  PointUnit unit = PointUnit::RelativeReprojected;
};

// Pinhole reprojection of UVZ landmarks into (scaled) 3D.
FacePoints3D reproject(const LandmarkFrame& frame, const CameraIntrinsics& K);

// Rigid transform + pinhole projection. Throws BehindCamera if any
// transformed point ends up at Z <= 0.
std::vector<Vector2d> project(const std::vector<Vector3d>& points,
                              const Matrix3d& R, const Vector3d& t_cm,
                              const CameraIntrinsics& K);
Vector2d project_point(const Vector3d& p, const Matrix3d& R, const Vector3d& t_cm,
                       const CameraIntrinsics& K);

// Center on the nose and scale so the left-right face width is exactly 1.
FacePoints3D normalize_face(const FacePoints3D& reprojected,
                            const LandmarkTopology& topo);

// cm per normalized unit, from the iris pixel diameter. Multiplying the
// normalized points by the result yields metric landmarks.
double estimate_face_scale(const LandmarkFrame& frame,
                           const LandmarkTopology& topo,
                           double alpha_cm = kIrisDiameterCm);

// Mean pixel iris diameter over both eyes (mean of opposing-pair distances).
double iris_pixel_diameter(const LandmarkFrame& frame,
                           const LandmarkTopology& topo);

// Euclidean PoG error in cm between two normalized gaze points.
double pog_error_cm(const Vector2d& g_pred, const Vector2d& g_true,
                    const ScreenSpec& screen);

}  // namespace gazekit::geom
