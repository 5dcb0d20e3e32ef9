#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/headpose.hpp"
#include "gazekit/preprocess.hpp"

namespace gazekit::sim {

using geom::CameraIntrinsics;
using geom::LandmarkFrame;
using geom::LandmarkTopology;
using geom::Matrix3d;
using geom::Vector2d;
using geom::Vector3d;

// Canonical synthetic head: nose at the origin, x to the subject's left,
// y down, z away from the camera (the face surface points toward -z).
struct SyntheticFaceSpec {
  std::vector<Vector3d> canonical_cm;
  LandmarkTopology topology;
  double face_width_cm = 14.0;
  double iris_diameter_cm = geom::kIrisDiameterCm;
  double eyeball_radius_cm = 1.1;
  std::uint64_t texture_seed = 0;

  static SyntheticFaceSpec standard(std::uint64_t texture_seed = 0);
};

struct GroundTruth {
  Matrix3d R = Matrix3d::Identity();
  Vector3d t = Vector3d::Zero();  // cm, camera frame
  Vector2d gaze = Vector2d::Zero();
  Vector2d eye_state = Vector2d::Zero();  // tangent-space state the irises encode
  bool blink = false;
  double sigma_px = 0.0;
};

struct SyntheticScene {
  SyntheticFaceSpec face;
  Matrix3d R = Matrix3d::Identity();
  Vector3d t = Vector3d(0, 0, 60);
  CameraIntrinsics camera{600, 600, 320, 240};
  int image_width = 640, image_height = 480;
  ScreenSpec screen;
  Vector2d screen_center_offset_cm = Vector2d(0, 11.5);  // screen center below camera
  Vector2d gaze = Vector2d::Zero();                      // normalized, in [-0.5,0.5]^2
  Vector2d gaze_gain = Vector2d(1, 1);                   // per-user appearance map
  Vector2d gaze_bias = Vector2d(0, 0);             // tangent units
  double sigma_px = 0.0;
  std::uint64_t noise_seed = 0;
  bool blink = false;

  void validate() const;
};

struct RenderedScene {
  LandmarkFrame frame;
  prep::Image image;
  GroundTruth truth;
};

RenderedScene render_scene(const SyntheticScene& scene);

Matrix3d rotation_ypr(double yaw_rad, double pitch_rad, double roll_rad);

// Per-user gaze idiosyncrasy: the same eye appearance maps to a shifted and
// scaled point of gaze, which is what personalization has to absorb.
struct SyntheticUser {
  std::string user_id;
  Vector2d gaze_gain = Vector2d(1, 1);
  Vector2d gaze_bias = Vector2d(0, 0);
  std::uint64_t appearance_seed = 0;

  static SyntheticUser from_id(const std::string& id, std::uint64_t base_seed);
};

struct UserDatasetConfig {
  int image_width = 640, image_height = 480;
  CameraIntrinsics camera{600, 600, 320, 240};
  ScreenSpec screen;
  double depth_min_cm = 45, depth_max_cm = 75;
  double xy_range_cm = 4.0;
  double yaw_pitch_max_rad = 0.14;  // ~8 deg
  double roll_max_rad = 0.21;      // ~12 deg
  double sigma_px = 0.0;
  double blink_rate = 0.0;
  double grid_extent = 0.35;       // 3x3 dot-test grid at +-extent
  std::uint64_t scene_seed = 1;    // shared across users so scenes align
};

struct UserSample {
  SyntheticScene scene;
  RenderedScene rendered;
  bool grid = false;  // one of the nine dot-test calibration points
  std::int64_t timestamp = 0;
};

// First nine samples sweep the 3x3 dot-test grid, the rest draw gaze uniformly.
std::vector<UserSample> make_user_dataset(const SyntheticUser& user, int n,
                                          const UserDatasetConfig& cfg = {});

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

}  // namespace gazekit::sim
