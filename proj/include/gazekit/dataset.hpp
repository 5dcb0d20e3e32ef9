#pragma once

#include <map>
#include <optional>

#include "gazekit/container.hpp"
#include "gazekit/preprocess.hpp"
#include "gazekit/simulator.hpp"

namespace gazekit::data {

using geom::Vector2d;
using geom::Vector3d;

// Pixel gaze label -> normalized gaze with origin at screen center.
Vector2d normalize_gaze(const Vector2d& px, const ScreenSpec& screen,
                        bool* clamped = nullptr);
Vector2d denormalize_gaze(const Vector2d& g, const ScreenSpec& screen);

struct SampleEntry {
  std::string user;
  std::int64_t ts = 0;
  std::vector<Vector3d> landmarks;  // (u px, v px, z relative)
  Eigen::Matrix3d provider_R = Eigen::Matrix3d::Identity();
  Vector2d gaze_px = Vector2d::Zero();
  bool grid = false;
  std::string patch_key;
};

struct DatasetManifest {
  int version = 1;
  std::string dir;
  geom::LandmarkTopology topology;
  std::optional<geom::CameraIntrinsics> intrinsics;
  double image_width = 0, image_height = 0;
  ScreenSpec screen;
  std::map<std::string, std::vector<std::string>> splits;
  std::string patch_store;  // relative path of the patch container
  std::size_t patch_h = 0, patch_w = 0;
  std::vector<SampleEntry> samples;  // sorted by (user, ts)
  std::vector<std::string> load_errors;  // per-sample parse failures, isolated

  bool default_intrinsics() const { return !intrinsics.has_value(); }
  geom::CameraIntrinsics effective_K() const {
    return intrinsics ? *intrinsics
                      : geom::CameraIntrinsics::default_for_image(image_width,
                                                                  image_height);
  }
  geom::LandmarkFrame frame_for(const SampleEntry& s) const {
    geom::LandmarkFrame f;
    f.points = s.landmarks;
    f.topology = topology;
    return f;
  }
};

// Parses and validates the manifest; verifies file hashes. Structural
// problems at the top level throw with a JSON-pointer path; malformed
// individual samples are isolated into load_errors.
DatasetManifest load_manifest(const std::string& path);

struct LoadedSample {
  const SampleEntry* entry = nullptr;
  prep::EyePatch patch;
};

struct IterationStats {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> errors;
};

// Streams samples with their patches. A bad sample is logged and skipped,
// never fatal.
std::vector<LoadedSample> iterate(const DatasetManifest& manifest,
                                  IterationStats* stats = nullptr);

struct TruthRecord {
  Vector3d t = Vector3d::Zero();
  Vector2d gaze = Vector2d::Zero();
  bool blink = false;
};

using TruthMap = std::map<std::pair<std::string, std::int64_t>, TruthRecord>;
TruthMap load_truth(const std::string& path);

// ---- synthetic dataset emission (simulator -> manifest + containers) ----
struct SyntheticDatasetSpec {
  std::vector<std::string> train_users;
  std::vector<std::string> val_users;
  std::vector<std::string> meta_test_users;
  int samples_per_user = 100;
  sim::UserDatasetConfig scene_cfg;
  prep::PatchSpec patch;
  std::uint64_t seed = 1;  // drives user parameters and per-user scenes
};

void write_synthetic_dataset(const std::string& dir, const SyntheticDatasetSpec& spec);

// Embedding caches carry the encoder hash that produced them.
bool embedding_cache_valid(const std::string& path, const std::string& encoder_hash);

}  // namespace gazekit::data
