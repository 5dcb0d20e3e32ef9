#pragma once

#include <array>
#include <string>
#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/screen.hpp"

namespace gazekit::prep {

using geom::LandmarkFrame;
using geom::Vector2d;

// Row-major RGB raster with float intensities in [0,1].
struct Image {
  int height = 0, width = 0;
  std::vector<float> rgb;  // height*width*3

  float* at(int y, int x) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const float* at(int y, int x) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  static Image filled(int h, int w, float r, float g, float b);
};

// Both-eyes strip fed to the gaze network.
struct EyePatch {
  int height = 128, width = 512;
  std::vector<float> rgb;  // height*width*3, values in [0,1]
  std::string source_frame_id;
};

struct PatchSpec {
  int height = 128;
  int width = 512;
  double height_factor = 0.35;  // half-height of source quad / corner distance
};

inline constexpr double kDefaultBlinkThreshold = 0.2;

// Eye aspect ratio over a 6-point ring, p1..p6 with p1-p4 the horizontal axis.
double ear(const std::array<Vector2d, 6>& eye_ring);

// Extract a ring from a frame via its topology (left=true picks the left ring).
std::array<Vector2d, 6> eye_ring_points(const LandmarkFrame& frame, bool left);

// True = suppress the sample (blink). Strict less-than on the mean.
bool blink_gate(double left_ear, double right_ear,
                double threshold = kDefaultBlinkThreshold);

// 3x3 homography mapping src quad corners onto dst quad corners (4-point DLT).
Eigen::Matrix3d homography_4pt(const std::array<Vector2d, 4>& src,
                               const std::array<Vector2d, 4>& dst);

// Warp the eye strip (outer corner to outer corner, +-height_factor of the
// corner distance perpendicular) into an upright patch. Bilinear sampling;
// out-of-frame reads as black.
EyePatch eye_patch_homography(const Image& image, const LandmarkFrame& landmarks,
                              const PatchSpec& spec = {});

// Inverse-frequency sample weights over a 30x30 grid on [-0.5,0.5]^2.
struct SampleWeightGrid {
  static constexpr int kCells = 30;
  std::array<double, kCells * kCells> cells{};
  std::size_t sample_count = 0;

  double cell(int ix, int iy) const { return cells[iy * kCells + ix]; }
};

SampleWeightGrid build_weight_grid(const std::vector<Vector2d>& labels);

// Cell index for a normalized gaze coordinate; bins half-open except the last.
int grid_index(double coord, bool* clamped = nullptr);

double weight_for(const SampleWeightGrid& grid, const Vector2d& g,
                  bool* clamped = nullptr);

}  // namespace gazekit::prep
