#include "gazekit/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace gazekit::prep {

Image Image::filled(int h, int w, float r, float g, float b) {
  Image img;
  img.height = h;
  img.width = w;
  img.rgb.resize(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

double ear(const std::array<Vector2d, 6>& p) {
  const double horizontal = (p[0] - p[3]).norm();
  if (!(horizontal > 1e-12))
    throw Error(ErrorCode::DegenerateEye, "eye ring horizontal axis collapsed");
  return ((p[1] - p[5]).norm() + (p[2] - p[4]).norm()) / (2.0 * horizontal);
}

std::array<Vector2d, 6> eye_ring_points(const LandmarkFrame& frame, bool left) {
  const auto& ring = left ? frame.topology.left_eye_ring : frame.topology.right_eye_ring;
  std::array<Vector2d, 6> pts;
  for (int i = 0; i < 6; ++i)
    pts[i] = frame.points[ring[i]].head<2>();
  return pts;
}

bool blink_gate(double left_ear, double right_ear, double threshold) {
  return 0.5 * (left_ear + right_ear) < threshold;
}

Eigen::Matrix3d homography_4pt(const std::array<Vector2d, 4>& src,
                               const std::array<Vector2d, 4>& dst) {
  // Standard DLT with h33 fixed to 1: 8 equations, 8 unknowns.
  Eigen::Matrix<double, 8, 8> A;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x(), y = src[i].y();
    const double u = dst[i].x(), v = dst[i].y();
    A.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    A.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(A);
  if (!lu.isInvertible())
    throw Error(ErrorCode::DegenerateQuad, "homography correspondences are degenerate");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d H;
  H << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return H;
}

namespace {

void bilinear_sample(const Image& img, double x, double y, float* out) {
  // Out-of-frame reads are black.
  if (x < 0 || y < 0 || x > img.width - 1 || y > img.height - 1) {
    out[0] = out[1] = out[2] = 0.0f;
    return;
  }
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  const float* p00 = img.at(y0, x0);
  const float* p01 = img.at(y0, x1);
  const float* p10 = img.at(y1, x0);
  const float* p11 = img.at(y1, x1);
  for (int c = 0; c < 3; ++c) {
    const double top = p00[c] * (1 - fx) + p01[c] * fx;
    const double bot = p10[c] * (1 - fx) + p11[c] * fx;
    out[c] = static_cast<float>(top * (1 - fy) + bot * fy);
  }
}

}  // namespace

EyePatch eye_patch_homography(const Image& image, const LandmarkFrame& landmarks,
                              const PatchSpec& spec) {
  landmarks.validate();
  const auto& corners = landmarks.topology.eye_corner_idxs;
  const Vector2d outer_left = landmarks.points[corners[0]].head<2>();
  const Vector2d outer_right = landmarks.points[corners[3]].head<2>();
  const Vector2d axis = outer_right - outer_left;
  const double d = axis.norm();
  if (!(d > 1e-9))
    throw Error(ErrorCode::DegenerateQuad, "eye corners coincide");
  // Perpendicular pointing toward the brow (negative v for a horizontal axis).
  const Vector2d up = Vector2d(axis.y(), -axis.x()) / d * (spec.height_factor * d);

  const std::array<Vector2d, 4> src = {outer_left + up, outer_right + up,
                                       outer_right - up, outer_left - up};
  const std::array<Vector2d, 4> dst = {
      Vector2d(0, 0), Vector2d(spec.width - 1, 0),
      Vector2d(spec.width - 1, spec.height - 1), Vector2d(0, spec.height - 1)};
  const Eigen::Matrix3d H = homography_4pt(dst, src);  // patch -> source

  EyePatch patch;
  patch.height = spec.height;
  patch.width = spec.width;
  patch.rgb.resize(static_cast<std::size_t>(spec.height) * spec.width * 3);
  float* out = patch.rgb.data();
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x, out += 3) {
      const Eigen::Vector3d q = H * Eigen::Vector3d(x, y, 1.0);
      bilinear_sample(image, q.x() / q.z(), q.y() / q.z(), out);
    }
  }
  return patch;
}

int grid_index(double coord, bool* clamped) {
  const int n = SampleWeightGrid::kCells;
  double cell = std::floor((coord + 0.5) * n);
  if (coord == 0.5) cell = n - 1;  // last bin is closed
  if (cell < 0 || cell > n - 1) {
    if (clamped) *clamped = true;
    cell = std::clamp(cell, 0.0, static_cast<double>(n - 1));
  }
  return static_cast<int>(cell);
}

SampleWeightGrid build_weight_grid(const std::vector<Vector2d>& labels) {
  if (labels.empty())
    throw Error(ErrorCode::InvalidInput, "weight grid needs at least one label");
  const int n = SampleWeightGrid::kCells;
  std::array<int, SampleWeightGrid::kCells * SampleWeightGrid::kCells> counts{};
  for (const auto& g : labels) {
    if (!g.allFinite())
      throw Error(ErrorCode::InvalidInput, "non-finite gaze label");
    counts[grid_index(g.y()) * n + grid_index(g.x())]++;
  }
  SampleWeightGrid grid;
  grid.sample_count = labels.size();
  double sum = 0;
  int nonempty = 0;
  for (int i = 0; i < n * n; ++i) {
    if (counts[i] > 0) {
      grid.cells[i] = 1.0 / counts[i];
      sum += grid.cells[i];
      ++nonempty;
    }
  }
  const double mean = sum / nonempty;
  double max_w = 0;
  for (int i = 0; i < n * n; ++i) {
    if (counts[i] > 0) {
      grid.cells[i] /= mean;
      max_w = std::max(max_w, grid.cells[i]);
    }
  }
  // Unseen regions get the largest observed weight so adaptation stays finite.
  for (int i = 0; i < n * n; ++i)
    if (counts[i] == 0) grid.cells[i] = max_w;
  return grid;
}

double weight_for(const SampleWeightGrid& grid, const Vector2d& g, bool* clamped) {
  const int ix = grid_index(g.x(), clamped);
  const int iy = grid_index(g.y(), clamped);
  return grid.cell(ix, iy);
}

}  // namespace gazekit::prep
