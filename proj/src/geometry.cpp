#include "gazekit/geometry.hpp"

#include <algorithm>
#include <set>

namespace gazekit::geom {

namespace {

void check_index(int idx, std::size_t n, const char* what) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= n)
    throw Error(ErrorCode::InvalidInput,
                std::string(what) + " index out of range: " + std::to_string(idx));
}

}  // namespace

void LandmarkTopology::validate(std::size_t n_points) const {
  check_index(nose_idx, n_points, "nose");
  check_index(left_idx, n_points, "left");
  check_index(right_idx, n_points, "right");
  auto check_list = [&](const std::vector<int>& v, const char* what) {
    std::set<int> seen;
    for (int i : v) {
      check_index(i, n_points, what);
      if (!seen.insert(i).second)
        throw Error(ErrorCode::InvalidInput, std::string(what) + " indices not distinct");
    }
  };
  check_list(left_iris, "left iris");
  check_list(right_iris, "right iris");
  for (const auto& ring : {left_eye_ring, right_eye_ring}) {
    std::set<int> seen;
    for (int i : ring) {
      check_index(i, n_points, "eye ring");
      if (!seen.insert(i).second)
        throw Error(ErrorCode::InvalidInput, "eye ring indices not distinct");
    }
  }
  for (int i : eye_corner_idxs) check_index(i, n_points, "eye corner");
}

void LandmarkFrame::validate() const {
  if (points.size() < 7)
    throw Error(ErrorCode::InvalidInput, "landmark frame needs at least 7 points");
  topology.validate(points.size());
  for (const auto& p : points)
    if (!p.allFinite())
      throw Error(ErrorCode::InvalidInput, "non-finite landmark coordinate");
}

FacePoints3D reproject(const LandmarkFrame& frame, const CameraIntrinsics& K) {
  K.validate();
  frame.validate();
  FacePoints3D out;
  out.unit = PointUnit::RelativeReprojected;
  out.points.reserve(frame.points.size());
  for (const auto& p : frame.points) {
    const double u = p.x(), v = p.y(), z = p.z();
    out.points.emplace_back((u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z);
  }
  return out;
}

Vector2d project_point(const Vector3d& p, const Matrix3d& R, const Vector3d& t_cm,
                       const CameraIntrinsics& K) {
  const Vector3d c = R * p + t_cm;
  if (!(c.z() > 0))
    throw Error(ErrorCode::BehindCamera, "point behind camera after transform");
  return {K.fx * c.x() / c.z() + K.cx, K.fy * c.y() / c.z() + K.cy};
}

std::vector<Vector2d> project(const std::vector<Vector3d>& points,
                              const Matrix3d& R, const Vector3d& t_cm,
                              const CameraIntrinsics& K) {
  K.validate();
  std::vector<Vector2d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_point(p, R, t_cm, K));
  return out;
}

FacePoints3D normalize_face(const FacePoints3D& reprojected,
                            const LandmarkTopology& topo) {
  topo.validate(reprojected.points.size());
  const Vector3d nose = reprojected.points[topo.nose_idx];
  const Vector3d left = reprojected.points[topo.left_idx];
  const Vector3d right = reprojected.points[topo.right_idx];
  const double width = (left - right).norm();
  if (!(width > 1e-12))
    throw Error(ErrorCode::DegenerateFace, "left/right landmarks coincide");
  FacePoints3D out;
  out.unit = PointUnit::Normalized;
  out.points.reserve(reprojected.points.size());
  for (const auto& p : reprojected.points) out.points.push_back((p - nose) / width);
  return out;
}

double iris_pixel_diameter(const LandmarkFrame& frame,
                           const LandmarkTopology& topo) {
  auto one_eye = [&](const std::vector<int>& ring) {
    if (ring.size() < 2 || ring.size() % 2 != 0)
      throw Error(ErrorCode::InvalidInput, "iris ring needs an even point count");
    // Opposing pairs: (i, i + n/2) for the first half of the ring.
    const std::size_t half = ring.size() / 2;
    double acc = 0;
    for (std::size_t i = 0; i < half; ++i) {
      const auto& a = frame.points[ring[i]];
      const auto& b = frame.points[ring[i + half]];
      acc += (a.head<2>() - b.head<2>()).norm();
    }
    return acc / static_cast<double>(half);
  };
  return 0.5 * (one_eye(topo.left_iris) + one_eye(topo.right_iris));
}

double estimate_face_scale(const LandmarkFrame& frame,
                           const LandmarkTopology& topo, double alpha_cm) {
  frame.validate();
  const auto& left = frame.points[topo.left_idx];
  const auto& right = frame.points[topo.right_idx];
  const double d_w = (left.head<2>() - right.head<2>()).norm();
  const double d_iris = iris_pixel_diameter(frame, topo);
  if (!(d_iris > 1e-12))
    throw Error(ErrorCode::DegenerateIris, "iris pixel diameter is zero");
  return alpha_cm * d_w / d_iris;
}

double pog_error_cm(const Vector2d& g_pred, const Vector2d& g_true,
                    const ScreenSpec& screen) {
  screen.validate();
  if (!g_pred.allFinite() || !g_true.allFinite())
    throw Error(ErrorCode::InvalidInput, "non-finite gaze value");
  const double dx = (g_pred.x() - g_true.x()) * screen.width_cm;
  const double dy = (g_pred.y() - g_true.y()) * screen.height_cm;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace gazekit::geom
