#include "gazekit/headpose.hpp"

#include <algorithm>

namespace gazekit::pose {

namespace {

constexpr double kPairEps = 1e-9;  // px separation below which a pair is skipped

std::vector<Vector2d> observed_uv(const LandmarkFrame& frame) {
  std::vector<Vector2d> uv;
  uv.reserve(frame.points.size());
  for (const auto& p : frame.points) uv.emplace_back(p.x(), p.y());
  return uv;
}

Vector2d centroid(const std::vector<Vector2d>& pts) {
  Vector2d c = Vector2d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

}  // namespace

RadialStats radial_stats(const std::vector<Vector2d>& observed,
                         const std::vector<Vector2d>& projected) {
  if (observed.size() != projected.size() || observed.size() < 3)
    throw Error(ErrorCode::InvalidInput, "need >= 3 matched correspondences");
  RadialStats s;
  s.total = static_cast<int>(observed.size());
  const Vector2d c_proj = centroid(projected);
  const Vector2d c_obs = centroid(observed);
  double spread_obs = 0, spread_proj = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    spread_obs += (observed[i] - c_obs).norm();
    spread_proj += (projected[i] - c_proj).norm();
    const Vector2d diff = observed[i] - projected[i];
    const double len = diff.norm();
    if (len <= kPairEps) continue;
    const Vector2d v = diff / len;
    const Vector2d radial = projected[i] - c_proj;
    if (radial.norm() <= kPairEps) continue;
    s.vote_sum += (v.dot(radial) >= 0) ? 1.0 : -1.0;
    ++s.voting;
  }
  s.m_ratio = (spread_proj > kPairEps) ? spread_obs / spread_proj : 1.0;
  return s;
}

double radial_step(const std::vector<Vector2d>& observed,
                   const std::vector<Vector2d>& projected,
                   const SolverConfig& cfg) {
  cfg.validate();
  const RadialStats s = radial_stats(observed, projected);
  if (s.voting == 0) return 0.0;
  // Outward consensus means the face is nearer than estimated, so the depth
  // moves down: the vote mean enters with a negative sign.
  const double raw = -(cfg.beta / static_cast<double>(s.total)) * s.vote_sum;
  return std::clamp(raw, -cfg.delta_max, cfg.delta_max);
}

Vector3d nose_pinned_translation(const Vector2d& nose_uv,
                                 const Vector3d& rotated_nose,
                                 double nose_depth_cm,
                                 const CameraIntrinsics& K) {
  const double zc = nose_depth_cm;
  return {(nose_uv.x() - K.cx) * zc / K.fx - rotated_nose.x(),
          (nose_uv.y() - K.cy) * zc / K.fy - rotated_nose.y(),
          zc - rotated_nose.z()};
}

Vector3d init_translation(const LandmarkFrame& frame,
                          const FacePoints3D& metric_points, const Matrix3d& R,
                          const CameraIntrinsics& K, const SolverConfig& cfg) {
  cfg.validate();
  K.validate();
  frame.validate();
  const auto& nose_lm = frame.points[frame.topology.nose_idx];
  const Vector3d rotated_nose = R * metric_points.points[frame.topology.nose_idx];
  return nose_pinned_translation({nose_lm.x(), nose_lm.y()}, rotated_nose,
                                 cfg.z0, K);
}

double reprojection_rmse(const LandmarkFrame& frame,
                         const FacePoints3D& metric_points, const Matrix3d& R,
                         const Vector3d& t, const CameraIntrinsics& K) {
  const auto proj = geom::project(metric_points.points, R, t, K);
  double acc = 0;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    acc += (proj[i] - Vector2d(frame.points[i].x(), frame.points[i].y())).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(proj.size()));
}

SolveReport solve_translation(const LandmarkFrame& frame,
                              const FacePoints3D& metric_points,
                              const Matrix3d& R, const CameraIntrinsics& K,
                              const SolverConfig& cfg) {
  SolveReport report;
  report.pose.R = R;
  try {
    cfg.validate();
    if (metric_points.unit != geom::PointUnit::MetricCm)
      throw Error(ErrorCode::InvalidInput, "solver expects metric-cm points");
    if (metric_points.points.size() != frame.points.size())
      throw Error(ErrorCode::ShapeMismatch, "frame/points size mismatch");

    const auto obs = observed_uv(frame);
    const auto& nose_lm = frame.points[frame.topology.nose_idx];
    const Vector2d nose_uv(nose_lm.x(), nose_lm.y());
    const Vector3d rotated_nose = R * metric_points.points[frame.topology.nose_idx];

    double z_nose = cfg.z0;
    Vector3d t = nose_pinned_translation(nose_uv, rotated_nose, z_nose, K);
    report.pose.t = t;
    double rmse = reprojection_rmse(frame, metric_points, R, t, K);

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
      report.iterations = iter;
      const auto proj = geom::project(metric_points.points, R, t, K);
      const RadialStats s = radial_stats(obs, proj);
      if (s.voting == 0 || !(s.m_ratio > kPairEps)) {
        report.final_z_update = 0.0;
        report.converged = true;
        break;
      }
      // Depth via similar triangles on the radial spread (spread ~ 1/depth),
      // damped by the expand/contract consensus so split votes near the noise
      // floor shrink the step instead of oscillating.
      const double consensus =
          std::abs(s.vote_sum) / static_cast<double>(s.voting);
      double step = std::clamp(consensus * z_nose * (1.0 / s.m_ratio - 1.0),
                               -cfg.delta_max, cfg.delta_max);

      // Reject steps that worsen the reprojection; halve a few times first.
      double new_rmse = rmse;
      Vector3d new_t = t;
      double applied = 0.0;
      for (int backtrack = 0; backtrack < 5 && std::abs(step) > 0; ++backtrack) {
        const double z_try = z_nose + step;
        if (z_try > 1.0) {
          const Vector3d t_try =
              nose_pinned_translation(nose_uv, rotated_nose, z_try, K);
          const double r_try = reprojection_rmse(frame, metric_points, R, t_try, K);
          if (r_try <= rmse + 1e-12) {
            new_rmse = r_try;
            new_t = t_try;
            applied = step;
            break;
          }
        }
        step *= 0.5;
      }

      z_nose += applied;
      t = new_t;
      rmse = new_rmse;
      report.pose.t = t;
      report.final_z_update = applied;
      if (std::abs(applied) < cfg.z_stop) {
        report.converged = true;
        break;
      }
    }
    report.final_reprojection_rmse = rmse;
  } catch (const Error&) {
    report.converged = false;
  }
  return report;
}

FramePoseResult solve_from_frame(const LandmarkFrame& frame,
                                 const CameraIntrinsics& K,
                                 const SolverConfig& cfg) {
  FramePoseResult out;
  try {
    const auto reproj = geom::reproject(frame, K);
    auto normalized = geom::normalize_face(reproj, frame.topology);
    out.face_scale_cm = geom::estimate_face_scale(frame, frame.topology);
    out.metric_points.unit = geom::PointUnit::MetricCm;
    out.metric_points.points.reserve(normalized.points.size());
    for (const auto& p : normalized.points)
      out.metric_points.points.push_back(p * out.face_scale_cm);
    out.report =
        solve_translation(frame, out.metric_points, Matrix3d::Identity(), K, cfg);
  } catch (const Error& e) {
    out.report.converged = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace gazekit::pose
