#include "doctest.h"

#include "gazekit/headpose.hpp"
#include "gazekit/simulator.hpp"
#include "oracles.hpp"

using namespace gazekit;
using geom::Vector2d;
using geom::Vector3d;

namespace {

sim::SyntheticScene scene_at(double z, std::uint64_t seed, double sigma = 0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  sim::SyntheticScene s;
  s.face = sim::SyntheticFaceSpec::standard();
  s.R = sim::rotation_ypr(0.14 * u(rng), 0.14 * u(rng), 0.2 * u(rng));
  s.t = {3.5 * u(rng), 3.5 * u(rng), z};
  s.sigma_px = sigma;
  s.noise_seed = seed * 31 + 1;
  return s;
}

// Canonical-points route: metric FCS points plus the true rotation.
geom::FacePoints3D metric_fcs(const sim::SyntheticFaceSpec& face) {
  geom::FacePoints3D pts;
  pts.unit = geom::PointUnit::MetricCm;
  pts.points = face.canonical_cm;
  return pts;
}

}  // namespace

TEST_CASE("init_translation pins the projected nose exactly") {
  const auto scene = scene_at(62, 5);
  const auto rs = sim::render_scene(scene);
  const auto pts = metric_fcs(scene.face);
  pose::SolverConfig cfg;
  const auto t0 = pose::init_translation(rs.frame, pts, scene.R, scene.camera, cfg);
  const auto uv = geom::project_point(pts.points[rs.frame.topology.nose_idx], scene.R,
                                      t0, scene.camera);
  const auto& nose = rs.frame.points[rs.frame.topology.nose_idx];
  CHECK(std::abs(uv.x() - nose.x()) < 1e-6);
  CHECK(std::abs(uv.y() - nose.y()) < 1e-6);
  CHECK(t0.z() == doctest::Approx(cfg.z0).epsilon(1e-9));  // nose at origin
}

TEST_CASE("init_translation XY error small when depth guess is right") {
  auto scene = scene_at(60, 6);
  scene.t.z() = 60;  // matches z0
  const auto rs = sim::render_scene(scene);
  pose::SolverConfig cfg;
  const auto t0 =
      pose::init_translation(rs.frame, metric_fcs(scene.face), scene.R, scene.camera, cfg);
  CHECK(std::abs(t0.x() - scene.t.x()) < 0.1);
  CHECK(std::abs(t0.y() - scene.t.y()) < 0.1);
}

TEST_CASE("radial_step: converged, dilation vote, and clip bound") {
  pose::SolverConfig cfg;
  std::vector<Vector2d> proj;
  Rng rng(9);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int i = 0; i < 20; ++i) proj.emplace_back(320 + u(rng), 240 + u(rng));

  SUBCASE("observed equals projected") {
    CHECK(pose::radial_step(proj, proj, cfg) == 0.0);
  }

  SUBCASE("uniform outward dilation votes to reduce depth") {
    Vector2d c = Vector2d::Zero();
    for (const auto& p : proj) c += p;
    c /= proj.size();
    std::vector<Vector2d> obs;
    for (const auto& p : proj) obs.push_back(c + 1.15 * (p - c));
    const double step = pose::radial_step(obs, proj, cfg);
    // Every non-centroid point votes outward: -beta * (voting fraction).
    CHECK(step == doctest::Approx(-cfg.beta).epsilon(1e-9));
  }

  SUBCASE("magnitude never exceeds the clip bound") {
    Rng arng(77);
    std::uniform_real_distribution<double> a(-5000, 5000);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vector2d> obs;
      for (std::size_t i = 0; i < proj.size(); ++i) obs.emplace_back(a(arng), a(arng));
      CHECK(std::abs(pose::radial_step(obs, proj, cfg)) <= cfg.delta_max + 1e-12);
    }
  }
}

TEST_CASE("solve converges fast at the initial depth") {
  auto scene = scene_at(60, 12);
  scene.t.z() = 60;
  const auto rs = sim::render_scene(scene);
  const auto res =
      pose::solve_translation(rs.frame, metric_fcs(scene.face), scene.R, scene.camera, {});
  CHECK(res.converged);
  CHECK(res.iterations <= 2);
  CHECK(std::abs(res.pose.t.z() - 60) < 0.5);
}

TEST_CASE("solve recovers depths near the band edges within a centimeter") {
  // Off-grid true depths so the 0.05 cm oracle has a representative floor.
  for (double z : {45.37, 74.81}) {
    const auto scene = scene_at(z, 21 + static_cast<int>(z));
    const auto rs = sim::render_scene(scene);
    const auto pts = metric_fcs(scene.face);
    const auto res = pose::solve_translation(rs.frame, pts, scene.R, scene.camera, {});
    CHECK(res.converged);
    CHECK(res.iterations <= 10);
    CHECK(std::abs(res.pose.t.z() - z) <= 1.0);
    CHECK(std::abs(res.pose.t.x() - scene.t.x()) <= 0.5);
    CHECK(std::abs(res.pose.t.y() - scene.t.y()) <= 0.5);

    const auto oracle =
        oracles::depth_grid_search(rs.frame, pts, scene.R, scene.camera);
    CHECK(std::abs(oracle.best_z - z) <= 0.05 + 1e-9);
    CHECK(res.final_reprojection_rmse <= oracle.best_rmse * 1.10 + 0.005);
  }
}

TEST_CASE("landmark-only pipeline recovers the metric translation") {
  for (double z : {48.0, 60.0, 72.0}) {
    const auto scene = scene_at(z, 101 + static_cast<int>(z));
    const auto rs = sim::render_scene(scene);
    const auto res = pose::solve_from_frame(rs.frame, scene.camera, {});
    CHECK(res.report.converged);
    CHECK(std::abs(res.report.pose.t.z() - z) <= 1.0);
    CHECK(std::abs(res.report.pose.t.x() - scene.t.x()) <= 0.5);
    CHECK(std::abs(res.report.pose.t.y() - scene.t.y()) <= 0.5);
  }
}

TEST_CASE("z-update sign matches the true depth offset") {
  // Property: one accepted update from depth z moves toward z_true for
  // offsets in [1, 15] cm, random poses.
  Rng rng(33);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> off(1.0, 15.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const double z_true = 50 + 15 * u(rng);
    auto scene = scene_at(z_true, 400 + trial);
    scene.t.z() = z_true;
    const auto rs = sim::render_scene(scene);
    const auto pts = metric_fcs(scene.face);
    const double offset = off(rng) * (u(rng) > 0 ? 1 : -1);
    const double z_start = z_true + offset;
    if (z_start < 32 || z_start > 88) continue;
    pose::SolverConfig cfg;
    cfg.z0 = z_start;
    cfg.max_iters = 1;
    cfg.z_stop = 1e-9;
    const auto res =
        pose::solve_translation(rs.frame, pts, scene.R, scene.camera, cfg);
    if (res.final_z_update == 0.0) continue;
    CHECK(std::signbit(res.final_z_update) == std::signbit(z_true - z_start));
    ++checked;
  }
  CHECK(checked > 25);
}

TEST_CASE("rmse never ends above its starting value on converged runs") {
  for (int trial = 0; trial < 10; ++trial) {
    const double z = 46 + 3.2 * trial;
    const auto scene = scene_at(z, 900 + trial);
    const auto rs = sim::render_scene(scene);
    const auto pts = metric_fcs(scene.face);
    pose::SolverConfig cfg;
    const Vector3d t0 =
        pose::init_translation(rs.frame, pts, scene.R, scene.camera, cfg);
    const double rmse0 =
        pose::reprojection_rmse(rs.frame, pts, scene.R, t0, scene.camera);
    const auto res = pose::solve_translation(rs.frame, pts, scene.R, scene.camera, cfg);
    if (res.converged) CHECK(res.final_reprojection_rmse <= rmse0 + 1e-9);
  }
}

TEST_CASE("noisy landmarks: median depth error stays bounded") {
  std::vector<double> errs;
  for (int trial = 0; trial < 30; ++trial) {
    const double z = 45 + trial;
    const auto scene = scene_at(z, 1500 + trial, 1.0);
    const auto rs = sim::render_scene(scene);
    const auto res = pose::solve_from_frame(rs.frame, scene.camera, {});
    errs.push_back(std::abs(res.report.pose.t.z() - z));
  }
  std::sort(errs.begin(), errs.end());
  CHECK(errs[errs.size() / 2] <= 3.0);
}

TEST_CASE("degenerate face returns unconverged instead of throwing") {
  auto scene = scene_at(60, 77);
  auto rs = sim::render_scene(scene);
  // Coincident face-edge landmarks: normalization cannot set the width.
  rs.frame.points[rs.frame.topology.left_idx] =
      rs.frame.points[rs.frame.topology.right_idx];
  const auto res = pose::solve_from_frame(rs.frame, scene.camera, {});
  CHECK_FALSE(res.report.converged);
  CHECK_FALSE(res.error.empty());
}

TEST_CASE("perfectly aligned start converges immediately") {
  const auto scene = scene_at(57, 78);
  const auto rs = sim::render_scene(scene);
  const auto pts = metric_fcs(scene.face);
  pose::SolverConfig cfg;
  cfg.z0 = scene.t.z();  // start at the true nose depth
  const auto res = pose::solve_translation(rs.frame, pts, scene.R, scene.camera, cfg);
  CHECK(res.converged);
  CHECK(res.iterations <= 2);
  CHECK(res.final_reprojection_rmse < 1e-6);
}

TEST_CASE("nose stays pinned after the similar-triangles correction") {
  const auto scene = scene_at(52, 88);
  const auto rs = sim::render_scene(scene);
  const auto pts = metric_fcs(scene.face);
  const auto res = pose::solve_translation(rs.frame, pts, scene.R, scene.camera, {});
  const auto uv = geom::project_point(pts.points[rs.frame.topology.nose_idx], scene.R,
                                      res.pose.t, scene.camera);
  const auto& nose = rs.frame.points[rs.frame.topology.nose_idx];
  CHECK(std::abs(uv.x() - nose.x()) < 1e-6);
  CHECK(std::abs(uv.y() - nose.y()) < 1e-6);
}
