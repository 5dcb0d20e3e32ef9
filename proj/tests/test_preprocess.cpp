#include "doctest.h"

#include <map>
#include <set>

#include "gazekit/preprocess.hpp"
#include "gazekit/simulator.hpp"

using namespace gazekit;
using geom::Vector2d;

TEST_CASE("ear: closed lids, half-span gaps, degenerate axis") {
  std::array<Vector2d, 6> ring = {Vector2d(0, 0), Vector2d(2, -1), Vector2d(4, -1),
                                  Vector2d(6, 0),  Vector2d(4, 1),  Vector2d(2, 1)};
  SUBCASE("closed: p2==p6 and p3==p5") {
    ring[1] = ring[5];
    ring[2] = ring[4];
    CHECK(prep::ear(ring) == doctest::Approx(0.0));
  }
  SUBCASE("vertical gaps equal half the horizontal span") {
    // span 6, each gap 3.
    ring = {Vector2d(0, 0), Vector2d(2, -1.5), Vector2d(4, -1.5),
            Vector2d(6, 0), Vector2d(4, 1.5),  Vector2d(2, 1.5)};
    CHECK(prep::ear(ring) == doctest::Approx(0.5));
  }
  SUBCASE("degenerate horizontal axis throws") {
    ring[3] = ring[0];
    CHECK_THROWS_AS(prep::ear(ring), Error);
  }
}

TEST_CASE("ear invariant under similarity transforms") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::array<Vector2d, 6> ring = {Vector2d(0, 0), Vector2d(2, -1), Vector2d(4, -1.2),
                                  Vector2d(6, 0.3), Vector2d(4, 1), Vector2d(2, 0.8)};
  const double base = prep::ear(ring);
  for (int trial = 0; trial < 50; ++trial) {
    const double angle = 3.14159 * u(rng);
    const double scale = 0.2 + 3.0 * std::abs(u(rng));
    const Vector2d shift(40 * u(rng), 40 * u(rng));
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    auto moved = ring;
    for (auto& p : moved) p = scale * (rot * p) + shift;
    CHECK(prep::ear(moved) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("blink gate thresholds") {
  CHECK(prep::blink_gate(0.0, 0.0, 0.2));
  CHECK_FALSE(prep::blink_gate(0.35, 0.33, 0.2));
  // mean exactly at threshold passes (strict less-than)
  CHECK_FALSE(prep::blink_gate(0.19, 0.21, 0.2));
  // symmetric in arguments
  CHECK(prep::blink_gate(0.05, 0.25, 0.2) == prep::blink_gate(0.25, 0.05, 0.2));
}

TEST_CASE("homography: 4-point DLT reproduces correspondences exactly") {
  const std::array<Vector2d, 4> src = {Vector2d(12, 30), Vector2d(200, 40),
                                       Vector2d(210, 150), Vector2d(8, 140)};
  const std::array<Vector2d, 4> dst = {Vector2d(0, 0), Vector2d(511, 0),
                                       Vector2d(511, 127), Vector2d(0, 127)};
  const auto H = prep::homography_4pt(src, dst);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d q = H * Eigen::Vector3d(src[i].x(), src[i].y(), 1);
    CHECK(std::abs(q.x() / q.z() - dst[i].x()) < 1e-6);
    CHECK(std::abs(q.y() / q.z() - dst[i].y()) < 1e-6);
  }
}

TEST_CASE("homography degenerate (collinear) quad throws") {
  const std::array<Vector2d, 4> src = {Vector2d(0, 0), Vector2d(1, 1), Vector2d(2, 2),
                                       Vector2d(3, 3)};
  const std::array<Vector2d, 4> dst = {Vector2d(0, 0), Vector2d(511, 0),
                                       Vector2d(511, 127), Vector2d(0, 127)};
  CHECK_THROWS_AS(prep::homography_4pt(src, dst), Error);
}

TEST_CASE("axis-aligned eyes give a pure scale+translate patch mapping") {
  sim::SyntheticScene scene;  // identity rotation, centered
  scene.face = sim::SyntheticFaceSpec::standard();
  const auto rs = sim::render_scene(scene);
  const auto& corners = rs.frame.topology.eye_corner_idxs;
  const Vector2d ol = rs.frame.points[corners[0]].head<2>();
  const Vector2d orr = rs.frame.points[corners[3]].head<2>();
  CHECK(std::abs(ol.y() - orr.y()) < 1e-9);  // frontal: corners level
  prep::PatchSpec spec;
  const double d = (orr - ol).norm();
  const Vector2d up(0, -spec.height_factor * d);
  const std::array<Vector2d, 4> src = {ol + up, orr + up, orr - up, ol - up};
  const std::array<Vector2d, 4> dst = {
      Vector2d(0, 0), Vector2d(spec.width - 1, 0),
      Vector2d(spec.width - 1, spec.height - 1), Vector2d(0, spec.height - 1)};
  const auto H = prep::homography_4pt(src, dst);
  // Off-diagonal / projective terms vanish for an axis-aligned rectangle.
  CHECK(std::abs(H(0, 1)) < 1e-6);
  CHECK(std::abs(H(1, 0)) < 1e-6);
  CHECK(std::abs(H(2, 0)) < 1e-9);
  CHECK(std::abs(H(2, 1)) < 1e-9);
}

TEST_CASE("patch content is stable under in-plane roll") {
  sim::SyntheticScene a;
  a.face = sim::SyntheticFaceSpec::standard();
  a.gaze = {0.2, -0.1};
  auto b = a;
  b.R = sim::rotation_ypr(0, 0, 30.0 * 3.14159265 / 180.0);
  prep::PatchSpec spec;
  spec.height = 32;
  spec.width = 128;
  const auto ra = sim::render_scene(a);
  const auto rb = sim::render_scene(b);
  const auto pa = prep::eye_patch_homography(ra.image, ra.frame, spec);
  const auto pb = prep::eye_patch_homography(rb.image, rb.frame, spec);
  double mad = 0;
  for (std::size_t i = 0; i < pa.rgb.size(); ++i)
    mad += std::abs(static_cast<double>(pa.rgb[i]) - pb.rgb[i]);
  mad /= pa.rgb.size();
  CHECK(mad < 0.02);
}

TEST_CASE("out-of-frame samples come back black") {
  prep::Image img = prep::Image::filled(40, 40, 1.0f, 1.0f, 1.0f);
  geom::LandmarkFrame frame;
  frame.topology = sim::SyntheticFaceSpec::standard().topology;
  frame.points.assign(31, geom::Vector3d(20, 20, 1));
  // Corners partly outside the image.
  frame.points[frame.topology.eye_corner_idxs[0]] = {-30, 20, 1};
  frame.points[frame.topology.eye_corner_idxs[3]] = {30, 20, 1};
  // Spread the rest to satisfy distinctness requirements.
  for (std::size_t i = 0; i < frame.points.size(); ++i)
    frame.points[i] += geom::Vector3d(0.01 * i, 0.02 * i, 0);
  prep::PatchSpec spec;
  spec.height = 8;
  spec.width = 32;
  const auto patch = prep::eye_patch_homography(img, frame, spec);
  // Left half of the strip maps outside the raster; mid-right stays inside.
  CHECK(patch.rgb[0] == 0.0f);
  const std::size_t mid_right =
      ((spec.height / 2) * spec.width + (3 * spec.width) / 4) * 3;
  CHECK(patch.rgb[mid_right] != 0.0f);
}

TEST_CASE("weight grid: uniform, inverse counts, binning") {
  SUBCASE("one label per cell gives unit weights") {
    std::vector<Vector2d> labels;
    for (int iy = 0; iy < 30; ++iy)
      for (int ix = 0; ix < 30; ++ix)
        labels.emplace_back(-0.5 + (ix + 0.5) / 30.0, -0.5 + (iy + 0.5) / 30.0);
    const auto grid = prep::build_weight_grid(labels);
    for (double w : grid.cells) CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("counts 1 and 3 give a 3:1 weight ratio") {
    std::vector<Vector2d> labels;
    labels.emplace_back(-0.49, -0.49);
    for (int i = 0; i < 3; ++i) labels.emplace_back(0.49, 0.49);
    const auto grid = prep::build_weight_grid(labels);
    const double w_lo = prep::weight_for(grid, {-0.49, -0.49});
    const double w_hi = prep::weight_for(grid, {0.49, 0.49});
    CHECK(w_lo / w_hi == doctest::Approx(3.0).epsilon(1e-9));
    // normalized to mean 1 over the two non-empty cells
    CHECK((w_lo + w_hi) / 2 == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("binning convention") {
    CHECK(prep::grid_index(-0.5) == 0);
    CHECK(prep::grid_index(0.5) == 29);  // closed last bin
    CHECK(prep::grid_index(0.0) == 15);  // half-open: 0 falls in cell 15
    bool clamped = false;
    CHECK(prep::grid_index(0.51, &clamped) == 29);
    CHECK(clamped);
  }

  SUBCASE("empty label list is invalid") {
    CHECK_THROWS_AS(prep::build_weight_grid({}), Error);
  }
}

TEST_CASE("weight lookup matches a direct recount oracle") {
  Rng rng(19);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vector2d> labels;
  for (int i = 0; i < 20000; ++i) labels.emplace_back(u(rng), u(rng));
  const auto grid = prep::build_weight_grid(labels);

  // Oracle: recount frequencies directly, renormalize the same way.
  std::map<std::pair<int, int>, int> counts;
  for (const auto& g : labels) counts[{prep::grid_index(g.x()), prep::grid_index(g.y())}]++;
  double sum = 0;
  for (const auto& [cell, n] : counts) sum += 1.0 / n;
  const double mean = sum / counts.size();

  for (int i = 0; i < 50; ++i) {
    const Vector2d g(u(rng), u(rng));
    const auto it = counts.find({prep::grid_index(g.x()), prep::grid_index(g.y())});
    if (it == counts.end()) continue;
    const double expect = (1.0 / it->second) / mean;
    CHECK(prep::weight_for(grid, g) == doctest::Approx(expect).epsilon(1e-9));
  }

  // Mass property: mean weight over the label sample is close to one.
  double mass = 0;
  for (const auto& g : labels) mass += prep::weight_for(grid, g);
  CHECK(mass / labels.size() == doctest::Approx(1.0).epsilon(0.05));
}
