#include "gazekit/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace gazekit::sim {

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

SyntheticFaceSpec SyntheticFaceSpec::standard(std::uint64_t texture_seed) {
  SyntheticFaceSpec spec;
  spec.texture_seed = texture_seed;
  auto& p = spec.canonical_cm;
  p.resize(31);
  // 0 nose, 1/2 face edges (width exactly 14 cm). The edges sit in the eye
  // plane so the width/iris pixel ratio is depth-consistent.
  p[0] = {0.0, 0.0, 0.0};
  p[1] = {7.0, 0.0, 1.5};
  p[2] = {-7.0, 0.0, 1.5};
  // Eye rings p1..p6: p1/p4 horizontal corners, p2/p3 upper lid, p5/p6 lower.
  const Vector3d el(3.0, -2.0, 1.5), er(-3.0, -2.0, 1.5);
  auto ring = [](const Vector3d& c, double sx) {
    // sx mirrors the ring so p1 is the inner corner on both sides.
    return std::array<Vector3d, 6>{
        c + Vector3d(-1.5 * sx, 0.0, 0.0),   c + Vector3d(-0.6 * sx, -0.55, 0.0),
        c + Vector3d(0.6 * sx, -0.55, 0.0),  c + Vector3d(1.5 * sx, 0.0, 0.0),
        c + Vector3d(0.6 * sx, 0.55, 0.0),   c + Vector3d(-0.6 * sx, 0.55, 0.0)};
  };
  const auto lring = ring(el, 1.0), rring = ring(er, -1.0);
  for (int i = 0; i < 6; ++i) p[3 + i] = lring[i];
  for (int i = 0; i < 6; ++i) p[9 + i] = rring[i];
  // Iris rings: two opposing pairs, diameter 1.2 cm.
  const double ir = 0.6;
  p[15] = el + Vector3d(-ir, 0, 0);
  p[16] = el + Vector3d(0, -ir, 0);
  p[17] = el + Vector3d(ir, 0, 0);
  p[18] = el + Vector3d(0, ir, 0);
  p[19] = er + Vector3d(-ir, 0, 0);
  p[20] = er + Vector3d(0, -ir, 0);
  p[21] = er + Vector3d(ir, 0, 0);
  p[22] = er + Vector3d(0, ir, 0);
  // Brow / jaw / cheek filler.
  p[23] = {3.0, -3.5, 2.0};
  p[24] = {-3.0, -3.5, 2.0};
  p[25] = {5.0, 4.0, 2.5};
  p[26] = {-5.0, 4.0, 2.5};
  p[27] = {0.0, 5.5, 1.5};
  p[28] = {0.0, -5.0, 2.5};
  p[29] = {4.5, 1.5, 1.8};
  p[30] = {-4.5, 1.5, 1.8};

  auto& t = spec.topology;
  t.nose_idx = 0;
  t.left_idx = 1;
  t.right_idx = 2;
  t.left_eye_ring = {3, 4, 5, 6, 7, 8};
  t.right_eye_ring = {9, 10, 11, 12, 13, 14};
  t.left_iris = {15, 16, 17, 18};
  t.right_iris = {19, 20, 21, 22};
  // outer-left, inner-left, inner-right, outer-right
  t.eye_corner_idxs = {6, 3, 9, 12};
  return spec;
}

Matrix3d rotation_ypr(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(roll, Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vector3d::UnitX()) *
          Eigen::AngleAxisd(yaw, Vector3d::UnitY()))
      .toRotationMatrix();
}

void SyntheticScene::validate() const {
  if (t.z() < 30.0 || t.z() > 90.0)
    throw Error(ErrorCode::InvalidInput, "scene depth outside [30,90] cm");
  if (std::abs(gaze.x()) > 0.5 || std::abs(gaze.y()) > 0.5)
    throw Error(ErrorCode::InvalidInput, "gaze outside [-0.5,0.5]^2");
  camera.validate();
  screen.validate();
}

namespace {

struct EyeRender {
  Vector2d center_px;       // sclera center
  Vector2d axis_px;         // corner-to-corner direction, unit
  double half_width_px = 0;
  double half_height_px = 0;
  Vector2d iris_px;         // texture iris center
  double iris_radius_px = 0;
};

// Camera-frame tangent coordinates of the gaze ray toward the on-screen PoG.
// The ray leaves the eye midpoint toward the screen plane at z = 0.
Vector2d eye_tangents_for_gaze(const SyntheticScene& s, const Vector3d& eye_mid_cam) {
  const Vector3d pog_cam(s.gaze.x() * s.screen.width_cm + s.screen_center_offset_cm.x(),
                         s.gaze.y() * s.screen.height_cm + s.screen_center_offset_cm.y(),
                         0.0);
  const Vector3d d_cam = pog_cam - eye_mid_cam;  // d_cam.z < 0 toward the screen
  return {d_cam.x() / -d_cam.z(), d_cam.y() / -d_cam.z()};
}

float smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return static_cast<float>(t * t * (3 - 2 * t));
}

void blend(float* px, const float rgb[3], float alpha) {
  for (int c = 0; c < 3; ++c) px[c] = px[c] * (1 - alpha) + rgb[c] * alpha;
}

}  // namespace

RenderedScene render_scene(const SyntheticScene& scene) {
  scene.validate();
  const auto& face = scene.face;
  const auto& K = scene.camera;

  // Blink collapses the lid landmarks onto the corner axis.
  std::vector<Vector3d> mesh = face.canonical_cm;
  if (scene.blink) {
    for (const auto& ring : {face.topology.left_eye_ring, face.topology.right_eye_ring}) {
      const double corner_y = mesh[ring[0]].y();
      for (int i : {1, 2, 4, 5}) {
        const double sgn = (i >= 4) ? 1.0 : -1.0;
        mesh[ring[i]].y() = corner_y + 0.05 * sgn;
      }
    }
  }

  RenderedScene out;
  out.truth.R = scene.R;
  out.truth.t = scene.t;
  out.truth.gaze = scene.gaze;
  out.truth.blink = scene.blink;
  out.truth.sigma_px = scene.sigma_px;

  // Landmarks: perspective projection plus nose-relative depth channel.
  std::vector<Vector3d> cam(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) cam[i] = scene.R * mesh[i] + scene.t;
  const double z_nose = cam[face.topology.nose_idx].z();
  if (!(z_nose > 1.0))
    throw Error(ErrorCode::BehindCamera, "face behind camera");

  Rng noise_rng(scene.noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.frame.topology = face.topology;
  out.frame.points.resize(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (!(cam[i].z() > 0)) throw Error(ErrorCode::BehindCamera, "landmark behind camera");
    double u = K.fx * cam[i].x() / cam[i].z() + K.cx;
    double v = K.fy * cam[i].y() / cam[i].z() + K.cy;
    if (scene.sigma_px > 0) {
      u += scene.sigma_px * gauss(noise_rng);
      v += scene.sigma_px * gauss(noise_rng);
    }
    out.frame.points[i] = {u, v, cam[i].z() / z_nose};
  }

  // ---- procedural image ----
  Rng tex_rng(face.texture_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const float skin_r = static_cast<float>(0.72 + 0.08 * uni(tex_rng));
  const float skin_g = static_cast<float>(0.55 + 0.08 * uni(tex_rng));
  const float skin_b = static_cast<float>(0.44 + 0.08 * uni(tex_rng));
  const double grad_phase = uni(tex_rng) * 6.28318530717958647692;
  const float iris_tint = static_cast<float>(0.8 + 0.4 * uni(tex_rng));

  prep::Image img = prep::Image::filled(scene.image_height, scene.image_width,
                                        skin_r, skin_g, skin_b);
  // Gentle illumination gradient so reconstruction has low-frequency content.
  for (int y = 0; y < img.height; ++y) {
    const float shade = static_cast<float>(
        0.05 * std::sin(grad_phase + 3.0 * y / img.height));
    for (int x = 0; x < img.width; ++x) {
      const float sx = shade + static_cast<float>(0.03 * std::sin(5.0 * x / img.width));
      float* px = img.at(y, x);
      px[0] = std::clamp(px[0] + sx, 0.0f, 1.0f);
      px[1] = std::clamp(px[1] + sx, 0.0f, 1.0f);
      px[2] = std::clamp(px[2] + sx, 0.0f, 1.0f);
    }
  }

  // Eye placement from the *noise-free* projections so appearance stays clean.
  const Vector3d eye_mid_fcs = 0.5 * (face.canonical_cm[face.topology.left_eye_ring[0]] +
                                      face.canonical_cm[face.topology.right_eye_ring[0]]);
  const Vector3d eye_mid_cam = scene.R * eye_mid_fcs + scene.t;
  const Vector2d tangents = eye_tangents_for_gaze(scene, eye_mid_cam);
  // Per-user appearance map: the rendered iris offset is linear in the
  // tangent-space gaze state.
  const Vector2d eff(scene.gaze_gain.x() * tangents.x() + scene.gaze_bias.x(),
                     scene.gaze_gain.y() * tangents.y() + scene.gaze_bias.y());
  out.truth.eye_state = eff;
  const Vector3d iris_offset_fcs(face.eyeball_radius_cm * eff.x(),
                                 face.eyeball_radius_cm * eff.y(), -0.05);

  auto project_clean = [&](const Vector3d& fcs) {
    const Vector3d c = scene.R * fcs + scene.t;
    return Vector2d(K.fx * c.x() / c.z() + K.cx, K.fy * c.y() / c.z() + K.cy);
  };

  std::array<EyeRender, 2> eyes;
  for (int e = 0; e < 2; ++e) {
    const auto& ring = e == 0 ? face.topology.left_eye_ring : face.topology.right_eye_ring;
    const Vector3d inner = face.canonical_cm[ring[0]];
    const Vector3d outer = face.canonical_cm[ring[3]];
    const Vector3d center = 0.5 * (inner + outer);
    EyeRender er;
    er.center_px = project_clean(center);
    const Vector2d corner_a = project_clean(inner);
    const Vector2d corner_b = project_clean(outer);
    er.axis_px = (corner_b - corner_a).normalized();
    er.half_width_px = 0.5 * (corner_b - corner_a).norm();
    er.half_height_px = er.half_width_px * 0.45;
    er.iris_px = project_clean(center + iris_offset_fcs);
    const Vector3d center_cam = scene.R * center + scene.t;
    er.iris_radius_px = K.fx * (0.5 * face.iris_diameter_cm) / center_cam.z();
    eyes[e] = er;
  }

  const float sclera[3] = {0.94f, 0.94f, 0.92f};
  const float iris_col[3] = {0.33f * iris_tint, 0.22f * iris_tint, 0.13f * iris_tint};
  const float pupil[3] = {0.04f, 0.03f, 0.03f};
  const float lash[3] = {0.25f, 0.17f, 0.12f};
  const float brow[3] = {0.30f, 0.20f, 0.13f};

  for (const auto& er : eyes) {
    const Vector2d n(-er.axis_px.y(), er.axis_px.x());
    const int x0 = std::max(0, static_cast<int>(er.center_px.x() - er.half_width_px - 4));
    const int x1 = std::min(img.width - 1, static_cast<int>(er.center_px.x() + er.half_width_px + 4));
    const int y0 = std::max(0, static_cast<int>(er.center_px.y() - er.half_width_px - 6));
    const int y1 = std::min(img.height - 1, static_cast<int>(er.center_px.y() + er.half_width_px + 6));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vector2d p(x, y);
        const Vector2d d = p - er.center_px;
        const double s = d.dot(er.axis_px) / er.half_width_px;
        const double t = d.dot(n) / er.half_height_px;
        const double rr = s * s + t * t;
        float* px = img.at(y, x);
        // Brow band above the eye.
        const double tb = d.dot(n) / er.half_width_px;
        if (std::abs(s) < 1.1 && tb > -0.85 && tb < -0.55)
          blend(px, brow, 0.8f * smoothstep(1.1, 0.9, std::abs(s)));
        if (scene.blink) {
          if (rr <= 1.0 && std::abs(t) < 0.35)
            blend(px, lash, smoothstep(0.35, 0.15, std::abs(t)));
          continue;
        }
        if (rr <= 1.0) {
          blend(px, sclera, smoothstep(1.0, 0.85, rr));
          const double ir = (p - er.iris_px).norm();
          if (ir <= er.iris_radius_px + 1.0) {
            blend(px, iris_col, smoothstep(er.iris_radius_px + 0.7,
                                           er.iris_radius_px - 0.7, ir));
            blend(px, pupil, smoothstep(er.iris_radius_px * 0.45 + 0.5,
                                        er.iris_radius_px * 0.45 - 0.5, ir));
          }
        }
      }
    }
  }

  out.image = std::move(img);
  return out;
}

SyntheticUser SyntheticUser::from_id(const std::string& id, std::uint64_t base_seed) {
  std::uint64_t h = base_seed;
  for (char c : id) h = hash_combine(h, static_cast<std::uint64_t>(c));
  Rng rng(h);
  std::uniform_real_distribution<double> bias(-0.07, 0.07);
  std::uniform_real_distribution<double> gain(0.85, 1.15);
  SyntheticUser u;
  u.user_id = id;
  u.gaze_bias = {bias(rng), bias(rng)};
  u.gaze_gain = {gain(rng), gain(rng)};
  u.appearance_seed = rng();
  return u;
}

std::vector<UserSample> make_user_dataset(const SyntheticUser& user, int n,
                                          const UserDatasetConfig& cfg) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "dataset size must be >= 1");
  std::vector<UserSample> samples;
  samples.reserve(n);
  const double g = cfg.grid_extent;
  const std::array<Vector2d, 9> grid = {
      Vector2d(-g, -g), Vector2d(0, -g), Vector2d(g, -g),
      Vector2d(-g, 0),  Vector2d(0, 0),  Vector2d(g, 0),
      Vector2d(-g, g),  Vector2d(0, g),  Vector2d(g, g)};

  for (int i = 0; i < n; ++i) {
    Rng rng(hash_combine(cfg.scene_seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    SyntheticScene s;
    s.face = SyntheticFaceSpec::standard(user.appearance_seed);
    s.camera = cfg.camera;
    s.image_width = cfg.image_width;
    s.image_height = cfg.image_height;
    s.screen = cfg.screen;
    const double yaw = (uni(rng) * 2 - 1) * cfg.yaw_pitch_max_rad;
    const double pitch = (uni(rng) * 2 - 1) * cfg.yaw_pitch_max_rad;
    const double roll = (uni(rng) * 2 - 1) * cfg.roll_max_rad;
    s.R = rotation_ypr(yaw, pitch, roll);
    s.t = {(uni(rng) * 2 - 1) * cfg.xy_range_cm, (uni(rng) * 2 - 1) * cfg.xy_range_cm,
           cfg.depth_min_cm + uni(rng) * (cfg.depth_max_cm - cfg.depth_min_cm)};
    const bool is_grid = i < 9;
    if (is_grid) {
      s.gaze = grid[i];
    } else {
      s.gaze = {(uni(rng) * 2 - 1) * 0.45, (uni(rng) * 2 - 1) * 0.45};
    }
    s.gaze_gain = user.gaze_gain;
    s.gaze_bias = user.gaze_bias;
    s.sigma_px = cfg.sigma_px;
    s.noise_seed = hash_combine(cfg.scene_seed, 0x5eedULL + i);
    s.blink = !is_grid && uni(rng) < cfg.blink_rate;

    UserSample us;
    us.scene = s;
    us.rendered = render_scene(s);
    us.grid = is_grid;
    us.timestamp = i;
    samples.push_back(std::move(us));
  }
  return samples;
}

}  // namespace gazekit::sim
