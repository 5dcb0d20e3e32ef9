#include "gazekit/pipeline.hpp"

#include <algorithm>

namespace gazekit::pipe {

nn::Tensor<float> pose_vector(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  nn::Tensor<float> v({12});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.v[r * 3 + c] = static_cast<float>(R(r, c));
  for (int i = 0; i < 3; ++i) v.v[9 + i] = static_cast<float>(t[i]);
  return v;
}

PreparedDataset prepare(const data::DatasetManifest& manifest,
                        const PrepareOptions& opts) {
  PreparedDataset out;
  out.used_default_intrinsics = manifest.default_intrinsics();
  const auto K = manifest.effective_K();
  const auto loaded = data::iterate(manifest, &out.stats);
  out.samples.reserve(loaded.size());
  for (const auto& ls : loaded) {
    const auto& e = *ls.entry;
    PreparedSample s;
    s.user = e.user;
    s.ts = e.ts;
    s.grid = e.grid;
    const auto frame = manifest.frame_for(e);
    s.left_ear = prep::ear(prep::eye_ring_points(frame, true));
    s.right_ear = prep::ear(prep::eye_ring_points(frame, false));
    s.blink_suppressed = prep::blink_gate(s.left_ear, s.right_ear, opts.blink_threshold);

    const auto solved = pose::solve_from_frame(frame, K, opts.solver);
    s.pose = solved.report;
    s.pose_converged = solved.report.converged;
    s.pose12 = pose_vector(e.provider_R, solved.report.pose.t);
    s.g = data::normalize_gaze(e.gaze_px, manifest.screen, &s.label_clamped);

    s.patch = nn::Tensor<float>({static_cast<std::size_t>(ls.patch.height),
                                 static_cast<std::size_t>(ls.patch.width), 3});
    s.patch.v = ls.patch.rgb;
    out.samples.push_back(std::move(s));
  }
  return out;
}

prep::SampleWeightGrid weight_grid_of(const std::vector<const PreparedSample*>& samples) {
  std::vector<Vector2d> labels;
  labels.reserve(samples.size());
  for (const auto* s : samples) labels.push_back(s->g);
  return prep::build_weight_grid(labels);
}

gaze::TrainSample<float> to_train_sample(const PreparedSample& s,
                                         const prep::SampleWeightGrid& grid) {
  gaze::TrainSample<float> t;
  t.patch = s.patch;
  t.pose12 = s.pose12;
  t.g = s.g;
  t.w = prep::weight_for(grid, s.g);
  t.user = s.user;
  return t;
}

std::vector<const PreparedSample*> select(const PreparedDataset& ds,
                                          const std::vector<std::string>& users,
                                          bool drop_blinks) {
  std::vector<const PreparedSample*> out;
  for (const auto& s : ds.samples) {
    if (std::find(users.begin(), users.end(), s.user) == users.end()) continue;
    if (drop_blinks && s.blink_suppressed) continue;
    out.push_back(&s);
  }
  return out;
}

}  // namespace gazekit::pipe
