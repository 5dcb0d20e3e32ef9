#include "gazekit/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace gazekit::data {

namespace fs = std::filesystem;
using nlohmann::json;

Vector2d normalize_gaze(const Vector2d& px, const ScreenSpec& screen, bool* clamped) {
  screen.validate();
  Vector2d g(px.x() / screen.width_px - 0.5, px.y() / screen.height_px - 0.5);
  for (int i = 0; i < 2; ++i) {
    if (g[i] < -0.5 || g[i] > 0.5) {
      if (clamped) *clamped = true;
      g[i] = std::clamp(g[i], -0.5, 0.5);
    }
  }
  return g;
}

Vector2d denormalize_gaze(const Vector2d& g, const ScreenSpec& screen) {
  screen.validate();
  return {(g.x() + 0.5) * screen.width_px, (g.y() + 0.5) * screen.height_px};
}

namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "manifest schema at " + pointer + ": " + what);
}

template <class V>
V field(const json& j, const char* key, const std::string& pointer) {
  if (!j.contains(key)) schema_error(pointer + "/" + key, "missing");
  try {
    return j.at(key).get<V>();
  } catch (const json::exception& e) {
    schema_error(pointer + "/" + key, e.what());
  }
}

geom::LandmarkTopology parse_topology(const json& j, const std::string& ptr) {
  geom::LandmarkTopology t;
  t.nose_idx = field<int>(j, "nose", ptr);
  t.left_idx = field<int>(j, "left", ptr);
  t.right_idx = field<int>(j, "right", ptr);
  t.left_iris = field<std::vector<int>>(j, "left_iris", ptr);
  t.right_iris = field<std::vector<int>>(j, "right_iris", ptr);
  const auto ler = field<std::vector<int>>(j, "left_eye_ring", ptr);
  const auto rer = field<std::vector<int>>(j, "right_eye_ring", ptr);
  const auto ec = field<std::vector<int>>(j, "eye_corners", ptr);
  if (ler.size() != 6 || rer.size() != 6) schema_error(ptr, "eye rings need 6 indices");
  if (ec.size() != 4) schema_error(ptr, "eye_corners needs 4 indices");
  std::copy(ler.begin(), ler.end(), t.left_eye_ring.begin());
  std::copy(rer.begin(), rer.end(), t.right_eye_ring.begin());
  std::copy(ec.begin(), ec.end(), t.eye_corner_idxs.begin());
  return t;
}

json topology_json(const geom::LandmarkTopology& t) {
  return json{{"nose", t.nose_idx},
              {"left", t.left_idx},
              {"right", t.right_idx},
              {"left_iris", t.left_iris},
              {"right_iris", t.right_iris},
              {"left_eye_ring", std::vector<int>(t.left_eye_ring.begin(), t.left_eye_ring.end())},
              {"right_eye_ring", std::vector<int>(t.right_eye_ring.begin(), t.right_eye_ring.end())},
              {"eye_corners", std::vector<int>(t.eye_corner_idxs.begin(), t.eye_corner_idxs.end())}};
}

SampleEntry parse_sample(const json& j, const std::string& ptr) {
  SampleEntry s;
  s.user = field<std::string>(j, "user", ptr);
  if (s.user.empty()) schema_error(ptr + "/user", "empty user id");
  s.ts = field<std::int64_t>(j, "ts", ptr);
  const auto lm = field<std::vector<std::vector<double>>>(j, "landmarks", ptr);
  for (const auto& row : lm) {
    if (row.size() != 3) schema_error(ptr + "/landmarks", "rows must be [u,v,z]");
    s.landmarks.emplace_back(row[0], row[1], row[2]);
  }
  const auto rot = field<std::vector<double>>(j, "rotation", ptr);
  if (rot.size() != 9) schema_error(ptr + "/rotation", "needs 9 values");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) s.provider_R(r, c) = rot[r * 3 + c];
  const auto gp = field<std::vector<double>>(j, "gaze_px", ptr);
  if (gp.size() != 2) schema_error(ptr + "/gaze_px", "needs 2 values");
  s.gaze_px = {gp[0], gp[1]};
  s.grid = j.value("grid", false);
  s.patch_key = field<std::string>(j, "patch", ptr);
  return s;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open manifest: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("manifest is not valid JSON: ") + e.what());
  }

  DatasetManifest m;
  m.dir = fs::path(path).parent_path().string();
  m.version = field<int>(j, "version", "");
  if (m.version != 1)
    throw Error(ErrorCode::SchemaViolation,
                "unsupported manifest version " + std::to_string(m.version));
  if (!j.contains("topology")) schema_error("/topology", "missing");
  m.topology = parse_topology(j.at("topology"), "/topology");

  if (!j.contains("screen")) schema_error("/screen", "missing");
  const auto& sj = j.at("screen");
  m.screen.width_px = field<double>(sj, "width_px", "/screen");
  m.screen.height_px = field<double>(sj, "height_px", "/screen");
  m.screen.width_cm = field<double>(sj, "width_cm", "/screen");
  m.screen.height_cm = field<double>(sj, "height_cm", "/screen");
  m.screen.validate();

  const auto imsz = field<std::vector<double>>(j, "image_size", "");
  if (imsz.size() != 2) schema_error("/image_size", "needs [width,height]");
  m.image_width = imsz[0];
  m.image_height = imsz[1];

  if (j.contains("intrinsics") && !j.at("intrinsics").is_null()) {
    const auto& kj = j.at("intrinsics");
    geom::CameraIntrinsics K;
    K.fx = field<double>(kj, "fx", "/intrinsics");
    K.fy = field<double>(kj, "fy", "/intrinsics");
    K.cx = field<double>(kj, "cx", "/intrinsics");
    K.cy = field<double>(kj, "cy", "/intrinsics");
    K.validate();
    m.intrinsics = K;
  }

  if (j.contains("splits")) {
    for (const auto& [name, users] : j.at("splits").items())
      m.splits[name] = users.get<std::vector<std::string>>();
  }

  m.patch_store = field<std::string>(j, "patch_store", "");
  const auto pshape = field<std::vector<std::size_t>>(j, "patch_shape", "");
  if (pshape.size() != 2) schema_error("/patch_shape", "needs [h,w]");
  m.patch_h = pshape[0];
  m.patch_w = pshape[1];

  // Integrity: every referenced file must exist and hash-match.
  if (j.contains("files")) {
    for (const auto& [rel, hash] : j.at("files").items()) {
      const auto full = (fs::path(m.dir) / rel).string();
      if (!fs::exists(full))
        throw Error(ErrorCode::IntegrityError, "referenced file missing: " + rel);
      const auto actual = io::sha256_file_hex(full);
      if (actual != hash.get<std::string>())
        throw Error(ErrorCode::IntegrityError, "hash mismatch for " + rel);
    }
  }

  if (!j.contains("samples") || !j.at("samples").is_array())
    schema_error("/samples", "missing array");
  std::size_t idx = 0;
  for (const auto& sj2 : j.at("samples")) {
    const std::string ptr = "/samples/" + std::to_string(idx++);
    try {
      m.samples.push_back(parse_sample(sj2, ptr));
    } catch (const Error& e) {
      m.load_errors.push_back(e.what());
    }
  }
  std::stable_sort(m.samples.begin(), m.samples.end(),
                   [](const SampleEntry& a, const SampleEntry& b) {
                     return a.user != b.user ? a.user < b.user : a.ts < b.ts;
                   });
  return m;
}

std::vector<LoadedSample> iterate(const DatasetManifest& manifest, IterationStats* stats) {
  const auto store_path = (fs::path(manifest.dir) / manifest.patch_store).string();
  const auto store = io::Container::load(store_path);
  std::vector<LoadedSample> out;
  IterationStats local;
  for (const auto& s : manifest.samples) {
    try {
      geom::LandmarkFrame frame = manifest.frame_for(s);
      frame.validate();
      const auto& e = store.get(s.patch_key);
      if (e.shape != std::vector<std::size_t>{manifest.patch_h, manifest.patch_w, 3})
        throw Error(ErrorCode::ShapeMismatch, "patch shape mismatch for " + s.patch_key);
      LoadedSample ls;
      ls.entry = &s;
      ls.patch.height = static_cast<int>(manifest.patch_h);
      ls.patch.width = static_cast<int>(manifest.patch_w);
      ls.patch.rgb = e.f32;
      ls.patch.source_frame_id = s.user + "/" + std::to_string(s.ts);
      out.push_back(std::move(ls));
      ++local.loaded;
    } catch (const Error& e) {
      ++local.skipped;
      local.errors.push_back(s.user + "/" + std::to_string(s.ts) + ": " + e.what());
    }
  }
  if (stats) *stats = std::move(local);
  return out;
}

TruthMap load_truth(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open truth file: " + path);
  json j;
  f >> j;
  TruthMap out;
  for (const auto& sj : j.at("samples")) {
    TruthRecord r;
    const auto t = sj.at("t").get<std::vector<double>>();
    r.t = {t[0], t[1], t[2]};
    const auto g = sj.at("g").get<std::vector<double>>();
    r.gaze = {g[0], g[1]};
    r.blink = sj.value("blink", false);
    out[{sj.at("user").get<std::string>(), sj.at("ts").get<std::int64_t>()}] = r;
  }
  return out;
}

void write_synthetic_dataset(const std::string& dir, const SyntheticDatasetSpec& spec) {
  fs::create_directories(dir);
  io::Container patches;
  json samples = json::array();
  json truth_samples = json::array();

  std::vector<std::pair<std::string, std::string>> roster;  // (user, split)
  for (const auto& u : spec.train_users) roster.emplace_back(u, "train");
  for (const auto& u : spec.val_users) roster.emplace_back(u, "val");
  for (const auto& u : spec.meta_test_users) roster.emplace_back(u, "meta_test");
  if (roster.empty()) throw Error(ErrorCode::InvalidInput, "no users requested");

  const auto face = sim::SyntheticFaceSpec::standard();
  for (const auto& [user_id, split] : roster) {
    (void)split;
    auto user = sim::SyntheticUser::from_id(user_id, spec.seed);
    auto cfg = spec.scene_cfg;
    cfg.scene_seed = sim::hash_combine(spec.seed, sim::hash_combine(0xda7a, user.appearance_seed));
    const auto data = sim::make_user_dataset(user, spec.samples_per_user, cfg);
    for (const auto& us : data) {
      const auto& rs = us.rendered;
      const std::string key = user_id + "/" + std::to_string(us.timestamp);
      const auto patch = prep::eye_patch_homography(rs.image, rs.frame, spec.patch);
      nn::Tensor<float> pt({static_cast<std::size_t>(patch.height),
                            static_cast<std::size_t>(patch.width), 3});
      pt.v = patch.rgb;
      patches.put(key, pt);

      json lm = json::array();
      for (const auto& p : rs.frame.points) lm.push_back({p.x(), p.y(), p.z()});
      std::vector<double> rot(9);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot[r * 3 + c] = rs.truth.R(r, c);
      const Vector2d px = denormalize_gaze(rs.truth.gaze, cfg.screen);
      samples.push_back({{"user", user_id},
                         {"ts", us.timestamp},
                         {"landmarks", lm},
                         {"rotation", rot},
                         {"gaze_px", {px.x(), px.y()}},
                         {"grid", us.grid},
                         {"patch", key}});
      truth_samples.push_back({{"user", user_id},
                               {"ts", us.timestamp},
                               {"t", {rs.truth.t.x(), rs.truth.t.y(), rs.truth.t.z()}},
                               {"g", {rs.truth.gaze.x(), rs.truth.gaze.y()}},
                               {"blink", rs.truth.blink}});
    }
  }

  const auto patch_path = (fs::path(dir) / "patches.gztc").string();
  patches.save(patch_path);

  json j;
  j["version"] = 1;
  j["topology"] = topology_json(face.topology);
  j["screen"] = {{"width_px", spec.scene_cfg.screen.width_px},
                 {"height_px", spec.scene_cfg.screen.height_px},
                 {"width_cm", spec.scene_cfg.screen.width_cm},
                 {"height_cm", spec.scene_cfg.screen.height_cm}};
  j["image_size"] = {spec.scene_cfg.image_width, spec.scene_cfg.image_height};
  j["intrinsics"] = {{"fx", spec.scene_cfg.camera.fx},
                     {"fy", spec.scene_cfg.camera.fy},
                     {"cx", spec.scene_cfg.camera.cx},
                     {"cy", spec.scene_cfg.camera.cy}};
  j["splits"] = {{"train", spec.train_users},
                 {"val", spec.val_users},
                 {"meta_test", spec.meta_test_users}};
  j["patch_store"] = "patches.gztc";
  j["patch_shape"] = {spec.patch.height, spec.patch.width};
  j["files"] = {{"patches.gztc", io::sha256_file_hex(patch_path)}};
  j["samples"] = std::move(samples);

  std::ofstream mf((fs::path(dir) / "manifest.json").string());
  mf << j.dump(1) << "\n";
  if (!mf) throw Error(ErrorCode::IoError, "manifest write failed");

  json tj;
  tj["samples"] = std::move(truth_samples);
  std::ofstream tf((fs::path(dir) / "truth.json").string());
  tf << tj.dump(1) << "\n";
  if (!tf) throw Error(ErrorCode::IoError, "truth write failed");
}

bool embedding_cache_valid(const std::string& path, const std::string& encoder_hash) {
  if (!fs::exists(path)) return false;
  try {
    const auto c = io::Container::load(path);
    const auto it = c.meta.find("encoder_hash");
    return it != c.meta.end() && it->second == encoder_hash;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace gazekit::data
