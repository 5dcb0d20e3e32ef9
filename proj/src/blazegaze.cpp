#include "gazekit/blazegaze.hpp"

#include <nlohmann/json.hpp>

namespace gazekit::gaze {

ArchConfig ArchConfig::full() {
  ArchConfig c;
  c.patch_h = 128;
  c.patch_w = 512;
  c.latent = 512;
  using K = BlockSpec::Kind;
  c.encoder = {
      {K::Stem, 32, 2, 0},        // 64x256
      {K::Single, 32, 1, 0},
      {K::Single, 64, 2, 0},      // 32x128
      {K::Single, 64, 1, 0},
      {K::Double, 128, 2, 32},    // 16x64
      {K::Double, 128, 1, 32},
      {K::Double, 128, 2, 32},    // 8x32
      {K::Double, 128, 1, 32},
      {K::Double, 128, 2, 32},    // 4x16
      {K::Double, 128, 1, 32},
  };
  c.decoder_channels = {64, 64, 48, 32, 16, 3};
  return c;
}

ArchConfig ArchConfig::reduced() {
  ArchConfig c;
  c.patch_h = 32;
  c.patch_w = 128;
  c.latent = 512;
  using K = BlockSpec::Kind;
  c.encoder = {
      {K::Stem, 8, 2, 0},        // 16x64
      {K::Single, 8, 1, 0},
      {K::Single, 16, 2, 0},     // 8x32
      {K::Single, 16, 1, 0},
      {K::Double, 32, 2, 8},     // 4x16
      {K::Double, 32, 2, 8},     // 2x8
  };
  c.decoder_channels = {24, 16, 12, 8, 3};
  return c;
}

ArchConfig ArchConfig::by_name(const std::string& name) {
  if (name == "full") return full();
  if (name == "reduced") return reduced();
  throw Error(ErrorCode::InvalidInput, "unknown architecture: " + name);
}

std::string arch_to_json(const ArchConfig& cfg) {
  nlohmann::json j;
  j["patch_h"] = cfg.patch_h;
  j["patch_w"] = cfg.patch_w;
  j["latent"] = cfg.latent;
  j["pose_dim"] = cfg.pose_dim;
  j["head_hidden"] = cfg.head_hidden;
  j["decoder_channels"] = cfg.decoder_channels;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : cfg.encoder) {
    blocks.push_back({{"kind", static_cast<int>(b.kind)},
                      {"out_c", b.out_c},
                      {"stride", b.stride},
                      {"mid_c", b.mid_c}});
  }
  j["encoder"] = blocks;
  return j.dump();
}

ArchConfig arch_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorCode::SchemaViolation, "architecture metadata is not valid JSON");
  ArchConfig cfg;
  cfg.patch_h = j.at("patch_h").get<std::size_t>();
  cfg.patch_w = j.at("patch_w").get<std::size_t>();
  cfg.latent = j.at("latent").get<std::size_t>();
  cfg.pose_dim = j.at("pose_dim").get<std::size_t>();
  cfg.head_hidden = j.at("head_hidden").get<std::size_t>();
  cfg.decoder_channels = j.at("decoder_channels").get<std::vector<std::size_t>>();
  cfg.encoder.clear();
  for (const auto& bj : j.at("encoder")) {
    BlockSpec b;
    b.kind = static_cast<BlockSpec::Kind>(bj.at("kind").get<int>());
    b.out_c = bj.at("out_c").get<std::size_t>();
    b.stride = bj.at("stride").get<std::size_t>();
    b.mid_c = bj.at("mid_c").get<std::size_t>();
    cfg.encoder.push_back(b);
  }
  cfg.validate();
  return cfg;
}

std::size_t ArchConfig::downsamples() const {
  std::size_t n = 0;
  for (const auto& b : encoder)
    if (b.stride == 2) ++n;
  return n;
}

void ArchConfig::validate() const {
  if (encoder.empty() || decoder_channels.size() < 2 || decoder_channels.back() != 3)
    throw Error(ErrorCode::InvalidInput, "malformed architecture config");
  const std::size_t down = downsamples();
  if ((patch_h >> down) << down != patch_h || (patch_w >> down) << down != patch_w)
    throw Error(ErrorCode::InvalidInput,
                "patch size must be divisible by 2^downsamples");
  if (decoder_channels.size() - 1 != down)
    throw Error(ErrorCode::InvalidInput,
                "decoder ladder must upsample once per encoder downsample");
  if (latent == 0 || pose_dim == 0)
    throw Error(ErrorCode::InvalidInput, "latent/pose dims must be positive");
}

}  // namespace gazekit::gaze
