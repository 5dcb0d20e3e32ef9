#pragma once

#include <cstdint>

#include "gazekit/container.hpp"
#include "gazekit/layers.hpp"
#include "gazekit/losses.hpp"

namespace gazekit::gaze {

// One encoder stage; channel ladders are data so the full-size and the
// CI-speed reduced network share the builder.
struct BlockSpec {
  enum class Kind { Stem, Single, Double } kind = Kind::Single;
  std::size_t out_c = 0;
  std::size_t stride = 1;
  std::size_t mid_c = 0;  // double blocks only
};

struct ArchConfig {
  std::size_t patch_h = 128, patch_w = 512;
  std::size_t latent = 512;
  std::vector<BlockSpec> encoder;
  std::vector<std::size_t> decoder_channels;  // tconv ladder, last entry is 3
  std::size_t pose_dim = 12;
  std::size_t head_hidden = 16;

  static ArchConfig full();
  static ArchConfig reduced();  // 32x128 patches for fast CPU training
  static ArchConfig by_name(const std::string& name);

  std::size_t downsamples() const;
  void validate() const;
};

std::string arch_to_json(const ArchConfig& cfg);
ArchConfig arch_from_json(const std::string& text);

template <class T>
class BlazeGazeModel {
 public:
  BlazeGazeModel(ArchConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(seed);
    build_encoder(rng);
    build_decoder(rng);
    build_head(rng);
    pose_mean_ = nn::Tensor<T>({cfg_.pose_dim});
    pose_std_ = nn::Tensor<T>({cfg_.pose_dim});
    pose_std_.fill(T(1));
  }

  const ArchConfig& arch() const { return cfg_; }

  nn::Sequential<T>& encoder() { return encoder_; }
  nn::Sequential<T>& decoder() { return decoder_; }
  nn::Sequential<T>& gaze_head() { return head_; }

  nn::Tensor<T>& pose_mean() { return pose_mean_; }
  nn::Tensor<T>& pose_std() { return pose_std_; }

  // z-scored [R|t] vector using the stored training-split constants.
  nn::Tensor<T> normalize_pose(const nn::Tensor<T>& pose12) const {
    nn::require_shape(pose12, {cfg_.pose_dim}, "pose input");
    nn::Tensor<T> out({cfg_.pose_dim});
    for (std::size_t i = 0; i < cfg_.pose_dim; ++i)
      out.v[i] = (pose12.v[i] - pose_mean_.v[i]) / pose_std_.v[i];
    return out;
  }

  nn::Tensor<T> encode(const nn::Tensor<T>& patch) { return encoder_.forward(patch); }
  nn::Tensor<T> decode(const nn::Tensor<T>& z) { return decoder_.forward(z); }

  nn::Tensor<T> head_input(const nn::Tensor<T>& z, const nn::Tensor<T>& pose_norm) const {
    nn::Tensor<T> in({cfg_.latent + cfg_.pose_dim});
    std::copy(z.v.begin(), z.v.end(), in.v.begin());
    std::copy(pose_norm.v.begin(), pose_norm.v.end(), in.v.begin() + cfg_.latent);
    return in;
  }

  // Inference path: patch + raw pose -> normalized gaze.
  nn::Tensor<T> predict(const nn::Tensor<T>& patch, const nn::Tensor<T>& pose12) {
    const auto z = encode(patch);
    return head_.forward(head_input(z, normalize_pose(pose12)));
  }

  std::vector<nn::Param<T>*> all_params() {
    auto out = encoder_.params();
    for (auto* p : decoder_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }
  std::vector<nn::Param<T>*> deployed_params() {
    auto out = encoder_.params();
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  std::size_t deployed_param_count() {
    std::size_t n = 0;
    for (auto* p : deployed_params()) n += p->w.size();
    return n;
  }

  // MACs of one inference pass (encoder + head).
  std::uint64_t deployed_macs() const {
    return encoder_.macs({cfg_.patch_h, cfg_.patch_w, 3}) +
           head_.macs({cfg_.latent + cfg_.pose_dim});
  }

  void save(const std::string& path, std::map<std::string, std::string> extra_meta = {}) {
    io::Container c;
    c.meta = std::move(extra_meta);
    c.meta["format"] = "blazegaze-checkpoint";
    c.meta["arch"] = arch_to_json(cfg_);
    for (auto* p : all_params()) c.put(p->name, p->w);
    c.put("pose_norm.mean", pose_mean_);
    c.put("pose_norm.std", pose_std_);
    c.save(path);
  }

  void load(const io::Container& c) {
    for (auto* p : all_params()) {
      const auto& e = c.get(p->name);
      if (e.shape != p->w.shape)
        throw Error(ErrorCode::ShapeMismatch, "checkpoint shape mismatch at " + p->name);
      p->w = e.template as<T>();
    }
    pose_mean_ = c.get("pose_norm.mean").template as<T>();
    pose_std_ = c.get("pose_norm.std").template as<T>();
  }
  void load(const std::string& path) { load(io::Container::load(path)); }

  std::string encoder_hash() {
    io::Container c;
    for (auto* p : encoder_.params()) c.put(p->name, p->w);
    const auto bytes = c.serialize();
    return io::sha256_hex(bytes.data(), bytes.size());
  }

  // Fresh gaze head with this model's layout; used by the meta stage, which
  // adapts head weights in 64-bit while the encoder stays frozen.
  template <class U>
  nn::Sequential<U> make_head_like(std::uint64_t seed = 0) const {
    Rng rng(seed);
    nn::Sequential<U> head;
    const std::size_t in = cfg_.latent + cfg_.pose_dim;
    head.template emplace<nn::Dense<U>>(in, cfg_.head_hidden, rng, "head.fc1");
    head.template emplace<nn::ReLU<U>>();
    head.template emplace<nn::Dense<U>>(cfg_.head_hidden, cfg_.head_hidden, rng, "head.fc2");
    head.template emplace<nn::ReLU<U>>();
    head.template emplace<nn::Dense<U>>(cfg_.head_hidden, 2, rng, "head.out");
    return head;
  }

 private:
  void build_encoder(Rng& rng) {
    std::size_t in_c = 3;
    int idx = 0;
    for (const auto& b : cfg_.encoder) {
      const std::string name = "enc." + std::to_string(idx++);
      switch (b.kind) {
        case BlockSpec::Kind::Stem:
          encoder_.template emplace<nn::Conv2D<T>>(in_c, b.out_c, 5, b.stride,
                                                   nn::Padding::Same, rng, name + ".stem");
          encoder_.template emplace<nn::ReLU<T>>();
          break;
        case BlockSpec::Kind::Single:
          encoder_.template emplace<nn::BlazeBlock<T>>(
              nn::BlazeBlock<T>::Kind::Single, in_c, b.out_c, b.stride, rng, 0, name);
          break;
        case BlockSpec::Kind::Double:
          encoder_.template emplace<nn::BlazeBlock<T>>(
              nn::BlazeBlock<T>::Kind::Double, in_c, b.out_c, b.stride, rng, b.mid_c,
              name);
          break;
      }
      in_c = b.out_c;
    }
    encoder_.template emplace<nn::GlobalAvgPool<T>>();
    encoder_.template emplace<nn::Dense<T>>(in_c, cfg_.latent, rng, "enc.embed");
  }

  void build_decoder(Rng& rng) {
    const std::size_t down = cfg_.downsamples();
    const std::size_t h0 = cfg_.patch_h >> down, w0 = cfg_.patch_w >> down;
    const std::size_t c0 = cfg_.decoder_channels.front();
    decoder_.template emplace<nn::Dense<T>>(cfg_.latent, h0 * w0 * c0, rng, "dec.seed");
    decoder_.template emplace<nn::ReLU<T>>();
    decoder_.template emplace<nn::Reshape<T>>(std::vector<std::size_t>{h0, w0, c0});
    std::size_t in_c = c0;
    for (std::size_t i = 1; i < cfg_.decoder_channels.size(); ++i) {
      const std::size_t out_c = cfg_.decoder_channels[i];
      decoder_.template emplace<nn::ConvTranspose2D<T>>(in_c, out_c, 4, 2, rng,
                                                        "dec.up" + std::to_string(i));
      if (i + 1 < cfg_.decoder_channels.size())
        decoder_.template emplace<nn::ReLU<T>>();
      else
        decoder_.template emplace<nn::Sigmoid<T>>();
      in_c = out_c;
    }
  }

  void build_head(Rng& rng) {
    const std::size_t in = cfg_.latent + cfg_.pose_dim;
    head_.template emplace<nn::Dense<T>>(in, cfg_.head_hidden, rng, "head.fc1");
    head_.template emplace<nn::ReLU<T>>();
    head_.template emplace<nn::Dense<T>>(cfg_.head_hidden, cfg_.head_hidden, rng, "head.fc2");
    head_.template emplace<nn::ReLU<T>>();
    head_.template emplace<nn::Dense<T>>(cfg_.head_hidden, 2, rng, "head.out");
  }

  ArchConfig cfg_;
  nn::Sequential<T> encoder_, decoder_, head_;
  nn::Tensor<T> pose_mean_, pose_std_;
};

template <class T>
BlazeGazeModel<T> load_model(const std::string& path) {
  const auto c = io::Container::load(path);
  const auto it = c.meta.find("arch");
  if (it == c.meta.end())
    throw Error(ErrorCode::SchemaViolation, "checkpoint lacks architecture metadata");
  BlazeGazeModel<T> model(arch_from_json(it->second), 0);
  model.load(c);
  return model;
}

// Copy one parameter list onto another (possibly different scalar type).
template <class Dst, class Src>
void copy_params(const std::vector<nn::Param<Dst>*>& dst,
                 const std::vector<nn::Param<Src>*>& src) {
  if (dst.size() != src.size())
    throw Error(ErrorCode::ShapeMismatch, "parameter list size mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->w.shape != src[i]->w.shape)
      throw Error(ErrorCode::ShapeMismatch, "parameter shape mismatch at " + dst[i]->name);
    dst[i]->w = src[i]->w.template cast<Dst>();
  }
}

}  // namespace gazekit::gaze
