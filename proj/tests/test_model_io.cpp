#include "doctest.h"

#include <fstream>

#include "gazekit/blazegaze.hpp"
#include "gazekit/dataset.hpp"
#include "gazekit/model_io.hpp"
#include "testutil.hpp"

using namespace gazekit;

TEST_CASE("container round-trips tensors and metadata") {
  testutil::TempDir tmp("container");
  io::Container c;
  c.meta["purpose"] = "roundtrip";
  nn::Tensor<float> tf({2, 3});
  for (std::size_t i = 0; i < tf.size(); ++i) tf.v[i] = 0.5f * i;
  nn::Tensor<double> td({4});
  for (std::size_t i = 0; i < td.size(); ++i) td.v[i] = -1.25 * i;
  c.put("a/f32", tf);
  c.put("b/f64", td);
  const auto path = tmp.file("t.gztc");
  c.save(path);

  const auto r = io::Container::load(path);
  CHECK(r.meta.at("purpose") == "roundtrip");
  CHECK(r.get("a/f32").as<float>().v == tf.v);
  CHECK(r.get("b/f64").as<double>().v == td.v);
  CHECK_THROWS_AS(r.get("missing"), Error);
}

TEST_CASE("container rejects bad magic and versions") {
  testutil::TempDir tmp("badmagic");
  const auto path = tmp.file("bad.gztc");
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE1234567890";
  }
  CHECK_THROWS_AS(io::Container::load(path), Error);

  io::Container c;
  c.save(path);
  // Corrupt the version field in place.
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4);
    const std::uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  CHECK_THROWS_AS(io::Container::load(path), Error);
}

TEST_CASE("params hash tracks parameter content") {
  Rng rng(1);
  nn::Dense<double> d(4, 2, rng, "d");
  const auto h1 = nn::params_hash(d.params());
  const auto h2 = nn::params_hash(d.params());
  CHECK(h1 == h2);
  d.params()[0]->w.v[0] += 1e-9;
  CHECK(nn::params_hash(d.params()) != h1);
}

TEST_CASE("blazegaze checkpoints restore predictions bitwise") {
  testutil::TempDir tmp("ckpt");
  auto arch = gaze::ArchConfig::reduced();
  gaze::BlazeGazeModel<float> model(arch, 7);
  Rng rng(2);
  std::uniform_real_distribution<float> u(0, 1);
  nn::Tensor<float> patch({arch.patch_h, arch.patch_w, 3});
  for (auto& v : patch.v) v = u(rng);
  nn::Tensor<float> pose({12});
  for (auto& v : pose.v) v = u(rng);
  const auto before = model.predict(patch, pose);

  const auto path = tmp.file("model.gztc");
  model.save(path);
  gaze::BlazeGazeModel<float> loaded(arch, 999);  // different init
  loaded.load(path);
  const auto after = loaded.predict(patch, pose);
  CHECK(before.v == after.v);
  CHECK(model.encoder_hash() == loaded.encoder_hash());
}

TEST_CASE("embedding cache validity is bound to the encoder hash") {
  testutil::TempDir tmp("cache");
  const auto path = tmp.file("embed.gztc");
  io::Container c;
  c.meta["encoder_hash"] = "abc123";
  nn::Tensor<float> z({4});
  c.put("u/0", z);
  c.save(path);
  CHECK(data::embedding_cache_valid(path, "abc123"));
  CHECK_FALSE(data::embedding_cache_valid(path, "different"));
  CHECK_FALSE(data::embedding_cache_valid(tmp.file("missing.gztc"), "abc123"));
}

TEST_CASE("snapshot and restore round-trip parameter values") {
  Rng rng(3);
  nn::Dense<double> d(3, 3, rng, "d");
  const auto snap = nn::snapshot_params(d.params());
  d.params()[0]->w.fill(0);
  nn::restore_params(d.params(), snap);
  CHECK(d.params()[0]->w.v == snap[0].v);
}
