#include "doctest.h"

#include "gazekit/blazegaze.hpp"
#include "gazekit/meta.hpp"
#include "testutil.hpp"

using namespace gazekit;
using gaze::Vector2d;

namespace {

// Compact synthetic head-task generator: inputs are random feature vectors,
// the true mapping is linear plus a per-user bias.
struct ToyWorld {
  static constexpr int kDim = 10;
  Eigen::Matrix<double, 2, kDim> A;

  explicit ToyWorld(std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < kDim; ++c) A(r, c) = u(rng);
  }

  std::vector<meta::HeadSample<double>> samples(int n, const Vector2d& bias,
                                                std::uint64_t seed) const {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<meta::HeadSample<double>> out;
    for (int i = 0; i < n; ++i) {
      meta::HeadSample<double> s;
      s.input = nn::Tensor<double>({kDim});
      Eigen::Matrix<double, kDim, 1> x;
      for (int d = 0; d < kDim; ++d) {
        s.input.v[d] = u(rng);
        x(d) = s.input.v[d];
      }
      const Eigen::Vector2d g = A * x + Eigen::Vector2d(bias.x(), bias.y());
      s.g = {std::clamp(g.x(), -0.5, 0.5), std::clamp(g.y(), -0.5, 0.5)};
      s.ts = i;
      out.push_back(std::move(s));
    }
    return out;
  }
};

nn::Sequential<double> toy_head(std::uint64_t seed) {
  Rng rng(seed);
  nn::Sequential<double> head;
  head.emplace<nn::Dense<double>>(ToyWorld::kDim, 8, rng, "head.fc1");
  head.emplace<nn::ReLU<double>>();
  head.emplace<nn::Dense<double>>(8, 2, rng, "head.out");
  return head;
}

}  // namespace

TEST_CASE("inner_adapt with zero rate returns theta unchanged") {
  ToyWorld world(1);
  auto head = toy_head(2);
  const auto theta = nn::snapshot_params(head.params());
  const auto support = world.samples(9, {0.1, -0.1}, 3);
  const auto res = meta::inner_adapt(head, theta, support, 0.0, 5);
  REQUIRE(res.ok);
  for (std::size_t i = 0; i < theta.size(); ++i) CHECK(res.params[i].v == theta[i].v);
}

TEST_CASE("inner_adapt never mutates its input parameters") {
  ToyWorld world(4);
  auto head = toy_head(5);
  const auto theta = nn::snapshot_params(head.params());
  io::Container before;
  for (std::size_t i = 0; i < theta.size(); ++i)
    before.put("p" + std::to_string(i), theta[i]);
  const auto hash_before = [&] {
    const auto b = before.serialize();
    return io::sha256_hex(b.data(), b.size());
  }();

  meta::inner_adapt(head, theta, world.samples(9, {0.2, 0.0}, 6), 1e-2, 5);

  io::Container after;
  for (std::size_t i = 0; i < theta.size(); ++i)
    after.put("p" + std::to_string(i), theta[i]);
  const auto b = after.serialize();
  CHECK(io::sha256_hex(b.data(), b.size()) == hash_before);
}

TEST_CASE("zero-residual support leaves parameters at the optimum") {
  ToyWorld world(7);
  auto head = toy_head(8);
  const auto theta = nn::snapshot_params(head.params());
  // Labels equal to the model's own predictions: exact zero gradient.
  auto support = world.samples(5, {0, 0}, 9);
  nn::restore_params(head.params(), theta);
  for (auto& s : support) {
    const auto pred = head.forward(s.input);
    s.g = {pred.v[0], pred.v[1]};
  }
  const auto res = meta::inner_adapt(head, theta, support, 1e-3, 5);
  REQUIRE(res.ok);
  for (std::size_t i = 0; i < theta.size(); ++i) CHECK(res.params[i].v == theta[i].v);
}

TEST_CASE("adaptation lowers support loss for a biased user") {
  ToyWorld world(10);
  auto head = toy_head(11);
  const auto theta = nn::snapshot_params(head.params());
  const auto support = world.samples(9, {0.15, -0.12}, 12);
  const double before = [&] {
    nn::restore_params(head.params(), theta);
    return meta::head_loss_grad(head, support, false);
  }();
  const auto res = meta::inner_adapt(head, theta, support, 5e-2, 5);
  REQUIRE(res.ok);
  nn::restore_params(head.params(), res.params);
  const double after = meta::head_loss_grad(head, support, false);
  CHECK(after < before);
}

TEST_CASE("meta_step is permutation invariant over the task batch") {
  ToyWorld world(13);
  meta::MetaConfig cfg;
  cfg.inner_lr = 1e-3;
  cfg.inner_updates = 3;
  std::vector<meta::Task<double>> tasks(3);
  for (int i = 0; i < 3; ++i) {
    tasks[i].user_id = "u" + std::to_string(i);
    tasks[i].support = world.samples(9, {0.05 * i, -0.03 * i}, 20 + i);
    tasks[i].query = world.samples(20, {0.05 * i, -0.03 * i}, 40 + i);
  }

  auto head = toy_head(14);
  auto theta_a = nn::snapshot_params(head.params());
  auto theta_b = theta_a;

  auto opt_a = nn::Optimizer<double>::adam(1e-3);
  const double loss_a = meta::meta_step(head, theta_a, tasks, cfg, opt_a);

  std::vector<meta::Task<double>> shuffled = {tasks[2], tasks[0], tasks[1]};
  auto opt_b = nn::Optimizer<double>::adam(1e-3);
  const double loss_b = meta::meta_step(head, theta_b, shuffled, cfg, opt_b);

  CHECK(loss_a == doctest::Approx(loss_b).epsilon(1e-12));
  for (std::size_t i = 0; i < theta_a.size(); ++i)
    for (std::size_t j = 0; j < theta_a[i].size(); ++j)
      CHECK(theta_a[i].v[j] == doctest::Approx(theta_b[i].v[j]).epsilon(1e-12));
}

TEST_CASE("meta_step with zero inner rate equals plain pooled training") {
  ToyWorld world(15);
  meta::MetaConfig cfg;
  cfg.inner_lr = 0.0;
  cfg.inner_updates = 5;
  cfg.outer_lr = 1e-3;

  std::vector<meta::Task<double>> tasks(2);
  for (int i = 0; i < 2; ++i) {
    tasks[i].user_id = "u" + std::to_string(i);
    tasks[i].support = world.samples(9, {0.1, 0.1}, 60 + i);
    tasks[i].query = world.samples(15, {0.02 * i, 0.0}, 80 + i);
  }

  auto head = toy_head(16);
  auto theta_meta = nn::snapshot_params(head.params());
  auto theta_plain = theta_meta;

  // Oracle: per-step Adam on the summed per-task query gradients at theta,
  // written as an independent loop against the same primitives.
  auto plain_adam = nn::Optimizer<double>::adam(cfg.outer_lr);
  auto meta_adam = nn::Optimizer<double>::adam(cfg.outer_lr);

  for (int step = 0; step < 50; ++step) {
    meta::meta_step(head, theta_meta, tasks, cfg, meta_adam);

    auto params = head.params();
    nn::restore_params(params, theta_plain);
    head.zero_grad();
    for (const auto& task : tasks) meta::head_loss_grad(head, task.query, true);
    plain_adam.step(params);
    theta_plain = nn::snapshot_params(params);

    for (std::size_t i = 0; i < theta_meta.size(); ++i)
      for (std::size_t j = 0; j < theta_meta[i].size(); ++j)
        CHECK(std::abs(theta_meta[i].v[j] - theta_plain[i].v[j]) < 1e-10);
  }
}

TEST_CASE("personalize: k=1 boundary, provenance, duplicate semantics") {
  ToyWorld world(17);
  auto head = toy_head(18);
  const auto theta = nn::snapshot_params(head.params());
  meta::MetaConfig cfg;
  cfg.inner_lr = 1e-2;
  cfg.inner_updates = 1;

  const auto support1 = world.samples(1, {0.1, 0.1}, 19);
  const auto p1 = meta::personalize(head, theta, "theta-hash", support1, cfg);
  CHECK(p1.inner_steps == 1);
  CHECK(p1.meta_checkpoint_hash == "theta-hash");
  CHECK_FALSE(p1.support_set_hash.empty());

  // Duplicated support: mean gradient unchanged, single-step result matches.
  auto support9 = world.samples(9, {0.05, -0.05}, 20);
  auto doubled = support9;
  doubled.insert(doubled.end(), support9.begin(), support9.end());
  const auto pa = meta::personalize(head, theta, "h", support9, cfg);
  const auto pb = meta::personalize(head, theta, "h", doubled, cfg);
  for (std::size_t i = 0; i < pa.params.size(); ++i)
    for (std::size_t j = 0; j < pa.params[i].size(); ++j)
      CHECK(pa.params[i].v[j] == doctest::Approx(pb.params[i].v[j]).epsilon(1e-12));

  CHECK_THROWS_AS(meta::personalize(head, theta, "h", {}, cfg), Error);
}

TEST_CASE("append_calibration: no-op append and oldest eviction") {
  ToyWorld world(21);
  auto head = toy_head(22);
  const auto theta = nn::snapshot_params(head.params());
  meta::MetaConfig cfg;
  cfg.inner_lr = 1e-2;
  cfg.inner_updates = 2;
  cfg.max_support = 12;

  const auto support = world.samples(9, {0.12, 0.0}, 23);
  const auto base = meta::personalize(head, theta, "h", support, cfg);

  const auto same = meta::append_calibration(head, theta, "h", base, {}, cfg);
  CHECK(same.support_set_hash == base.support_set_hash);
  for (std::size_t i = 0; i < base.params.size(); ++i)
    CHECK(same.params[i].v == base.params[i].v);

  auto extra = world.samples(6, {0.12, 0.0}, 24);
  for (auto& s : extra) s.ts += 100;  // newer clicks
  const auto grown = meta::append_calibration(head, theta, "h", base, extra, cfg);
  CHECK(grown.evicted == 3);  // 15 > cap 12, oldest three dropped
  CHECK(grown.support.size() == 12);
  CHECK(grown.support.front().ts == 3);  // oldest remaining timestamp
}

TEST_CASE("re-adaptation starts from theta-star, not the previous head") {
  ToyWorld world(25);
  auto head = toy_head(26);
  const auto theta = nn::snapshot_params(head.params());
  meta::MetaConfig cfg;
  cfg.inner_lr = 1e-2;
  cfg.inner_updates = 3;

  const auto s1 = world.samples(9, {0.2, 0.1}, 27);
  const auto p1 = meta::personalize(head, theta, "h", s1, cfg);
  // Appending nothing must equal personalizing from scratch on the union.
  const auto p2 = meta::append_calibration(head, theta, "h", p1, {}, cfg);
  const auto fresh = meta::personalize(head, theta, "h", s1, cfg);
  for (std::size_t i = 0; i < fresh.params.size(); ++i)
    CHECK(p2.params[i].v == fresh.params[i].v);
}

TEST_CASE("build_task draws support from the grid pool and query from the rest") {
  ToyWorld world(28);
  const auto grid = world.samples(9, {0, 0}, 29);
  const auto rest = world.samples(40, {0, 0}, 30);
  Rng rng(31);
  const auto task = meta::build_task<double>("u", grid, rest, 9, 25, rng);
  CHECK(task.support.size() == 9);
  CHECK(task.query.size() == 25);
}
