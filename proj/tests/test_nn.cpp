#include "doctest.h"

#include "gazekit/layers.hpp"
#include "testutil.hpp"

using namespace gazekit;
using nn::Padding;
using nn::Tensor;

TEST_CASE("1x1 conv with identity kernel reproduces its input") {
  Rng rng(1);
  nn::Conv2D<double> conv(3, 3, 1, 1, Padding::Same, rng);
  auto params = conv.params();
  params[0]->w.fill(0);
  params[1]->w.fill(0);
  for (std::size_t c = 0; c < 3; ++c) params[0]->w.v[c * 3 + c] = 1.0;  // w[0,0,c,c]
  Tensor<double> x({4, 5, 3});
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& v : x.v) v = u(rng);
  const auto y = conv.forward(x);
  REQUIRE(y.shape == x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.v[i] == doctest::Approx(x.v[i]));
}

TEST_CASE("dense with zero weights returns its bias") {
  Rng rng(2);
  nn::Dense<double> dense(7, 3, rng);
  auto params = dense.params();
  params[0]->w.fill(0);
  params[1]->w.v = {0.5, -1.25, 2.0};
  Tensor<double> x({7});
  for (auto& v : x.v) v = 3.3;
  const auto y = dense.forward(x);
  CHECK(y.v[0] == 0.5);
  CHECK(y.v[1] == -1.25);
  CHECK(y.v[2] == 2.0);
}

TEST_CASE("shape errors name both shapes") {
  Rng rng(3);
  nn::Dense<double> dense(7, 3, rng);
  Tensor<double> x({5});
  try {
    dense.forward(x);
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
    CHECK(std::string(e.what()).find("(5)") != std::string::npos);
    CHECK(std::string(e.what()).find("(7)") != std::string::npos);
  }
}

TEST_CASE("finite-difference gradients: conv variants") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    {
      nn::Conv2D<double> l(2, 3, 3, 1, Padding::Same, rng);
      CHECK(testutil::gradient_check(l, {5, 6, 2}, seed) < 1e-4);
    }
    {
      nn::Conv2D<double> l(2, 3, 3, 2, Padding::Same, rng);
      CHECK(testutil::gradient_check(l, {6, 8, 2}, seed + 50) < 1e-4);
    }
    {
      nn::Conv2D<double> l(2, 2, 3, 1, Padding::Valid, rng);
      CHECK(testutil::gradient_check(l, {5, 5, 2}, seed + 100) < 1e-4);
    }
  }
}

TEST_CASE("finite-difference gradients: depthwise, transpose, pool, dense") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Rng rng(seed);
    {
      nn::DepthwiseConv2D<double> l(3, 5, 1, Padding::Same, rng);
      CHECK(testutil::gradient_check(l, {6, 6, 3}, seed) < 1e-4);
    }
    {
      nn::DepthwiseConv2D<double> l(3, 5, 2, Padding::Same, rng);
      CHECK(testutil::gradient_check(l, {6, 8, 3}, seed + 1) < 1e-4);
    }
    {
      nn::ConvTranspose2D<double> l(2, 3, 4, 2, rng);
      CHECK(testutil::gradient_check(l, {3, 4, 2}, seed + 2) < 1e-4);
    }
    {
      nn::MaxPool2D<double> l(2, 2);
      CHECK(testutil::gradient_check(l, {6, 8, 3}, seed + 3) < 1e-4);
    }
    {
      nn::GlobalAvgPool<double> l;
      CHECK(testutil::gradient_check(l, {4, 5, 3}, seed + 4) < 1e-4);
    }
    {
      nn::Dense<double> l(8, 5, rng);
      CHECK(testutil::gradient_check(l, {8}, seed + 5) < 1e-4);
    }
    {
      nn::ReLU<double> l;
      CHECK(testutil::gradient_check(l, {4, 4, 2}, seed + 6) < 1e-4);
    }
    {
      nn::Sigmoid<double> l;
      CHECK(testutil::gradient_check(l, {4, 4, 2}, seed + 7) < 1e-4);
    }
  }
}

TEST_CASE("blaze block: zero main path reduces to relu of the input") {
  Rng rng(31);
  nn::BlazeBlock<double> block(nn::BlazeBlock<double>::Kind::Single, 4, 4, 1, rng);
  for (auto* p : block.params()) p->w.fill(0);
  Tensor<double> x({6, 6, 4});
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& v : x.v) v = u(rng);
  const auto y = block.forward(x);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y.v[i] == doctest::Approx(std::max(x.v[i], 0.0)));
}

TEST_CASE("blaze block: stride two halves even spatial dims and pads channels") {
  Rng rng(32);
  nn::BlazeBlock<double> block(nn::BlazeBlock<double>::Kind::Double, 4, 8, 2, rng, 2);
  Tensor<double> x({8, 16, 4});
  const auto y = block.forward(x);
  CHECK(y.shape == std::vector<std::size_t>{4, 8, 8});
  CHECK(block.out_shape({8, 16, 4}) == std::vector<std::size_t>{4, 8, 8});
}

TEST_CASE("blaze block rejects channel shrink and bad stride") {
  Rng rng(33);
  CHECK_THROWS_AS(nn::BlazeBlock<double>(nn::BlazeBlock<double>::Kind::Single, 8, 4, 1, rng),
                  Error);
  CHECK_THROWS_AS(nn::BlazeBlock<double>(nn::BlazeBlock<double>::Kind::Single, 4, 4, 3, rng),
                  Error);
}

TEST_CASE("finite-difference gradients: blaze blocks on 8x16x4 input") {
  for (std::uint64_t seed : {41u, 42u}) {
    Rng rng(seed);
    {
      nn::BlazeBlock<double> l(nn::BlazeBlock<double>::Kind::Single, 4, 4, 1, rng);
      CHECK(testutil::gradient_check(l, {8, 16, 4}, seed) < 1e-4);
    }
    {
      nn::BlazeBlock<double> l(nn::BlazeBlock<double>::Kind::Single, 4, 6, 2, rng);
      CHECK(testutil::gradient_check(l, {8, 16, 4}, seed + 1) < 1e-4);
    }
    {
      nn::BlazeBlock<double> l(nn::BlazeBlock<double>::Kind::Double, 4, 6, 2, rng, 3);
      CHECK(testutil::gradient_check(l, {8, 16, 4}, seed + 2) < 1e-4);
    }
  }
}

TEST_CASE("sequential composes forward, backward, shapes, and macs") {
  Rng rng(51);
  nn::Sequential<double> seq;
  seq.emplace<nn::Conv2D<double>>(2, 4, 3, 2, Padding::Same, rng, "c1");
  seq.emplace<nn::ReLU<double>>();
  seq.emplace<nn::GlobalAvgPool<double>>();
  seq.emplace<nn::Dense<double>>(4, 3, rng, "d1");
  CHECK(seq.out_shape({6, 8, 2}) == std::vector<std::size_t>{3});
  // conv macs: 3*4 spatial x 4 out x 9 taps x 2 in; dense: 4*3.
  CHECK(seq.macs({6, 8, 2}) == 3ull * 4 * 4 * 9 * 2 + 12);
  CHECK(testutil::gradient_check(seq, {6, 8, 2}, 777) < 1e-4);
}

TEST_CASE("forward is deterministic given parameters and input") {
  Rng rng(61);
  nn::Conv2D<float> conv(3, 8, 5, 2, Padding::Same, rng);
  Tensor<float> x({16, 16, 3});
  std::uniform_real_distribution<float> u(-1, 1);
  for (auto& v : x.v) v = u(rng);
  const auto a = conv.forward(x);
  const auto b = conv.forward(x);
  CHECK(a.v == b.v);
}
