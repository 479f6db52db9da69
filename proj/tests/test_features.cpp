#include "cohere/features.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cohere;

namespace {

ExtractorConfig small(int in = 3, bool normalize = true) {
  ExtractorConfig c;
  c.in_channels = in;
  c.layers = 2;
  c.kernel = 3;
  c.hidden = {5};
  c.d = 4;
  c.normalize = normalize;
  c.seed = 13;
  return c;
}

Frame random_frame(int w, int h, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.f, 1.f);
  Frame f;
  for (int k = 0; k < c; ++k) {
    FieldF ch(h, w);
    for (Eigen::Index i = 0; i < ch.size(); ++i) ch(i) = u(rng);
    f.channels.push_back(ch);
  }
  return f;
}

}  // namespace

TEST_CASE("identity 1x1 layer reproduces the input") {
  ExtractorConfig c;
  c.in_channels = 3;
  c.layers = 1;
  c.kernel = 1;
  c.hidden = {};
  c.d = 3;
  c.normalize = false;
  Weights w;
  Tensor k({1, 1, 3, 3});
  for (int i = 0; i < 3; ++i) k[i * 3 + i] = 1.0;
  w.tensors = {k, Tensor({3})};
  std::mt19937_64 rng(1);
  const Frame f = random_frame(6, 5, 3, rng);
  const FeatureMap map = extract(f, w, c);
  for (int y = 1; y <= 5; ++y)
    for (int x = 1; x <= 6; ++x) {
      const Eigen::VectorXd v = restrict(map, {x, y});
      for (int ch = 0; ch < 3; ++ch) CHECK(v[ch] == static_cast<double>(f.channels[static_cast<std::size_t>(ch)](y - 1, x - 1)));
    }
}

TEST_CASE("normalized maps have unit rows") {
  std::mt19937_64 rng(2);
  const ExtractorConfig c = small();
  const FeatureMap map = extract(random_frame(9, 7, 3, rng), init_weights(c), c);
  CHECK(map.values.rows() == 63);
  CHECK(map.dim() == 4);
  CHECK(((map.values.rowwise().norm().array() - 1.0).abs() <= 1e-9).all());
}

TEST_CASE("convolutional equivariance on interior pixels") {
  std::mt19937_64 rng(3);
  ExtractorConfig c = small(1, false);
  c.activation = Activation::relu;
  const Weights w = init_weights(c);
  const Frame f = random_frame(16, 14, 1, rng);
  const int dx = 3, dy = 2;
  Frame shifted = f;
  for (int y = 0; y < 14; ++y)
    for (int x = 0; x < 16; ++x) shifted.channels[0](y, x) = f.channels[0]((y - dy + 14) % 14, (x - dx + 16) % 16);
  const FeatureMap a = extract(f, w, c), b = extract(shifted, w, c);
  const int margin = (c.kernel - 1) / 2 * c.layers;
  for (int y = 1 + margin; y + margin <= 14 - dy; ++y)
    for (int x = 1 + margin; x + margin <= 16 - dx; ++x) {
      CHECK((restrict(a, {x, y}) - restrict(b, {x + dx, y + dy})).norm() <= 1e-12);
    }
}

TEST_CASE("restrict bounds are 1-based") {
  std::mt19937_64 rng(4);
  const ExtractorConfig c = small();
  const FeatureMap map = extract(random_frame(5, 4, 3, rng), init_weights(c), c);
  CHECK(restrict(map, {1, 1}) == map.values.row(0).transpose());
  CHECK(restrict(map, {5, 4}) == map.values.row(19).transpose());
  CHECK_THROWS_AS(restrict(map, {0, 0}), BoundsError);
  CHECK_THROWS_AS(restrict(map, {6, 1}), BoundsError);
}

TEST_CASE("equal seeds give bit-equal maps, other seeds differ") {
  std::mt19937_64 rng(5);
  const Frame f = random_frame(7, 7, 3, rng);
  ExtractorConfig a = small(), b = small();
  CHECK(extract(f, init_weights(a), a).values == extract(f, init_weights(b), b).values);
  b.seed = 14;
  CHECK(extract(f, init_weights(a), a).values != extract(f, init_weights(b), b).values);
}

TEST_CASE("weight init scale and zero biases") {
  ExtractorConfig c = small();
  const Weights w = init_weights(c);
  REQUIRE(w.tensors.size() == 4);
  CHECK(w.tensors[0].shape() == Shape{3, 3, 3, 5});
  CHECK(w.tensors[2].shape() == Shape{3, 3, 5, 4});
  CHECK(w.tensors[0].data().cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 27.0));
  CHECK(w.tensors[2].data().cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 45.0));
  CHECK(w.tensors[1].data().isZero());
  CHECK(w.tensors[3].data().isZero());
}

TEST_CASE("forward gradients pass finite differences") {
  std::mt19937_64 rng(6);
  const ExtractorConfig c = small();
  const Weights w = init_weights(c);
  const Tensor input = frame_tensor(random_frame(5, 5, 3, rng));
  const Tensor probe = test::random_tensor({25, 4}, rng);
  // perturb one weight tensor at a time through the whole extractor
  for (std::size_t i = 0; i < w.tensors.size(); ++i) {
    CAPTURE(i);
    double worst = 0.0;
    Tape tape;
    const ForwardGraph g = forward(tape, input, w, c, true);
    const Var loss = tape.sum(tape.mul(g.features, tape.constant(probe)));
    const Tensor analytic = tape.backward(loss)[g.params[i]];
    for (Eigen::Index j = 0; j < analytic.size(); j += 7) {
      auto eval = [&](double delta) {
        Weights p = w;
        p.tensors[i][j] += delta;
        Tape t2;
        const ForwardGraph g2 = forward(t2, input, p, c, false);
        return t2.value(t2.sum(t2.mul(g2.features, t2.constant(probe)))).item();
      };
      const double fd = (eval(1e-5) - eval(-1e-5)) / 2e-5;
      worst = std::max(worst, std::abs(fd - analytic[j]) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("shape mismatches are reported") {
  std::mt19937_64 rng(7);
  const ExtractorConfig c = small();
  CHECK_THROWS_AS(extract(random_frame(5, 5, 1, rng), init_weights(c), c), ShapeError);
  Weights w = init_weights(c);
  w.tensors.pop_back();
  CHECK_THROWS_AS(extract(random_frame(5, 5, 3, rng), w, c), ShapeError);
  ExtractorConfig bad = c;
  bad.kernel = 4;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("extractor config text round-trip") {
  ExtractorConfig c = small();
  c.activation = Activation::relu;
  c.seed = 1234567890123ull;
  CHECK(ExtractorConfig::parse(c.to_text()) == c);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  ExtractorConfig c = small();
  Weights w = init_weights(c);
  w.version = (std::uint64_t{5} << 32) + 9;
  const auto path = test::scratch_dir("wgt") / "w.wgt";
  save_weights(path, c, w);
  const auto [c2, w2] = load_weights(path);
  CHECK(c2 == c);
  CHECK(w2 == w);
  CHECK(w2.version == w.version);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(load_weights(path), FormatError);
}
