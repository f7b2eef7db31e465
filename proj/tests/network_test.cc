#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "relcnn/network.h"
#include "test_util.h"

using namespace relcnn;

namespace {

ConvFilterBank small_bank() {
  ConvFilterBank b;
  b.width = 2;
  b.filters = 2;
  b.input_dim = 2;
  b.weights = {1, 0, 0, 1,    // picks x[i][0] + x[i+1][1]
               -1, -1, 0, 0};  // -(x[i][0] + x[i][1])
  b.bias = {0.5, 0.0};
  return b;
}

}  // namespace

TEST_CASE("convolution matches a hand computation") {
  std::vector<double> x = {1, 2,  //
                           -3, 4,  //
                           0.5, -1};
  auto h = conv_forward(x, 3, small_bank());
  REQUIRE(h.size() == 4);
  CHECK(h[0] == doctest::Approx(1 + 4 + 0.5));
  CHECK(h[1] == 0.0);  // -(1 + 2) clipped by ReLU
  CHECK(h[2] == 0.0);  // -3 - 1 + 0.5 clipped
  CHECK(h[3] == 0.0);  // -(-3 + 4) clipped

  auto shifted = conv_forward(std::vector<double>{0, 0, 2, 1, 3, 0}, 3,
                              small_bank());
  CHECK(shifted[2] == doctest::Approx(2 + 0 + 0.5));
  CHECK(shifted[3] == 0.0);
}

TEST_CASE("convolution of a sequence shorter than the filter throws") {
  std::vector<double> x = {1, 2};
  CHECK_THROWS_AS(conv_forward(x, 1, small_bank()), std::invalid_argument);
}

TEST_CASE("valid windows") {
  using V = std::vector<std::uint8_t>;
  CHECK(valid_windows(7, 7, 3) == V{1, 1, 1, 1, 1});
  CHECK(valid_windows(9, 7, 3) == V{1, 1, 1, 1, 1, 0, 0});
  CHECK(valid_windows(6, 2, 6) == V{1});
  CHECK(valid_windows(6, 2, 4) == V{1, 0, 0});
}

TEST_CASE("max pooling with ties and masking") {
  // 3 windows x 2 filters
  std::vector<double> h = {1, 5,  //
                           3, 5,  //
                           9, 0};
  std::vector<std::uint8_t> all = {1, 1, 1};
  PoolResult p = max_pool(h, 3, 2, all);
  CHECK(p.values == std::vector<double>{9, 5});
  CHECK(p.argmax == std::vector<int>{2, 0});

  std::vector<std::uint8_t> masked = {1, 1, 0};
  p = max_pool(h, 3, 2, masked);
  CHECK(p.values == std::vector<double>{3, 5});
  CHECK(p.argmax == std::vector<int>{1, 0});
}

TEST_CASE("dense layer and softmax oracles") {
  DenseLayer d;
  d.outputs = 2;
  d.inputs = 3;
  d.weights = {1, 2, 3, -1, 0, 1};
  d.bias = {0.5, -0.5};
  auto o = dense_forward(std::vector<double>{1, 1, 2}, d);
  CHECK(o[0] == doctest::Approx(9.5));
  CHECK(o[1] == doctest::Approx(0.5));

  std::vector<double> logits = {1.0, 2.0, 3.0};
  auto p = softmax(logits);
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));

  auto big = softmax(std::vector<double>{1000.0, 1000.0});
  CHECK(big[0] == doctest::Approx(0.5));
  CHECK(std::isfinite(softmax_loss(std::vector<double>{-1000.0, 1000.0}, 0).loss));

  auto sl = softmax_loss(logits, 1);
  CHECK(sl.loss == doctest::Approx(std::log(z) - 2.0).epsilon(1e-14));
}

TEST_CASE("dropout statistics and evaluation identity") {
  std::vector<double> ones(100000, 1.0);
  Rng rng(4);
  auto d = apply_dropout(ones, 0.5, Mode::kTrain, rng);
  double mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) /
                static_cast<double>(d.values.size());
  CHECK(std::abs(mean - 1.0) < 0.02);
  for (double m : d.mask) CHECK((m == 0.0 || m == 2.0));

  std::vector<double> z = {0.3, -1.0, 2.0};
  auto e = apply_dropout(z, 0.5, Mode::kEval, rng);
  CHECK(e.values == z);
}

TEST_CASE("zero dense weights give uniform probabilities") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2, 3}, 4, 3);
  std::fill(p.dense.weights.begin(), p.dense.weights.end(), 0.0);
  std::fill(p.dense.bias.begin(), p.dense.bias.end(), 0.0);
  Rng rng(1);
  auto inst = testing::random_instance(v, 5, 0, rng);
  auto c = forward(inst, p, Mode::kEval, rng);
  for (double q : c.probs) CHECK(q == doctest::Approx(1.0 / 6));
  CHECK(c.predicted() == 0);
}

TEST_CASE("instances shorter than the widest filter are padded") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {4, 6}, 3, 5);
  Rng rng(1);
  auto inst = testing::random_instance(v, 2, 0, rng);
  auto c = forward(inst, p, Mode::kEval, rng);
  CHECK(c.padded_length == 6);
  CHECK(c.real_length == 2);
  CHECK(c.pooled.size() == 6);

  EncodedInstance empty;
  CHECK_THROWS_AS(forward(empty, p, Mode::kEval, rng), std::invalid_argument);
}

TEST_CASE("appended PAD tokens do not change the logits") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2, 3, 5}, 4, 8);
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 1 + static_cast<int>(uniform_index(rng, 9));
    auto inst = testing::random_instance(v, m, 0, rng);
    auto base = forward(inst, p, Mode::kEval, rng).logits;
    inst.features.resize(m + 1 + uniform_index(rng, 10), pad_token(v));
    CHECK(forward(inst, p, Mode::kEval, rng).logits == base);
  }
}

TEST_CASE("gradients match central differences") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2, 3}, 3, 21);
  Rng rng(5);
  auto inst = testing::random_instance(v, 7, 2, rng);
  std::vector<double> mask = {2, 0, 2, 2, 2, 0};
  auto gc = testing::gradient_check(inst, p, mask, 1e-5, 1e-9);
  CHECK(gc.checked > 1000);
  CHECK(gc.max_rel_error < 1e-4);
}

TEST_CASE("embedding gradients skip PAD and untouched rows") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2}, 1, 2);
  Rng rng(3);
  auto inst = testing::random_instance(v, 5, 1, rng);
  inst.features.resize(8, pad_token(v));
  auto c = forward(inst, p, Mode::kEval, rng);
  Gradients g = Gradients::zeros_like(p);
  backward(c, inst.label_id, p, g);
  for (int f = 0; f < kNumFeatures; ++f) {
    CHECK(g.embedding_rows[f].count(0) == 0);
    CHECK(g.embedding_rows[f].size() <= 2);
  }
}

TEST_CASE("gradient accumulation adds") {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2}, 2, 2);
  Rng rng(3);
  auto inst = testing::random_instance(v, 4, 1, rng);
  auto c = forward(inst, p, Mode::kEval, rng);
  Gradients once = Gradients::zeros_like(p), twice = once;
  backward(c, 1, p, once, 2.0);
  backward(c, 1, p, twice);
  backward(c, 1, p, twice);
  for (std::size_t i = 0; i < once.dense_weights.size(); ++i)
    CHECK(once.dense_weights[i] == doctest::Approx(twice.dense_weights[i]));
  Gradients sum = Gradients::zeros_like(p);
  sum.add(twice);
  CHECK(sum.dense_bias == twice.dense_bias);
  CHECK(sum.embedding_rows[0].size() == twice.embedding_rows[0].size());
  sum.clear();
  CHECK(sum.embedding_rows[0].empty());
}

TEST_CASE("invalid network configurations") {
  NetworkConfig c;
  c.filter_lengths = {};
  CHECK_THROWS(validate(c));
  c.filter_lengths = {0};
  CHECK_THROWS(validate(c));
  c.filter_lengths = {3};
  c.keep_prob = 0.0;
  CHECK_THROWS(validate(c));
  c.keep_prob = 0.5;
  c.filters_per_length = 0;
  CHECK_THROWS(validate(c));
}
