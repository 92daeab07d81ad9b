#include <doctest.h>

#include "botdetect/error.hpp"
#include "botdetect/metrics.hpp"
#include "botdetect/neuralnet.hpp"
#include "support/fixtures.hpp"

using namespace botdetect;
using namespace botdetect::testing;
using nn::LstmVariant;

namespace {

double naive_relu(double x) { return x > 0 ? x : 0.0; }

/// Layer-by-layer scalar recomputation of the main and auxiliary scores.
std::pair<double, double> naive_forward(const ContextualLstmModel& model, const TweetExample& ex) {
  const auto& p = model.params();
  const auto steps = naive_lstm(p.cell, ex.sequence.matrix, ex.sequence.true_length);
  std::vector<double> h(static_cast<std::size_t>(model.architecture().hidden_dim), 0.0);
  if (!steps.empty()) h = steps.back();
  std::vector<double> input = h;
  double aux = 0.0;
  if (model.architecture().contextual()) {
    for (Index i = 0; i < 6; ++i) {
      input.push_back((ex.metadata(i) - model.metadata_mean()(i)) / model.metadata_scale()(i));
    }
    aux = naive_sigmoid(naive_dense(p.aux_head.weight, p.aux_head.bias, h)[0]);
  }
  auto a1 = naive_dense(p.dense1.weight, p.dense1.bias, input);
  for (auto& v : a1) v = naive_relu(v);
  auto a2 = naive_dense(p.dense2.weight, p.dense2.bias, a1);
  for (auto& v : a2) v = naive_relu(v);
  const double main = naive_sigmoid(naive_dense(p.main_head.weight, p.main_head.bias, a2)[0]);
  return {main, model.architecture().contextual() ? aux : main};
}

double naive_bce(double p, double y) { return -(y * std::log(p) + (1 - y) * std::log(1 - p)); }

}  // namespace

TEST_CASE("lstm recurrence matches the scalar reference") {
  Rng rng(1);
  nn::LstmCell<double> cell(7, 32);
  Rng init(2);
  cell.init(init);
  cell.bias = random_matrix(128, 1, rng, 0.2).col(0);
  const RowMatX seq = random_matrix(5, 7, rng);
  const auto trace = nn::lstm_forward(cell, seq, 5);
  const auto ref = naive_lstm(cell, seq, 5);
  REQUIRE(trace.steps() == 5);
  CHECK(trace.hidden.col(0).isZero());
  for (Index t = 0; t < 5; ++t) {
    for (Index u = 0; u < 32; ++u) {
      CHECK(std::abs(trace.hidden(u, t + 1) - ref[static_cast<std::size_t>(t)][static_cast<std::size_t>(u)]) < 1e-12);
    }
  }
  // Hidden outputs are tanh-bounded.
  CHECK(trace.hidden.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("lstm edge cases") {
  nn::LstmCell<double> cell(4, 32);
  Rng rng(3);
  const RowMatX seq = random_matrix(6, 4, rng);
  CHECK(nn::lstm_forward(cell, seq, 6).final_hidden().isZero());
  cell.init(rng);
  const auto empty = nn::lstm_forward(cell, seq, 0);
  CHECK(empty.steps() == 0);
  CHECK(empty.final_hidden().isZero());
  CHECK(empty.final_hidden().size() == 32);
  CHECK_THROWS_AS(nn::lstm_forward(cell, random_matrix(3, 5, rng), 3), Error);
}

TEST_CASE("padding rows beyond the true length are ignored") {
  Rng rng(4);
  const auto model = random_model(small_architecture(LstmVariant::Contextual, 6), 5);
  auto ex = random_example(6, 3, rng, Label::Bot);
  const double before = predict(model, ex);
  ex.sequence.matrix.bottomRows(5) = random_matrix(5, 6, rng);
  CHECK(predict(model, ex) == before);
}

TEST_CASE("zero model scores one half") {
  Rng rng(5);
  for (auto variant : {LstmVariant::Contextual, LstmVariant::TweetOnly}) {
    ContextualLstmModel model(small_architecture(variant, 5));
    const auto fp = forward(model, random_example(5, 4, rng, Label::Human));
    CHECK(fp.main_score == 0.5);
    CHECK(fp.aux_score == 0.5);
  }
}

TEST_CASE("metadata is ignored when its first-layer weights are zero") {
  Rng rng(6);
  auto model = random_model(small_architecture(LstmVariant::Contextual, 5), 7);
  model.params().dense1.weight.rightCols(6).setZero();
  auto ex = random_example(5, 4, rng, Label::Bot);
  const double a = predict(model, ex);
  ex.metadata.setZero();
  CHECK(predict(model, ex) == a);
  ex.metadata.setConstant(1e3);
  CHECK(predict(model, ex) == a);
  ex.metadata.resize(5);
  CHECK_THROWS_AS(predict(model, ex), Error);
}

TEST_CASE("forward pass matches a layer-by-layer reference") {
  Rng rng(8);
  for (auto variant : {LstmVariant::Contextual, LstmVariant::TweetOnly}) {
    const auto model = random_model(small_architecture(variant, 9), 9);
    for (int i = 0; i < 5; ++i) {
      const auto ex = random_example(9, 1 + i, rng, Label::Human);
      const auto fp = forward(model, ex);
      const auto [main, aux] = naive_forward(model, ex);
      CHECK(std::abs(fp.main_score - main) < 1e-12);
      CHECK(std::abs(fp.aux_score - aux) < 1e-12);
      CHECK(fp.main_score > 0.0);
      CHECK(fp.main_score < 1.0);
    }
  }
}

TEST_CASE("predictions do not depend on evaluation order") {
  Rng rng(10);
  const auto model = random_model(small_architecture(LstmVariant::Contextual, 5), 11);
  const auto a = random_example(5, 6, rng, Label::Bot);
  const auto b = random_example(5, 2, rng, Label::Human);
  const std::vector<TweetExample> ab{a, b}, ba{b, a};
  const auto p = predict(model, ab);
  const auto q = predict(model, ba);
  CHECK(p[0] == q[1]);
  CHECK(p[1] == q[0]);
}

TEST_CASE("loss weighting") {
  const nn::LossWeights w;
  // bce(exp(-1), 1) = 1 and bce(exp(-0.5), 1) = 0.5.
  const auto parts = nn::loss(std::exp(-1.0), std::exp(-0.5), 1.0, w);
  CHECK(parts.main == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parts.aux == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(parts.total == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(nn::loss(1.0, 1.0, 1.0, w).total <= 1e-6);
  CHECK(nn::loss(0.0, 0.0, 0.0, w).total <= 1e-6);
  // Clamped, so never infinite.
  CHECK(std::isfinite(nn::loss(0.0, 1.0, 1.0, w).total));

  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const double pm = rng.uniform(0.01, 0.99), pa = rng.uniform(0.01, 0.99);
    const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const auto r = nn::loss(pm, pa, y, w);
    CHECK(r.main == doctest::Approx(naive_bce(pm, y)).epsilon(1e-12));
    CHECK(r.aux == doctest::Approx(naive_bce(pa, y)).epsilon(1e-12));
    CHECK(r.total == doctest::Approx(0.8 * naive_bce(pm, y) + 0.2 * naive_bce(pa, y)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(13);
  for (auto variant : {LstmVariant::Contextual, LstmVariant::TweetOnly}) {
    const auto model = random_model(small_architecture(variant, 6), 14);
    const std::vector<TweetExample> batch{random_example(6, 5, rng, Label::Bot),
                                          random_example(6, 3, rng, Label::Human),
                                          random_example(6, 1, rng, Label::Bot)};
    CHECK(lstm_gradient_error(model, batch) < 1e-4);
  }
}

TEST_CASE("checkpoint round-trip is exact") {
  Rng rng(15);
  for (auto variant : {LstmVariant::Contextual, LstmVariant::TweetOnly}) {
    const auto model = random_model(small_architecture(variant, 5), 16);
    StructuredText st;
    write_lstm(model, st);
    const auto back = read_lstm(StructuredText::parse(st.to_string()));
    CHECK(back.architecture().contextual() == model.architecture().contextual());
    CHECK(back.architecture().embedding_dim == 5);
    CHECK(back.loss_weights().main == model.loss_weights().main);
    for (int i = 0; i < 5; ++i) {
      const auto ex = random_example(5, 1 + i, rng, Label::Human);
      CHECK(predict(back, ex) == predict(model, ex));
    }
    StructuredText again;
    write_lstm(back, again);
    CHECK(again.to_string() == st.to_string());
  }
  StructuredText bad;
  bad.set("model", "random_forest");
  CHECK_THROWS_AS(read_lstm(bad), Error);
}

TEST_CASE("training needs both classes") {
  Rng rng(17);
  const std::vector<TweetExample> one{random_example(4, 2, rng, Label::Bot), random_example(4, 3, rng, Label::Bot)};
  try {
    train_lstm(small_architecture(LstmVariant::Contextual, 4), {}, one);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateData);
  }
  CHECK_THROWS_AS(train_lstm(small_architecture(LstmVariant::Contextual, 4), {}, {}), Error);
}

TEST_CASE("training trace records every step and the weighted total") {
  const auto data = synthetic_tweets(0.6, 8, 5, 3, 10);
  LstmTrainConfig config;
  config.epochs = 3;
  config.batch_size = 16;
  const auto result = train_lstm(small_architecture(LstmVariant::Contextual, 10), config, data.train, data.test);
  const std::size_t per_epoch = (data.train.size() + 15) / 16;
  CHECK(result.trace.steps.size() == 3 * per_epoch);
  CHECK(result.trace.epochs.size() == 3);
  for (const auto& s : result.trace.steps) CHECK(std::abs(s.total - (0.8 * s.main + 0.2 * s.aux)) <= 1e-12);
  for (const auto& e : result.trace.epochs) {
    CHECK(std::abs(e.total - (0.8 * e.main + 0.2 * e.aux)) <= 1e-12);
    CHECK(e.validation_auc.has_value());
  }
  const auto csv = result.trace.to_csv();
  CHECK(csv.rfind("# optimizer", 0) == 0);
  CHECK(csv.find("adam(") != std::string::npos);

  const auto again = train_lstm(small_architecture(LstmVariant::Contextual, 10), config, data.train, data.test);
  CHECK(again.trace.to_csv() == csv);
  CHECK(predict(again.model, data.test) == predict(result.model, data.test));
}

TEST_CASE("separable tweets are learned within 20 epochs") {
  const auto data = synthetic_tweets(1.0, 20, 10, 21);
  LstmTrainConfig config;
  config.epochs = 20;
  for (auto variant : {LstmVariant::Contextual, LstmVariant::TweetOnly}) {
    const auto result = train_lstm(small_architecture(variant, 25), config, data.train, data.test);
    const auto scores = predict(result.model, data.test);
    CHECK(auc(scores, labels_of(data.test)) >= 0.99);
    CHECK(result.trace.epochs.back().validation_auc.value() >= 0.99);
  }
}

TEST_CASE("indistinguishable tweets stay at chance") {
  const auto data = synthetic_tweets(0.0, 50, 10, 22, 25, 0.5);
  LstmTrainConfig config;
  config.epochs = 10;
  const auto result = train_lstm(small_architecture(LstmVariant::Contextual, 25), config, data.train, data.test);
  const double a = auc(predict(result.model, data.test), labels_of(data.test));
  CHECK(a >= 0.40);
  CHECK(a <= 0.60);
}

TEST_CASE("zero metadata gives the contextual model no advantage") {
  auto data = synthetic_tweets(0.5, 10, 10, 23, 10);
  for (auto& e : data.train) e.metadata.setZero();
  LstmTrainConfig config;
  config.epochs = 5;
  auto train_loss = [&](LstmVariant variant) {
    const auto result = train_lstm(small_architecture(variant, 10), config, data.train);
    double total = 0.0;
    for (const auto& e : data.train) total += nn::bce(predict(result.model, e), label_value(e.label));
    return total / static_cast<double>(data.train.size());
  };
  const double contextual = train_loss(LstmVariant::Contextual);
  const double tweet_only = train_loss(LstmVariant::TweetOnly);
  CHECK(contextual >= 0.95 * tweet_only);
}
