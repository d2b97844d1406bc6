#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mswe/trainer.hpp"
#include "gradient_oracle.hpp"
#include "support.hpp"

namespace mswe {
namespace {

// ---------------------------------------------------------------------------
// Noise distribution

TEST(NoiseTable, ThreeQuarterPowerProbabilities) {
  const std::vector<std::uint64_t> counts{81, 16};
  const NoiseTable table(counts);
  EXPECT_NEAR(table.probability(0), 27.0 / 35.0, 1e-15);
  EXPECT_NEAR(table.probability(1), 8.0 / 35.0, 1e-15);
}

TEST(NoiseTable, SingleWordAlwaysDrawn) {
  const std::vector<std::uint64_t> counts{5};
  const NoiseTable table(counts);
  EXPECT_EQ(table.probability(0), 1.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(table(rng), 0u);
  EXPECT_EQ(table.sample(~std::uint64_t{0}), 0u);
}

TEST(NoiseTable, ZeroCountIsNeverDrawn) {
  const std::vector<std::uint64_t> counts{3, 0, 7, 1};
  const NoiseTable table(counts);
  EXPECT_EQ(table.probability(1), 0.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100000; ++i) EXPECT_NE(table(rng), 1u);
  const std::vector<std::uint64_t> none{0, 0};
  EXPECT_THROW(NoiseTable{none}, std::invalid_argument);
}

TEST(NoiseTable, EmpiricalFrequenciesMatch) {
  std::vector<std::uint64_t> counts(100);
  std::mt19937_64 gen(3);
  for (auto& c : counts) c = 1 + gen() % 5000;
  const NoiseTable table(counts);
  double total = 0;
  for (auto c : counts) total += std::pow(static_cast<double>(c), 0.75);
  std::vector<double> hits(100, 0.0);
  std::mt19937_64 rng(4);
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) hits[table(rng)] += 1.0;
  double l1 = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double expected = std::pow(static_cast<double>(counts[i]), 0.75) / total;
    EXPECT_NEAR(table.probability(static_cast<WordId>(i)), expected, 1e-12);
    l1 += std::abs(hits[i] / draws - expected);
  }
  EXPECT_LT(l1, 0.01);
}

// ---------------------------------------------------------------------------
// Loss

using Vec = std::vector<double>;

TEST(Loss, ZeroScoresGiveThreeLogTwo) {
  const Vec s{0.0, 0.0, 0.0};
  const Vec pos{1.0, -2.0, 0.5};
  const Matrix<double> negs(2, 3, 0.7);
  EXPECT_NEAR(negative_sampling_loss<double>(s, pos, negs), 3.0 * std::log(2.0), 1e-15);
}

TEST(Loss, SaturatesToZero) {
  const Vec s{1.0, 0.0};
  const Vec pos{30.0, 0.0};
  Matrix<double> negs(3, 2, 0.0);
  for (std::size_t k = 0; k < 3; ++k) negs(k, 0) = -30.0;
  const double loss = negative_sampling_loss<double>(s, pos, negs);
  EXPECT_LT(loss, 1e-9);
  EXPECT_GE(loss, 0.0);
  // far on the wrong side the loss grows linearly without overflow
  const Vec flipped{-800.0, 0.0};
  EXPECT_TRUE(std::isfinite(negative_sampling_loss<double>(flipped, pos, negs)));
}

TEST(Loss, MatchesDirectFormulaAndIsNonNegative) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    Vec s(6), pos(6);
    Matrix<double> negs(4, 6);
    for (auto& x : s) x = normal(rng);
    for (auto& x : pos) x = normal(rng);
    for (auto& x : negs.data()) x = normal(rng);
    double direct = 0;
    double sp = 0;
    for (std::size_t i = 0; i < 6; ++i) sp += s[i] * pos[i];
    direct -= std::log(1.0 / (1.0 + std::exp(-sp)));
    for (std::size_t k = 0; k < 4; ++k) {
      double sn = 0;
      for (std::size_t i = 0; i < 6; ++i) sn += s[i] * negs(k, i);
      direct -= std::log(1.0 / (1.0 + std::exp(sn)));
    }
    const double loss = negative_sampling_loss<double>(s, pos, negs);
    EXPECT_NEAR(loss, direct, 1e-12 * std::max(1.0, direct));
    EXPECT_GE(loss, 0.0);
  }
}

TEST(Loss, PositiveCoefficientAtZeroScoreIsMinusHalf) {
  const Vec s{0.4, -0.2};
  const Vec pos{0.2, 0.4};  // orthogonal to s
  const Matrix<double> negs(0, 2);
  const auto g = negative_sampling_gradient<double>(s, pos, negs);
  EXPECT_DOUBLE_EQ(g.d_positive[0], -0.5 * 0.4);
  EXPECT_DOUBLE_EQ(g.d_positive[1], -0.5 * -0.2);
  EXPECT_DOUBLE_EQ(g.d_s[0], -0.5 * 0.2);
  EXPECT_DOUBLE_EQ(g.d_s[1], -0.5 * 0.4);
}

// ---------------------------------------------------------------------------
// Gradient check

using testing::gradient_check_error;
using testing::random_instance;

class GradientCheck : public ::testing::TestWithParam<Variant> {};

TEST_P(GradientCheck, StepMatchesFiniteDifferences) {
  std::mt19937_64 rng(31 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 120; ++trial) {
    const auto in = random_instance(rng, GetParam());
    EXPECT_LT(gradient_check_error(in), 1e-4) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, GradientCheck,
                         ::testing::Values(Variant::skipgram, Variant::mswe1, Variant::mswe2),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(GradientCheck, SkipgramStepMatchesTextbookUpdate) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = random_instance(rng, Variant::skipgram);
    // independent reference: classic word2vec update order
    Vec v = in.target;
    Matrix<double> ctx = in.context;
    Vec neu(v.size(), 0.0);
    const double lr = 0.025;
    std::vector<std::pair<std::size_t, double>> labels{{0, 1.0}};
    for (auto r : in.negative_rows) labels.emplace_back(r, 0.0);
    std::vector<double> g(labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
      double f = 0;
      for (std::size_t i = 0; i < v.size(); ++i) f += v[i] * in.context(labels[j].first, i);
      g[j] = (labels[j].second - 1.0 / (1.0 + std::exp(-f))) * lr;
    }
    for (std::size_t j = 0; j < labels.size(); ++j) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        neu[i] += g[j] * in.context(labels[j].first, i);
        ctx(labels[j].first, i) += g[j] * v[i];
      }
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += neu[i];

    std::vector<std::span<double>> negs;
    for (auto r : in.negative_rows) negs.push_back(in.context.row(r));
    StepWorkspace<double> ws;
    const auto topics_before = in.topics;
    negative_sampling_step<double>(in.target, in.topics, Composition{}, in.context.row(0), negs, lr, ws);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(in.target[i], v[i], 1e-14);
    for (std::size_t i = 0; i < ctx.data().size(); ++i) EXPECT_NEAR(in.context.data()[i], ctx.data()[i], 1e-14);
    EXPECT_TRUE(in.topics == topics_before);
  }
}

// ---------------------------------------------------------------------------
// sgd_step with zero weights

TEST(SgdStep, ZeroWeightsReproduceSkipgramBitExactly) {
  TrainingConfig config;
  config.dim = 8;
  config.variant = Variant::mswe2;
  auto mixed = initialize_model(20, 3, config);
  config.variant = Variant::skipgram;
  auto plain = initialize_model(20, 0, config);
  ASSERT_TRUE(mixed.target == plain.target);
  std::vector<std::uint64_t> counts(20);
  std::iota(counts.begin(), counts.end(), 1);
  const NoiseTable noise(counts);
  const StepContext ctx{&noise, 5};
  std::mt19937_64 r1(9), r2(9);
  StepWorkspace<float> w1, w2;
  const auto topics_before = mixed.topic;
  const auto zero = MixtureWeights::from({0.0, 0.0, 0.0});
  for (int i = 0; i < 500; ++i) {
    const auto target = static_cast<WordId>(i % 20);
    const auto context = static_cast<WordId>((i * 7 + 3) % 20);
    const float l1 = sgd_step(mixed, ctx, target, context, zero, 0.05f, r1, w1);
    const float l2 = sgd_step(plain, ctx, target, context, MixtureWeights{}, 0.05f, r2, w2);
    ASSERT_EQ(l1, l2);
  }
  EXPECT_TRUE(mixed.target == plain.target);
  EXPECT_TRUE(mixed.context == plain.context);
  EXPECT_TRUE(mixed.topic == topics_before);
}

TEST(SgdStep, NegativesNeverEqualPositive) {
  // the positive word carries almost all noise mass, so most draws collide
  const std::vector<std::uint64_t> counts{1000, 1, 1};
  const NoiseTable noise(counts);
  TrainingConfig config;
  config.dim = 4;
  auto model = initialize_model(3, 0, config);
  for (auto& x : model.context.data()) x = 0.1f;
  const auto neg_before = model.context.row(1)[0] + model.context.row(2)[0];
  std::mt19937_64 rng(3);
  StepWorkspace<float> ws;
  sgd_step(model, StepContext{&noise, 10}, 1, 0, Composition{}, 0.1f, rng, ws);
  EXPECT_GE(ws.negative_rows.size(), 1u);
  EXPECT_LE(ws.negative_rows.size(), 10u);
  for (const auto& row : ws.negative_rows) EXPECT_NE(row.data(), model.context.row(0).data());
  EXPECT_NE(model.context.row(1)[0] + model.context.row(2)[0], neg_before);
}

// ---------------------------------------------------------------------------
// Full training

struct TinySetup {
  Vocabulary vocab;
  EncodedCorpus corpus;
  TopicModel topics;
};

const TinySetup& tiny() {
  static const TinySetup setup = [] {
    const auto docs = testing::tiny_text_corpus(1000, 50, 50, 77);
    TinySetup s;
    s.vocab = build_vocabulary(docs, 1000);
    s.corpus = encode_corpus(docs, s.vocab);
    LdaConfig lda;
    lda.batch_size = 5;
    lda.passes = 5;
    s.topics = train_online_lda(s.corpus, s.vocab.size(), 4, lda);
    return s;
  }();
  return setup;
}

TrainingConfig tiny_config(Variant variant) {
  TrainingConfig c;
  c.dim = 16;
  c.epochs = 5;
  c.seed = 13;
  c.negatives = 5;
  c.learning_rate = 0.05;
  c.variant = variant;
  return c;
}

bool all_finite(const Matrix<float>& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](float x) { return std::isfinite(x); });
}

class TinyTraining : public ::testing::TestWithParam<Variant> {};

TEST_P(TinyTraining, LossDecreasesAndStaysFinite) {
  const auto& s = tiny();
  const auto result = train(s.corpus, s.vocab, &s.topics, tiny_config(GetParam()));
  ASSERT_EQ(result.epochs.size(), 5u);
  EXPECT_LT(result.epochs.back().mean_loss, result.epochs.front().mean_loss);
  EXPECT_TRUE(all_finite(result.model.target));
  EXPECT_TRUE(all_finite(result.model.context));
  EXPECT_TRUE(all_finite(result.model.topic));
  EXPECT_EQ(result.model.variant, GetParam());
}

TEST_P(TinyTraining, SingleThreadIsDeterministic) {
  const auto& s = tiny();
  const auto a = train(s.corpus, s.vocab, &s.topics, tiny_config(GetParam()));
  const auto b = train(s.corpus, s.vocab, &s.topics, tiny_config(GetParam()));
  EXPECT_TRUE(a.model == b.model);
}

TEST_P(TinyTraining, SoftmaxObjectiveImproves) {
  const auto& s = tiny();
  const auto config = tiny_config(GetParam());
  const TopicModel* topics = GetParam() == Variant::skipgram ? nullptr : &s.topics;
  const auto before = initialize_model(s.vocab.size(), topics ? topics->topics() : 0, config);
  const auto after = train(s.corpus, s.vocab, topics, config).model;
  EXPECT_LT(softmax_objective(s.corpus, after, topics, config.window),
            softmax_objective(s.corpus, before, topics, config.window));
}

TEST_P(TinyTraining, MultiThreadedRunStaysFinite) {
  const auto& s = tiny();
  auto config = tiny_config(GetParam());
  config.threads = 3;
  const auto result = train(s.corpus, s.vocab, &s.topics, config);
  EXPECT_TRUE(all_finite(result.model.target));
  EXPECT_TRUE(all_finite(result.model.topic));
  EXPECT_GT(result.epochs.front().pairs, 0u);
}

INSTANTIATE_TEST_SUITE_P(Variants, TinyTraining,
                         ::testing::Values(Variant::skipgram, Variant::mswe1, Variant::mswe2),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Training, ZeroWeightHookReducesToSkipgram) {
  const auto& s = tiny();
  auto config = tiny_config(Variant::mswe2);
  config.zero_mixture_weights = true;
  const auto mixed = train(s.corpus, s.vocab, &s.topics, config);
  const auto plain = train(s.corpus, s.vocab, nullptr, tiny_config(Variant::skipgram));
  EXPECT_TRUE(mixed.model.target == plain.model.target);
  EXPECT_TRUE(mixed.model.context == plain.model.context);
  EXPECT_TRUE(mixed.model.topic == initialize_model(s.vocab.size(), 4, config).topic);
  for (std::size_t e = 0; e < 5; ++e) EXPECT_EQ(mixed.epochs[e].mean_loss, plain.epochs[e].mean_loss);
}

TEST(Training, MixedVariantsMoveTopicVectors) {
  const auto& s = tiny();
  for (auto v : {Variant::mswe1, Variant::mswe2}) {
    const auto config = tiny_config(v);
    const auto trained = train(s.corpus, s.vocab, &s.topics, config).model;
    EXPECT_FALSE(trained.topic == initialize_model(s.vocab.size(), 4, config).topic);
  }
}

TEST(Training, ShortDocumentsProduceNoUpdates) {
  const auto& s = tiny();
  EncodedCorpus corpus;
  corpus.documents = {{}, {3}, {}, {7}};
  const auto config = tiny_config(Variant::mswe2);
  const auto result = train(corpus, s.vocab, &s.topics, config);
  EXPECT_TRUE(result.model == initialize_model(s.vocab.size(), 4, config));
  for (const auto& e : result.epochs) EXPECT_EQ(e.pairs, 0u);
}

TEST(Training, OnlyTouchedRowsChange) {
  // "ghost" is in the vocabulary (so it can be a negative) but never in the
  // corpus; topic 1 puts all its mass on ghost, so its weight is zero for
  // every corpus token. UNK has count zero and is never used.
  const Vocabulary vocab({"a", "b", "c", "ghost"}, {4, 4, 4, 50}, 0);
  EncodedCorpus corpus;
  corpus.documents = {{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2}};
  Matrix<double> phi(2, 5, 0.0);
  phi(0, 0) = phi(0, 1) = phi(0, 2) = 0.25;
  phi(0, 3) = 0.25;
  phi(1, 3) = 1.0;
  const TopicModel topics(phi, 0.5, 0.5);
  auto config = tiny_config(Variant::mswe2);
  config.epochs = 2;
  const auto init = initialize_model(5, 2, config);
  const auto trained = train(corpus, vocab, &topics, config).model;
  const auto same_row = [](const Matrix<float>& a, const Matrix<float>& b, std::size_t r) {
    return std::equal(a.row(r).begin(), a.row(r).end(), b.row(r).begin());
  };
  EXPECT_TRUE(same_row(trained.target, init.target, 3));   // ghost target
  EXPECT_FALSE(same_row(trained.context, init.context, 3));  // ghost as negative
  EXPECT_TRUE(same_row(trained.target, init.target, 4));   // UNK
  EXPECT_TRUE(same_row(trained.context, init.context, 4));
  EXPECT_TRUE(same_row(trained.topic, init.topic, 1));
  EXPECT_FALSE(same_row(trained.topic, init.topic, 0));
  for (std::size_t w = 0; w < 3; ++w) EXPECT_FALSE(same_row(trained.target, init.target, w));
}

TEST(Training, Errors) {
  const auto& s = tiny();
  EXPECT_THROW(train(s.corpus, s.vocab, nullptr, tiny_config(Variant::mswe1)), std::invalid_argument);
  const TopicModel small(Matrix<double>(2, 3, 1.0 / 3.0), 0.5, 0.5);
  EXPECT_THROW(train(s.corpus, s.vocab, &small, tiny_config(Variant::mswe2)), std::invalid_argument);
  auto bad = tiny_config(Variant::skipgram);
  bad.dim = 0;
  EXPECT_THROW(train(s.corpus, s.vocab, nullptr, bad), std::invalid_argument);
  bad = tiny_config(Variant::skipgram);
  bad.learning_rate = 0;
  EXPECT_THROW(train(s.corpus, s.vocab, nullptr, bad), std::invalid_argument);
}

TEST(Training, SubsamplingKeepsRareWordsAndRuns) {
  const auto& s = tiny();
  auto config = tiny_config(Variant::skipgram);
  config.subsample_threshold = 1e-2;
  const auto sub = train(s.corpus, s.vocab, nullptr, config);
  const auto full = train(s.corpus, s.vocab, nullptr, tiny_config(Variant::skipgram));
  EXPECT_LT(sub.epochs.front().pairs, full.epochs.front().pairs);
  EXPECT_TRUE(all_finite(sub.model.target));
}

TEST(Initialization, RangesAndZeroContext) {
  TrainingConfig config;
  config.dim = 10;
  const auto m = initialize_model(30, 4, config);
  for (float x : m.target.data()) EXPECT_LE(std::abs(x), 0.05f);
  for (float x : m.topic.data()) EXPECT_LE(std::abs(x), 0.05f);
  for (float x : m.context.data()) EXPECT_EQ(x, 0.0f);
  // target rows do not depend on the topic count
  EXPECT_TRUE(initialize_model(30, 0, config).target == m.target);
}

}  // namespace
}  // namespace mswe
