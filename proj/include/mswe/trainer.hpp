#ifndef MSWE_TRAINER_HPP
#define MSWE_TRAINER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mswe/corpus.hpp"
#include "mswe/embedding_model.hpp"
#include "mswe/lda.hpp"
#include "mswe/matrix.hpp"
#include "mswe/mixture.hpp"
#include "mswe/noise_table.hpp"

namespace mswe {

struct TrainingConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 10;
  double learning_rate = 0.01;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Variant variant = Variant::skipgram;
  // Frequent-word subsampling threshold; 0 disables it.
  double subsample_threshold = 0.0;
  // Test hook: every mixture weight is forced to zero.
  bool zero_mixture_weights = false;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Loss and gradient kernels, shared by float training and the double
// reference path used in gradient checks.

template <typename Real>
Real log_sigmoid(Real x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// -log sigma(positive . s) - sum_i log sigma(-negative_i . s); never negative.
template <typename Real>
Real negative_sampling_loss(std::span<const Real> s, std::span<const Real> positive,
                            const Matrix<Real>& negatives) {
  Real loss = -log_sigmoid(dot(positive, s));
  for (std::size_t i = 0; i < negatives.rows(); ++i) loss -= log_sigmoid(-dot(negatives.row(i), s));
  return loss;
}

/// Gradients of negative_sampling_loss with respect to s and every context row.
template <typename Real>
struct LossGradient {
  std::vector<Real> d_s;
  std::vector<Real> d_positive;
  Matrix<Real> d_negatives;
};

template <typename Real>
LossGradient<Real> negative_sampling_gradient(std::span<const Real> s, std::span<const Real> positive,
                                              const Matrix<Real>& negatives) {
  LossGradient<Real> g{std::vector<Real>(s.size()), std::vector<Real>(s.size()),
                       Matrix<Real>(negatives.rows(), s.size())};
  const Real cp = sigmoid(dot(positive, s)) - Real(1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    g.d_s[i] += cp * positive[i];
    g.d_positive[i] = cp * s[i];
  }
  for (std::size_t k = 0; k < negatives.rows(); ++k) {
    const auto n = negatives.row(k);
    const Real cn = sigmoid(dot(n, s));
    auto dn = g.d_negatives.row(k);
    for (std::size_t i = 0; i < s.size(); ++i) {
      g.d_s[i] += cn * n[i];
      dn[i] = cn * s[i];
    }
  }
  return g;
}

/// Scratch space reused across steps.
template <typename Real>
struct StepWorkspace {
  std::vector<Real> s;
  std::vector<Real> grad_s;
  std::vector<Real> coef;
  std::vector<std::span<Real>> negative_rows;
};

/// One gradient step on the composed objective. All gradients are taken at
/// the current point before any parameter moves, so duplicated negatives
/// accumulate. Returns the loss at that point.
template <typename Real>
Real negative_sampling_step(std::span<Real> target, Matrix<Real>& topic_vectors, const Composition& composition,
                            std::span<Real> positive, std::span<const std::span<Real>> negatives, Real lr,
                            StepWorkspace<Real>& ws) {
  const std::size_t dim = target.size();
  ws.s.resize(dim);
  ws.grad_s.assign(dim, Real(0));
  ws.coef.resize(negatives.size() + 1);
  compose_into<Real>(target, topic_vectors, composition, ws.s);
  const std::span<const Real> s(ws.s);

  const Real pos_score = dot<Real>(positive, s);
  Real loss = -log_sigmoid(pos_score);
  ws.coef[0] = sigmoid(pos_score) - Real(1);
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const Real score = dot<Real>(negatives[k], s);
    loss -= log_sigmoid(-score);
    ws.coef[k + 1] = sigmoid(score);
  }

  axpy<Real>(ws.coef[0], positive, ws.grad_s);
  for (std::size_t k = 0; k < negatives.size(); ++k) axpy<Real>(ws.coef[k + 1], negatives[k], ws.grad_s);

  axpy<Real>(-lr * ws.coef[0], s, positive);
  for (std::size_t k = 0; k < negatives.size(); ++k) axpy<Real>(-lr * ws.coef[k + 1], s, negatives[k]);

  const std::span<const Real> grad(ws.grad_s);
  axpy<Real>(-lr * static_cast<Real>(composition.target), grad, target);
  for (const auto& [t, coef] : composition.topics) {
    axpy<Real>(-lr * static_cast<Real>(coef), grad, topic_vectors.row(t));
  }
  return loss;
}

// ---------------------------------------------------------------------------

/// Training-time state shared by sgd_step calls.
struct StepContext {
  const NoiseTable* noise = nullptr;
  std::size_t negatives = 10;
};

/// Samples negatives (redrawing any that hit `context_id`, at most 100
/// attempts each, after which that negative is dropped) and applies one
/// step for the (target, context) pair. Returns the pair's loss.
float sgd_step(EmbeddingModel& model, const StepContext& ctx, WordId target_id, WordId context_id,
               const Composition& composition, float lr, std::mt19937_64& rng, StepWorkspace<float>& ws);

/// Convenience overload deriving the composition from model.variant.
float sgd_step(EmbeddingModel& model, const StepContext& ctx, WordId target_id, WordId context_id,
               const MixtureWeights& weights, float lr, std::mt19937_64& rng, StepWorkspace<float>& ws);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0;
  std::uint64_t pairs = 0;
};

struct TrainingResult {
  EmbeddingModel model;
  std::vector<EpochStats> epochs;
};

/// Random initial model: target and topic rows uniform in
/// [-0.5/dim, 0.5/dim], context rows zero. Topic rows come from their own
/// random stream so the target rows do not depend on the topic count.
EmbeddingModel initialize_model(std::size_t vocab_size, std::size_t topics, const TrainingConfig& config);

/// Document topic proportions for every document (fold-in inference).
std::vector<std::vector<double>> infer_corpus_topics(const TopicModel& topics, const EncodedCorpus& corpus,
                                                     unsigned threads);

/// Runs config.epochs passes of SGD. MSWE variants require `topics` built
/// over the same vocabulary.
TrainingResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TopicModel* topics,
                     const TrainingConfig& config,
                     const std::function<void(const EpochStats&)>& on_epoch = {});

/// Exact softmax negative log-likelihood of the corpus under the model,
/// summed over every (target, context) pair in the fixed window. Quadratic
/// in vocabulary size; meant for small reference checks.
double softmax_objective(const EncodedCorpus& corpus, const EmbeddingModel& model, const TopicModel* topics,
                         std::size_t window);

}  // namespace mswe

#endif  // MSWE_TRAINER_HPP
