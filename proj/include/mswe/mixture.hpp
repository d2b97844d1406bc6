#ifndef MSWE_MIXTURE_HPP
#define MSWE_MIXTURE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mswe/corpus.hpp"
#include "mswe/embedding_model.hpp"
#include "mswe/lda.hpp"
#include "mswe/matrix.hpp"

namespace mswe {

/// lambda = Pr(w|t) * Pr(t|d).
inline double mixture_weight(double p_w_given_t, double p_t_given_d) {
  const auto valid = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid(p_w_given_t) || !valid(p_t_given_d)) throw std::invalid_argument("invalid probability");
  return p_w_given_t * p_t_given_d;
}

/// Per-occurrence topic weights. argmax_topic is the lowest index holding
/// the maximum.
struct MixtureWeights {
  std::vector<double> lambda;
  std::size_t argmax_topic = 0;

  static MixtureWeights from(std::vector<double> lambda) {
    MixtureWeights w{std::move(lambda), 0};
    for (std::size_t t = 1; t < w.lambda.size(); ++t) {
      if (w.lambda[t] > w.lambda[w.argmax_topic]) w.argmax_topic = t;
    }
    return w;
  }
};

/// Weights of word `w` in a document with topic proportions `theta`.
inline MixtureWeights token_mixture_weights(const TopicModel& topics, WordId w,
                                            std::span<const double> theta) {
  std::vector<double> lambda(topics.topics());
  for (std::size_t t = 0; t < lambda.size(); ++t) lambda[t] = mixture_weight(topics.prob(t, w), theta[t]);
  return MixtureWeights::from(std::move(lambda));
}

/// The composed vector written as a convex combination
///   s = target * v_w + sum_k coef_k * v_{topic_k}.
/// These are also the Jacobian factors ds/dv_w and ds/dv_t.
struct Composition {
  double target = 1.0;
  std::vector<std::pair<std::size_t, double>> topics;
};

/// MSWE-1: only the highest-weight topic contributes.
inline Composition mswe1_composition(const MixtureWeights& w) {
  Composition c;
  if (w.lambda.empty()) return c;
  const double lam = w.lambda[w.argmax_topic];
  c.target = 1.0 / (1.0 + lam);
  if (lam != 0.0) c.topics.emplace_back(w.argmax_topic, lam / (1.0 + lam));
  return c;
}

/// MSWE-2: every topic contributes in proportion to its weight.
inline Composition mswe2_composition(const MixtureWeights& w) {
  Composition c;
  double total = 0;
  for (double lam : w.lambda) total += lam;
  c.target = 1.0 / (1.0 + total);
  for (std::size_t t = 0; t < w.lambda.size(); ++t) {
    if (w.lambda[t] != 0.0) c.topics.emplace_back(t, w.lambda[t] / (1.0 + total));
  }
  return c;
}

inline Composition composition_for(Variant variant, const MixtureWeights& w) {
  switch (variant) {
    case Variant::skipgram: return Composition{};
    case Variant::mswe1: return mswe1_composition(w);
    case Variant::mswe2: return mswe2_composition(w);
  }
  return Composition{};
}

/// Writes the composed vector into `out`. A composition with no topic terms
/// and unit target coefficient copies v_w exactly.
template <typename Real>
void compose_into(std::span<const Real> v_w, const Matrix<Real>& topic_vectors, const Composition& c,
                  std::span<Real> out) {
  const Real a = static_cast<Real>(c.target);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * v_w[i];
  for (const auto& [t, coef] : c.topics) axpy(static_cast<Real>(coef), topic_vectors.row(t), out);
}

template <typename Real>
std::vector<Real> compose(std::span<const Real> v_w, const Matrix<Real>& topic_vectors,
                          const MixtureWeights& weights, const Composition& c) {
  if (!topic_vectors.empty() && topic_vectors.cols() != v_w.size()) {
    throw std::invalid_argument("dimension mismatch between word and topic vectors");
  }
  if (weights.lambda.size() != topic_vectors.rows()) {
    throw std::invalid_argument("dimension mismatch between weights and topic vectors");
  }
  std::vector<Real> s(v_w.size());
  compose_into<Real>(v_w, topic_vectors, c, s);
  return s;
}

/// s = (v_w + lambda_t' v_t') / (1 + lambda_t'), t' = argmax lambda.
template <typename Real>
std::vector<Real> compose_mswe1(std::span<const Real> v_w, const Matrix<Real>& topic_vectors,
                                const MixtureWeights& weights) {
  return compose(v_w, topic_vectors, weights, mswe1_composition(weights));
}

/// s = (v_w + sum_t lambda_t v_t) / (1 + sum_t lambda_t).
template <typename Real>
std::vector<Real> compose_mswe2(std::span<const Real> v_w, const Matrix<Real>& topic_vectors,
                                const MixtureWeights& weights) {
  return compose(v_w, topic_vectors, weights, mswe2_composition(weights));
}

/// v_w concatenated with Pr(w|t) * v_t.
template <typename Real>
std::vector<double> sense_vector(std::span<const Real> v_w, std::span<const Real> v_t, double p_w_given_t) {
  std::vector<double> out;
  out.reserve(v_w.size() + v_t.size());
  for (Real x : v_w) out.push_back(static_cast<double>(x));
  for (Real x : v_t) out.push_back(p_w_given_t * static_cast<double>(x));
  return out;
}

/// Mean target vector of the context words concatenated with the
/// theta-weighted sum of topic vectors, theta folded in from the context.
/// Throws std::invalid_argument("empty context") on an empty context.
std::vector<double> context_vector(std::span<const WordId> context_words, const EmbeddingModel& model,
                                   const TopicModel& topics);

}  // namespace mswe

#endif  // MSWE_MIXTURE_HPP
