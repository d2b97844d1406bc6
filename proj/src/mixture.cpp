#include "mswe/mixture.hpp"

namespace mswe {

std::vector<double> context_vector(std::span<const WordId> context_words, const EmbeddingModel& model,
                                   const TopicModel& topics) {
  if (context_words.empty()) throw std::invalid_argument("empty context");
  if (model.topics() != topics.topics()) {
    throw std::invalid_argument("embedding and topic model disagree on topic count");
  }
  const std::size_t dim = model.dim();
  std::vector<double> out(2 * dim, 0.0);
  for (WordId w : context_words) {
    const auto v = model.target.row(w);
    for (std::size_t i = 0; i < dim; ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(context_words.size());
  for (std::size_t i = 0; i < dim; ++i) out[i] *= inv;

  const auto theta = infer_doc_topics(topics, context_words).theta;
  for (std::size_t t = 0; t < theta.size(); ++t) {
    const auto v = model.topic.row(t);
    for (std::size_t i = 0; i < dim; ++i) out[dim + i] += theta[t] * v[i];
  }
  return out;
}

}  // namespace mswe
