#ifndef MSWE_LDA_HPP
#define MSWE_LDA_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mswe/corpus.hpp"
#include "mswe/matrix.hpp"

namespace mswe {

/// Topic-word distributions plus the symmetric Dirichlet priors they were
/// trained with. Row t of phi is Pr(w | t).
class TopicModel {
public:
  TopicModel() = default;
  /// Validates shape, priors and row-stochasticity (|row sum - 1| <= 1e-9).
  TopicModel(Matrix<double> phi, double alpha, double eta);

  std::size_t topics() const { return phi_.rows(); }
  std::size_t vocab_size() const { return phi_.cols(); }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  const Matrix<double>& phi() const { return phi_; }
  double prob(std::size_t topic, WordId word) const { return phi_(topic, word); }

  bool operator==(const TopicModel&) const = default;

private:
  Matrix<double> phi_;
  double alpha_ = 0;
  double eta_ = 0;
};

/// Pr(t | d) for one document.
struct DocTopics {
  std::vector<double> theta;
};

struct LdaConfig {
  std::size_t batch_size = 2048;
  double tau0 = 1.0;
  double kappa = 0.5;
  std::size_t passes = 1;
  // Per-document variational iterations during training.
  std::size_t e_step_iterations = 50;
  double e_step_tolerance = 1e-3;
  // Defaults to 1/T when unset.
  std::optional<double> alpha;
  std::optional<double> eta;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Online variational Bayes for LDA over minibatches of documents. The
/// learning rate for update s is (tau0 + s)^-kappa.
class OnlineLda {
public:
  OnlineLda(std::size_t vocab_size, std::size_t topics, std::size_t corpus_docs, LdaConfig config);

  /// One global update from a minibatch.
  void update(std::span<const Document> batch);
  /// One pass over the corpus in minibatches of config.batch_size.
  void run_pass(const EncodedCorpus& corpus);

  std::size_t updates() const { return updates_; }
  /// Current topics: variational parameters normalized row-wise.
  TopicModel model() const;

private:
  std::size_t vocab_size_;
  std::size_t topics_;
  double corpus_docs_;
  LdaConfig config_;
  double alpha_;
  double eta_;
  Matrix<double> lambda_;
  std::size_t updates_ = 0;
};

/// Trains for config.passes passes. Throws on an empty corpus, T < 2, or
/// T greater than the vocabulary size.
TopicModel train_online_lda(const EncodedCorpus& corpus, std::size_t vocab_size, std::size_t topics,
                            const LdaConfig& config);

/// Variational fold-in with phi held fixed. At most 100 iterations; stops
/// once the mean absolute change of the document parameter is below 1e-6.
/// Token order does not matter.
DocTopics infer_doc_topics(const TopicModel& model, std::span<const WordId> doc);

/// Left-to-right particle estimate of the held-out log-likelihood, averaged
/// per token over `docs`.
double heldout_log_likelihood(const TopicModel& model, std::span<const Document> docs,
                              std::size_t particles, std::uint64_t seed);

void write_topic_model(std::ostream& out, const TopicModel& model);
TopicModel read_topic_model(std::istream& in);
void save_topic_model(const std::filesystem::path& path, const TopicModel& model);
TopicModel load_topic_model(const std::filesystem::path& path);

}  // namespace mswe

#endif  // MSWE_LDA_HPP
