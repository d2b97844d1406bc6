#include "mswe/lda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <optional>
#include <string>
#include <thread>

#include <boost/math/special_functions/digamma.hpp>

#include "mswe/number_format.hpp"

namespace mswe {
namespace {

using boost::math::digamma;

struct BagOfWords {
  std::vector<WordId> ids;
  std::vector<double> counts;
  double total = 0;
};

BagOfWords to_bag(std::span<const WordId> doc) {
  std::vector<WordId> sorted(doc.begin(), doc.end());
  std::sort(sorted.begin(), sorted.end());
  BagOfWords bag;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    bag.ids.push_back(sorted[i]);
    bag.counts.push_back(static_cast<double>(j - i));
    i = j;
  }
  bag.total = static_cast<double>(sorted.size());
  return bag;
}

// Coordinate ascent on the document's variational Dirichlet parameter.
// `beta` holds one row per topic restricted to the bag's words (T x n).
struct EStepResult {
  std::vector<double> gamma;
  std::vector<double> exp_elog_theta;
  std::vector<double> phinorm;
};

EStepResult doc_e_step(const BagOfWords& bag, const Matrix<double>& beta, double alpha,
                       std::size_t max_iter, double tol) {
  const std::size_t T = beta.rows();
  const std::size_t n = bag.ids.size();
  EStepResult r;
  r.gamma.assign(T, alpha + bag.total / static_cast<double>(T));
  r.exp_elog_theta.resize(T);
  r.phinorm.resize(n);
  std::vector<double> next(T);

  auto refresh = [&] {
    const double psi_sum = digamma(std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0));
    for (std::size_t t = 0; t < T; ++t) r.exp_elog_theta[t] = std::exp(digamma(r.gamma[t]) - psi_sum);
    std::fill(r.phinorm.begin(), r.phinorm.end(), 1e-100);
    for (std::size_t t = 0; t < T; ++t) {
      const auto b = beta.row(t);
      const double et = r.exp_elog_theta[t];
      for (std::size_t i = 0; i < n; ++i) r.phinorm[i] += et * b[i];
    }
  };

  if (n == 0) return r;
  refresh();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double change = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto b = beta.row(t);
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += bag.counts[i] / r.phinorm[i] * b[i];
      next[t] = alpha + r.exp_elog_theta[t] * acc;
      change += std::abs(next[t] - r.gamma[t]);
    }
    r.gamma.swap(next);
    refresh();
    if (change / static_cast<double>(T) < tol) break;
  }
  return r;
}

Matrix<double> restrict_columns(const Matrix<double>& full, const std::vector<WordId>& ids) {
  Matrix<double> out(full.rows(), ids.size());
  for (std::size_t t = 0; t < full.rows(); ++t) {
    const auto src = full.row(t);
    auto dst = out.row(t);
    for (std::size_t i = 0; i < ids.size(); ++i) dst[i] = src[ids[i]];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

TopicModel::TopicModel(Matrix<double> phi, double alpha, double eta)
    : phi_(std::move(phi)), alpha_(alpha), eta_(eta) {
  if (phi_.rows() < 2) throw std::invalid_argument("topic model needs at least 2 topics");
  if (phi_.cols() < 2) throw std::invalid_argument("topic model needs a vocabulary of at least 2");
  if (!(alpha_ > 0) || !(eta_ > 0)) throw std::invalid_argument("topic model priors must be positive");
  for (std::size_t t = 0; t < phi_.rows(); ++t) {
    double sum = 0;
    for (double p : phi_.row(t)) {
      if (!(p >= 0) || !std::isfinite(p)) {
        throw std::invalid_argument("topic " + std::to_string(t) + " has an invalid probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("topic " + std::to_string(t) + " does not sum to 1");
    }
  }
}

OnlineLda::OnlineLda(std::size_t vocab_size, std::size_t topics, std::size_t corpus_docs,
                     LdaConfig config)
    : vocab_size_(vocab_size),
      topics_(topics),
      corpus_docs_(static_cast<double>(corpus_docs)),
      config_(config),
      alpha_(config.alpha.value_or(1.0 / static_cast<double>(topics))),
      eta_(config.eta.value_or(1.0 / static_cast<double>(topics))),
      lambda_(topics, vocab_size) {
  if (topics < 2) throw std::invalid_argument("LDA needs at least 2 topics");
  if (topics > vocab_size) throw std::invalid_argument("more topics than vocabulary");
  if (corpus_docs == 0) throw std::invalid_argument("empty corpus");
  if (config_.batch_size == 0) throw std::invalid_argument("LDA batch size must be positive");
  std::mt19937_64 rng(config_.seed);
  std::gamma_distribution<double> init(100.0, 1.0 / 100.0);
  for (double& v : lambda_.data()) v = init(rng);
}

void OnlineLda::update(std::span<const Document> batch) {
  const std::size_t T = topics_;
  // exp(E[log beta]) under the current variational topics.
  Matrix<double> exp_elog_beta(T, vocab_size_);
  for (std::size_t t = 0; t < T; ++t) {
    const auto lam = lambda_.row(t);
    const double psi_sum = digamma(std::accumulate(lam.begin(), lam.end(), 0.0));
    auto out = exp_elog_beta.row(t);
    for (std::size_t w = 0; w < vocab_size_; ++w) out[w] = std::exp(digamma(lam[w]) - psi_sum);
  }

  // E-steps run in parallel; their statistics are summed in document order so
  // the result does not depend on the thread count.
  struct DocStats {
    BagOfWords bag;
    std::vector<double> weight;  // T x |bag|, row-major
  };
  std::vector<std::optional<DocStats>> per_doc(batch.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(config_.threads, static_cast<unsigned>(batch.size())));
  auto worker = [&](unsigned tid) {
    for (std::size_t d = tid; d < batch.size(); d += threads) {
      if (batch[d].empty()) continue;
      DocStats st{to_bag(batch[d]), {}};
      const auto beta = restrict_columns(exp_elog_beta, st.bag.ids);
      const auto r = doc_e_step(st.bag, beta, alpha_, config_.e_step_iterations, config_.e_step_tolerance);
      const std::size_t n = st.bag.ids.size();
      st.weight.resize(T * n);
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i) st.weight[t * n + i] = r.exp_elog_theta[t] * st.bag.counts[i] / r.phinorm[i];
      }
      per_doc[d] = std::move(st);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
  }
  Matrix<double> sstats(T, vocab_size_);
  std::size_t batch_docs = 0;
  for (const auto& st : per_doc) {
    if (!st) continue;
    ++batch_docs;
    const std::size_t n = st->bag.ids.size();
    for (std::size_t t = 0; t < T; ++t) {
      auto row = sstats.row(t);
      for (std::size_t i = 0; i < n; ++i) row[st->bag.ids[i]] += st->weight[t * n + i];
    }
  }
  if (batch_docs == 0) return;

  const double rho = std::pow(config_.tau0 + static_cast<double>(updates_), -config_.kappa);
  const double scale = corpus_docs_ / static_cast<double>(batch_docs);
  for (std::size_t t = 0; t < T; ++t) {
    auto lam = lambda_.row(t);
    const auto eb = exp_elog_beta.row(t);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      lam[w] = (1.0 - rho) * lam[w] + rho * (eta_ + scale * sstats(t, w) * eb[w]);
    }
  }
  ++updates_;
}

void OnlineLda::run_pass(const EncodedCorpus& corpus) {
  const auto& docs = corpus.documents;
  for (std::size_t begin = 0; begin < docs.size(); begin += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, docs.size() - begin);
    update(std::span<const Document>(docs).subspan(begin, len));
  }
}

TopicModel OnlineLda::model() const {
  Matrix<double> phi(topics_, vocab_size_);
  for (std::size_t t = 0; t < topics_; ++t) {
    const auto lam = lambda_.row(t);
    const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
    auto out = phi.row(t);
    for (std::size_t w = 0; w < vocab_size_; ++w) out[w] = lam[w] / total;
  }
  return TopicModel(std::move(phi), alpha_, eta_);
}

TopicModel train_online_lda(const EncodedCorpus& corpus, std::size_t vocab_size, std::size_t topics,
                            const LdaConfig& config) {
  std::size_t nonempty = 0;
  for (const auto& d : corpus.documents) {
    if (!d.empty()) ++nonempty;
    for (auto id : d) {
      if (id >= vocab_size) throw std::invalid_argument("corpus id outside vocabulary");
    }
  }
  if (nonempty == 0) throw std::invalid_argument("empty corpus");
  OnlineLda lda(vocab_size, topics, nonempty, config);
  for (std::size_t pass = 0; pass < config.passes; ++pass) lda.run_pass(corpus);
  return lda.model();
}

DocTopics infer_doc_topics(const TopicModel& model, std::span<const WordId> doc) {
  const auto bag = to_bag(doc);
  for (auto id : bag.ids) {
    if (id >= model.vocab_size()) throw std::invalid_argument("document id outside topic model vocabulary");
  }
  const auto beta = restrict_columns(model.phi(), bag.ids);
  const auto r = doc_e_step(bag, beta, model.alpha(), 100, 1e-6);
  DocTopics out;
  const double total = std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0);
  out.theta.reserve(r.gamma.size());
  for (double g : r.gamma) out.theta.push_back(g / total);
  return out;
}

double heldout_log_likelihood(const TopicModel& model, std::span<const Document> docs,
                              std::size_t particles, std::uint64_t seed) {
  const std::size_t T = model.topics();
  const double alpha = model.alpha();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> weights(T);
  auto sample = [&](WordId w, const std::vector<double>& counts) {
    double total = 0;
    for (std::size_t t = 0; t < T; ++t) {
      weights[t] = (counts[t] + alpha) * model.prob(t, w);
      total += weights[t];
    }
    double u = unif(rng) * total;
    for (std::size_t t = 0; t < T; ++t) {
      u -= weights[t];
      if (u <= 0) return t;
    }
    return T - 1;
  };

  double log_lik = 0;
  std::size_t tokens = 0;
  for (const auto& doc : docs) {
    std::vector<double> token_prob(doc.size(), 0.0);
    for (std::size_t r = 0; r < particles; ++r) {
      std::vector<double> counts(T, 0.0);
      std::vector<std::size_t> z(doc.size());
      for (std::size_t n = 0; n < doc.size(); ++n) {
        for (std::size_t m = 0; m < n; ++m) {
          counts[z[m]] -= 1;
          z[m] = sample(doc[m], counts);
          counts[z[m]] += 1;
        }
        double p = 0;
        const double denom = static_cast<double>(n) + static_cast<double>(T) * alpha;
        for (std::size_t t = 0; t < T; ++t) p += (counts[t] + alpha) / denom * model.prob(t, doc[n]);
        token_prob[n] += p;
        z[n] = sample(doc[n], counts);
        counts[z[n]] += 1;
      }
    }
    for (double p : token_prob) log_lik += std::log(p / static_cast<double>(particles));
    tokens += doc.size();
  }
  if (tokens == 0) throw std::invalid_argument("held-out set has no tokens");
  return log_lik / static_cast<double>(tokens);
}

// ---------------------------------------------------------------------------
// Text format: "T V alpha eta" then T rows of V probabilities.

void write_topic_model(std::ostream& out, const TopicModel& model) {
  std::string line;
  line += std::to_string(model.topics()) + ' ' + std::to_string(model.vocab_size()) + ' ';
  append_exact(line, model.alpha());
  line += ' ';
  append_exact(line, model.eta());
  line += '\n';
  out << line;
  for (std::size_t t = 0; t < model.topics(); ++t) {
    line.clear();
    const auto row = model.phi().row(t);
    for (std::size_t w = 0; w < row.size(); ++w) {
      if (w) line += ' ';
      append_exact(line, row[w]);
    }
    line += '\n';
    out << line;
  }
}

TopicModel read_topic_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("topic model: missing header");
  const auto header = split_tokens(line);
  if (header.size() != 4) throw std::runtime_error("topic model: header must be 'T V alpha eta'");
  const auto T = parse_number<std::size_t>(header[0], "topic count");
  const auto V = parse_number<std::size_t>(header[1], "vocabulary size");
  const auto alpha = parse_number<double>(header[2], "alpha");
  const auto eta = parse_number<double>(header[3], "eta");
  Matrix<double> phi(T, V);
  for (std::size_t t = 0; t < T; ++t) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("topic model: expected " + std::to_string(T) + " topic rows, found " +
                               std::to_string(t));
    }
    const auto fields = split_tokens(line);
    if (fields.size() != V) {
      throw std::runtime_error("topic model: row " + std::to_string(t) + " has " +
                               std::to_string(fields.size()) + " values, expected " + std::to_string(V));
    }
    auto row = phi.row(t);
    for (std::size_t w = 0; w < V; ++w) row[w] = parse_number<double>(fields[w], "probability");
  }
  return TopicModel(std::move(phi), alpha, eta);
}

void save_topic_model(const std::filesystem::path& path, const TopicModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_topic_model(out, model);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

TopicModel load_topic_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  try {
    return read_topic_model(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace mswe
