#include "mswe/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace mswe {
namespace {

constexpr std::size_t kMaxNegativeAttempts = 100;
constexpr double kMinLearningRateFraction = 1e-4;
constexpr std::uint64_t kProgressFlush = 10000;

float uniform_unit(std::mt19937_64& rng) {
  return static_cast<float>(rng() >> 40) * 0x1p-24f;  // [0, 1)
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

// Contiguous document ranges with roughly equal token counts.
std::vector<std::size_t> shard_bounds(const EncodedCorpus& corpus, unsigned shards) {
  const std::size_t total = corpus.total_tokens();
  std::vector<std::size_t> bounds{0};
  std::size_t seen = 0;
  std::size_t next = 1;
  for (std::size_t d = 0; d < corpus.documents.size() && next < shards; ++d) {
    seen += corpus.documents[d].size();
    if (seen * shards >= total * next) {
      bounds.push_back(d + 1);
      ++next;
    }
  }
  while (bounds.size() <= shards) bounds.push_back(corpus.documents.size());
  bounds.back() = corpus.documents.size();
  return bounds;
}

}  // namespace

void TrainingConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (negatives < 1) throw std::invalid_argument("negatives must be at least 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (subsample_threshold < 0) throw std::invalid_argument("subsample threshold must be non-negative");
}

float sgd_step(EmbeddingModel& model, const StepContext& ctx, WordId target_id, WordId context_id,
               const Composition& composition, float lr, std::mt19937_64& rng, StepWorkspace<float>& ws) {
  ws.negative_rows.clear();
  for (std::size_t k = 0; k < ctx.negatives; ++k) {
    for (std::size_t attempt = 0; attempt < kMaxNegativeAttempts; ++attempt) {
      const WordId c = ctx.noise->sample(rng());
      if (c != context_id) {
        ws.negative_rows.push_back(model.context.row(c));
        break;
      }
    }
  }
  return negative_sampling_step<float>(model.target.row(target_id), model.topic, composition,
                                       model.context.row(context_id), ws.negative_rows, lr, ws);
}

float sgd_step(EmbeddingModel& model, const StepContext& ctx, WordId target_id, WordId context_id,
               const MixtureWeights& weights, float lr, std::mt19937_64& rng, StepWorkspace<float>& ws) {
  return sgd_step(model, ctx, target_id, context_id, composition_for(model.variant, weights), lr, rng, ws);
}

EmbeddingModel initialize_model(std::size_t vocab_size, std::size_t topics, const TrainingConfig& config) {
  config.validate();
  EmbeddingModel model;
  model.variant = config.variant;
  const std::size_t dim = config.dim;
  const float scale = 1.0f / static_cast<float>(dim);
  model.target = Matrix<float>(vocab_size, dim);
  model.context = Matrix<float>(vocab_size, dim, 0.0f);
  model.topic = Matrix<float>(topics, dim);
  auto init_rng = stream(config.seed, 1, 0);
  for (float& v : model.target.data()) v = (uniform_unit(init_rng) - 0.5f) * scale;
  auto topic_rng = stream(config.seed, 2, 0);
  for (float& v : model.topic.data()) v = (uniform_unit(topic_rng) - 0.5f) * scale;
  return model;
}

std::vector<std::vector<double>> infer_corpus_topics(const TopicModel& topics, const EncodedCorpus& corpus,
                                                     unsigned threads) {
  std::vector<std::vector<double>> theta(corpus.documents.size());
  threads = std::max(1u, threads);
  auto worker = [&](unsigned tid) {
    for (std::size_t d = tid; d < theta.size(); d += threads) {
      theta[d] = infer_doc_topics(topics, corpus.documents[d]).theta;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
  }
  return theta;
}

TrainingResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TopicModel* topics,
                     const TrainingConfig& config, const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  const std::size_t V = vocab.size();
  const bool mixed = config.variant != Variant::skipgram;
  if (mixed && topics == nullptr) {
    throw std::invalid_argument("variant " + std::string(to_string(config.variant)) + " requires a topic model");
  }
  if (mixed && topics->vocab_size() != V) {
    throw std::invalid_argument("vocabulary/topic-model mismatch: vocabulary has " + std::to_string(V) +
                                " entries, topic model " + std::to_string(topics->vocab_size()));
  }
  for (const auto& doc : corpus.documents) {
    for (WordId id : doc) {
      if (id >= V) throw std::invalid_argument("corpus id outside vocabulary");
    }
  }

  const std::size_t T = mixed ? topics->topics() : 0;
  TrainingResult result{initialize_model(V, T, config), {}};
  EmbeddingModel& model = result.model;

  const bool use_weights = mixed && !config.zero_mixture_weights;
  std::vector<std::vector<double>> doc_theta;
  if (use_weights) doc_theta = infer_corpus_topics(*topics, corpus, config.threads);

  const NoiseTable noise(vocab);
  const StepContext step_ctx{&noise, config.negatives};

  // Word2vec-style keep probability for frequent words.
  std::vector<float> keep_prob;
  if (config.subsample_threshold > 0) {
    const double total = static_cast<double>(corpus.total_tokens());
    keep_prob.resize(V, 1.0f);
    for (std::size_t w = 0; w < V; ++w) {
      const double f = static_cast<double>(vocab.count(static_cast<WordId>(w)));
      if (f == 0) continue;
      const double ratio = config.subsample_threshold * total / f;
      keep_prob[w] = static_cast<float>(std::min(1.0, std::sqrt(ratio) + ratio));
    }
  }

  const unsigned threads = config.threads;
  const auto bounds = shard_bounds(corpus, threads);
  const double scheduled = static_cast<double>(config.epochs) * static_cast<double>(corpus.total_tokens()) + 1.0;
  const float lr0 = static_cast<float>(config.learning_rate);
  std::atomic<std::uint64_t> processed{0};

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> loss(threads, 0.0);
    std::vector<std::uint64_t> pairs(threads, 0);

    auto worker = [&](unsigned tid) {
      auto rng = stream(config.seed, 3 + epoch, tid);
      StepWorkspace<float> ws;
      std::vector<WordId> kept;
      std::vector<double> lambda(T);
      std::uint64_t unflushed = 0;
      double thread_loss = 0;
      std::uint64_t thread_pairs = 0;

      for (std::size_t d = bounds[tid]; d < bounds[tid + 1]; ++d) {
        const auto& doc = corpus.documents[d];
        kept.clear();
        for (WordId w : doc) {
          if (keep_prob.empty() || uniform_unit(rng) < keep_prob[w]) kept.push_back(w);
        }
        for (std::size_t m = 0; m < kept.size(); ++m) {
          const double progress =
              static_cast<double>(processed.load(std::memory_order_relaxed) + unflushed) / scheduled;
          const float lr = lr0 * static_cast<float>(std::max(kMinLearningRateFraction, 1.0 - progress));
          ++unflushed;
          if (unflushed >= kProgressFlush) {
            processed.fetch_add(unflushed, std::memory_order_relaxed);
            unflushed = 0;
          }

          const WordId target = kept[m];
          Composition composition;
          if (use_weights) {
            const auto& theta = doc_theta[d];
            for (std::size_t t = 0; t < T; ++t) lambda[t] = mixture_weight(topics->prob(t, target), theta[t]);
            const auto weights = MixtureWeights::from(lambda);
            composition = composition_for(config.variant, weights);
          }

          const std::size_t lo = m >= config.window ? m - config.window : 0;
          const std::size_t hi = std::min(kept.size() - 1, m + config.window);
          for (std::size_t c = lo; c <= hi; ++c) {
            if (c == m) continue;
            thread_loss += sgd_step(model, step_ctx, target, kept[c], composition, lr, rng, ws);
            ++thread_pairs;
          }
        }
        // Subsampled tokens still count toward the schedule.
        unflushed += doc.size() - kept.size();
      }
      processed.fetch_add(unflushed, std::memory_order_relaxed);
      loss[tid] = thread_loss;
      pairs[tid] = thread_pairs;
    };

    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
    }

    EpochStats stats{epoch + 1, 0.0, 0};
    double total_loss = 0;
    for (unsigned tid = 0; tid < threads; ++tid) {
      total_loss += loss[tid];
      stats.pairs += pairs[tid];
    }
    stats.mean_loss = stats.pairs ? total_loss / static_cast<double>(stats.pairs) : 0.0;
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

double softmax_objective(const EncodedCorpus& corpus, const EmbeddingModel& model, const TopicModel* topics,
                         std::size_t window) {
  const bool mixed = model.variant != Variant::skipgram;
  if (mixed && (topics == nullptr || topics->topics() != model.topics())) {
    throw std::invalid_argument("softmax objective: topic model required for mixed variants");
  }
  const std::size_t dim = model.dim();
  const std::size_t V = model.vocab_size();

  Matrix<double> topic_vectors(model.topics(), dim);
  for (std::size_t i = 0; i < topic_vectors.data().size(); ++i) topic_vectors.data()[i] = model.topic.data()[i];

  double nll = 0;
  std::vector<double> v_w(dim), scores(V);
  for (const auto& doc : corpus.documents) {
    std::vector<double> theta;
    if (mixed) theta = infer_doc_topics(*topics, doc).theta;
    for (std::size_t m = 0; m < doc.size(); ++m) {
      const auto row = model.target.row(doc[m]);
      std::copy(row.begin(), row.end(), v_w.begin());
      Composition composition;
      if (mixed) composition = composition_for(model.variant, token_mixture_weights(*topics, doc[m], theta));
      std::vector<double> s(dim);
      compose_into<double>(v_w, topic_vectors, composition, s);

      double max_score = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < V; ++c) {
        const auto ctx = model.context.row(c);
        double acc = 0;
        for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(ctx[i]) * s[i];
        scores[c] = acc;
        max_score = std::max(max_score, acc);
      }
      double z = 0;
      for (double sc : scores) z += std::exp(sc - max_score);
      const double log_z = max_score + std::log(z);

      const std::size_t lo = m >= window ? m - window : 0;
      const std::size_t hi = std::min(doc.size() - 1, m + window);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c != m) nll += log_z - scores[doc[c]];
      }
    }
  }
  return nll;
}

}  // namespace mswe
