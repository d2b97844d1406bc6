#include "mswe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mswe/errors.hpp"
#include "mswe/mixture.hpp"

namespace mswe {
namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

std::vector<double> topic_probs(const TopicModel& topics, WordId w) {
  std::vector<double> p(topics.topics());
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = topics.prob(t, w);
  return p;
}

const TopicModel& require_topics(const ModelBundle& bundle, std::string_view metric) {
  if (!bundle.topics) {
    throw UsageError("metric " + std::string(metric) + " needs a model trained with a topic model");
  }
  return *bundle.topics;
}

bool is_zero(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; });
}

}  // namespace

// ---------------------------------------------------------------------------

double delta(std::span<const double> u, std::span<const double> v, DeltaMode mode) {
  const double cos = cosine(u, v);
  if (mode == DeltaMode::cosine) return cos;
  return 1.0 / std::max(1.0 - cos, kDeltaEpsilon);
}

// Sums a T x T table so that swapping the two words (transposing the table)
// gives a bit-identical result.
template <class Term>
double symmetric_sum(std::size_t T, Term term) {
  double sum = 0;
  for (std::size_t t = 0; t < T; ++t) {
    sum += term(t, t);
    for (std::size_t u = t + 1; u < T; ++u) sum += term(t, u) + term(u, t);
  }
  return sum;
}

double avg_sim(std::span<const float> v_w, std::span<const double> p_w, std::span<const float> v_w2,
               std::span<const double> p_w2, const Matrix<float>& topic_vectors) {
  const std::size_t T = topic_vectors.rows();
  if (T == 0 || p_w.size() != T || p_w2.size() != T) throw std::invalid_argument("avg_sim: topic count mismatch");
  std::vector<std::vector<double>> senses(T), senses2(T);
  for (std::size_t t = 0; t < T; ++t) {
    senses[t] = sense_vector<float>(v_w, topic_vectors.row(t), p_w[t]);
    senses2[t] = sense_vector<float>(v_w2, topic_vectors.row(t), p_w2[t]);
  }
  const double sum = symmetric_sum(T, [&](std::size_t t, std::size_t u) { return cosine<double>(senses[t], senses2[u]); });
  return sum / static_cast<double>(T * T);
}

double avg_sim_c(std::span<const float> v_w, std::span<const double> p_w, std::span<const double> ctx,
                 std::span<const float> v_w2, std::span<const double> p_w2, std::span<const double> ctx2,
                 const Matrix<float>& topic_vectors, DeltaMode mode) {
  const std::size_t T = topic_vectors.rows();
  if (T == 0 || p_w.size() != T || p_w2.size() != T) throw std::invalid_argument("avg_sim_c: topic count mismatch");
  std::vector<std::vector<double>> senses(T), senses2(T);
  std::vector<double> fit(T), fit2(T);
  for (std::size_t t = 0; t < T; ++t) {
    senses[t] = sense_vector<float>(v_w, topic_vectors.row(t), p_w[t]);
    senses2[t] = sense_vector<float>(v_w2, topic_vectors.row(t), p_w2[t]);
    fit[t] = delta(senses[t], ctx, mode);
    fit2[t] = delta(senses2[t], ctx2, mode);
  }
  const double sum = symmetric_sum(
      T, [&](std::size_t t, std::size_t u) { return fit[t] * fit2[u] * cosine<double>(senses[t], senses2[u]); });
  return sum / static_cast<double>(T * T);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("undefined correlation");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) throw std::invalid_argument("undefined correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

WordId lookup_word(const Vocabulary& vocab, std::string_view word) {
  const auto tokens = preprocess_text(word);
  if (tokens.size() != 1) return vocab.unk_id();
  return vocab.id(tokens.front());
}

std::vector<WordId> lookup_context(const Vocabulary& vocab, std::string_view text) {
  std::vector<WordId> ids;
  for (const auto& token : preprocess_text(text)) {
    if (auto id = vocab.find(token)) ids.push_back(*id);
  }
  return ids;
}

double global_sim(const ModelBundle& bundle, std::string_view w, std::string_view w2) {
  const auto& target = bundle.embeddings.target;
  return cosine<float>(target.row(lookup_word(bundle.vocabulary, w)), target.row(lookup_word(bundle.vocabulary, w2)));
}

double avg_sim(const ModelBundle& bundle, std::string_view w, std::string_view w2) {
  const auto& topics = require_topics(bundle, "avg");
  const WordId a = lookup_word(bundle.vocabulary, w);
  const WordId b = lookup_word(bundle.vocabulary, w2);
  const auto& m = bundle.embeddings;
  return avg_sim(m.target.row(a), topic_probs(topics, a), m.target.row(b), topic_probs(topics, b), m.topic);
}

double avg_sim_c(const ModelBundle& bundle, std::string_view w, std::string_view context, std::string_view w2,
                 std::string_view context2, DeltaMode mode) {
  const auto& topics = require_topics(bundle, "avgc");
  const WordId a = lookup_word(bundle.vocabulary, w);
  const WordId b = lookup_word(bundle.vocabulary, w2);
  const auto& m = bundle.embeddings;
  const auto ctx = context_vector(lookup_context(bundle.vocabulary, context), m, topics);
  const auto ctx2 = context_vector(lookup_context(bundle.vocabulary, context2), m, topics);
  return avg_sim_c(m.target.row(a), topic_probs(topics, a), ctx, m.target.row(b), topic_probs(topics, b), ctx2,
                   m.topic, mode);
}

SimilarityMetric parse_similarity_metric(std::string_view s) {
  if (s == "global") return SimilarityMetric::global;
  if (s == "avg") return SimilarityMetric::avg;
  if (s == "avgc") return SimilarityMetric::avgc;
  throw UsageError("unknown metric '" + std::string(s) + "'");
}

std::string_view to_string(SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::global: return "global";
    case SimilarityMetric::avg: return "avg";
    case SimilarityMetric::avgc: return "avgc";
  }
  return "?";
}

SimilarityReport run_similarity_eval(const ModelBundle& bundle, const SimilarityDataset& dataset,
                                     SimilarityMetric metric, DeltaMode mode) {
  if (metric == SimilarityMetric::avgc && !dataset.has_contexts()) {
    throw UsageError("metric avgc needs a dataset with contexts; '" + dataset.name + "' has none");
  }
  if (metric != SimilarityMetric::global) require_topics(bundle, to_string(metric));

  SimilarityReport report;
  report.dataset = dataset.name;
  report.metric = metric;
  std::vector<double> human, model;
  const auto& vocab = bundle.vocabulary;
  for (const auto& pair : dataset.pairs) {
    PairResult r;
    r.word1 = pair.word1;
    r.word2 = pair.word2;
    r.human_score = pair.human_score;
    const WordId a = lookup_word(vocab, pair.word1);
    const WordId b = lookup_word(vocab, pair.word2);
    r.oov1 = a == vocab.unk_id();
    r.oov2 = b == vocab.unk_id();
    r.zero_vector = is_zero(bundle.embeddings.target.row(a)) || is_zero(bundle.embeddings.target.row(b));
    switch (metric) {
      case SimilarityMetric::global: r.model_score = global_sim(bundle, pair.word1, pair.word2); break;
      case SimilarityMetric::avg: r.model_score = avg_sim(bundle, pair.word1, pair.word2); break;
      case SimilarityMetric::avgc:
        r.model_score = avg_sim_c(bundle, pair.word1, *pair.context1, pair.word2, *pair.context2, mode);
        break;
    }
    if (r.oov1 || r.oov2) ++report.oov_pairs;
    human.push_back(r.human_score);
    model.push_back(r.model_score);
    report.pairs.push_back(std::move(r));
  }
  report.rho = spearman(model, human);
  return report;
}

// ---------------------------------------------------------------------------

AnalogySolver::AnalogySolver(const ModelBundle& bundle) : bundle_(bundle) {
  const auto& target = bundle.embeddings.target;
  if (target.rows() < 4) throw std::invalid_argument("analogy needs a vocabulary of at least 4 words");
  normalized_ = Matrix<float>(target.rows(), target.cols());
  for (std::size_t w = 0; w < target.rows(); ++w) {
    const auto src = target.row(w);
    double norm = 0;
    for (float x : src) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    auto dst = normalized_.row(w);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = norm > 0 ? static_cast<float>(src[i] / norm) : 0.0f;
  }
}

WordId AnalogySolver::answer(WordId a, WordId b, WordId c) const {
  const auto& target = bundle_.embeddings.target;
  const std::size_t dim = target.cols();
  std::vector<float> query(dim);
  for (std::size_t i = 0; i < dim; ++i) query[i] = target(b, i) - target(a, i) + target(c, i);
  const WordId unk = bundle_.vocabulary.unk_id();
  WordId best = unk;
  float best_score = -std::numeric_limits<float>::infinity();
  for (std::size_t w = 0; w < normalized_.rows(); ++w) {
    if (w == a || w == b || w == c || w == unk) continue;
    const float score = dot<float>(normalized_.row(w), query);
    if (score > best_score) {
      best_score = score;
      best = static_cast<WordId>(w);
    }
  }
  return best;
}

std::string AnalogySolver::answer(std::string_view a, std::string_view b, std::string_view c) const {
  const auto& vocab = bundle_.vocabulary;
  return vocab.token(answer(lookup_word(vocab, a), lookup_word(vocab, b), lookup_word(vocab, c)));
}

AnalogyReport run_analogy_eval(const ModelBundle& bundle, const AnalogyDataset& dataset, unsigned threads) {
  const AnalogySolver solver(bundle);
  const auto& vocab = bundle.vocabulary;
  const std::size_t n = dataset.questions.size();
  std::vector<char> correct(n, 0), oov_gold(n, 0);

  threads = std::max(1u, threads);
  auto worker = [&](unsigned tid) {
    for (std::size_t q = tid; q < n; q += threads) {
      const auto& question = dataset.questions[q];
      const WordId gold = lookup_word(vocab, question.gold);
      if (gold == vocab.unk_id()) {
        oov_gold[q] = 1;
        continue;
      }
      const WordId got = solver.answer(lookup_word(vocab, question.a), lookup_word(vocab, question.b),
                                       lookup_word(vocab, question.c));
      correct[q] = got == gold;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
  }

  AnalogyReport report;
  std::map<std::string, std::size_t> slot;
  for (const auto& [name, count] : dataset.categories) {
    if (slot.emplace(name, report.categories.size()).second) report.categories.push_back({name});
  }
  for (std::size_t q = 0; q < n; ++q) {
    const auto& category = dataset.questions[q].category;
    auto it = slot.find(category);
    if (it == slot.end()) {
      it = slot.emplace(category, report.categories.size()).first;
      report.categories.push_back({category});
    }
    for (auto* acc : {&report.overall, &report.categories[it->second],
                      AnalogyDataset::is_syntactic(category) ? &report.syntactic : &report.semantic}) {
      acc->total += 1;
      acc->correct += correct[q];
    }
    report.oov_gold += oov_gold[q];
  }
  return report;
}

void print_similarity_report(std::ostream& out, const SimilarityReport& report) {
  out << std::left << std::setw(16) << "dataset" << std::setw(8) << "metric" << std::setw(8) << "pairs"
      << std::setw(10) << "oov" << "rho*100\n";
  out << std::setw(16) << report.dataset << std::setw(8) << to_string(report.metric) << std::setw(8)
      << report.pairs.size() << std::setw(10) << report.oov_pairs << std::fixed << std::setprecision(2)
      << report.rho * 100.0 << '\n';
  out.unsetf(std::ios::floatfield);
}

void print_analogy_report(std::ostream& out, const AnalogyReport& report) {
  out << std::left << std::setw(32) << "category" << std::setw(10) << "correct" << std::setw(10) << "total"
      << "accuracy%\n";
  auto row = [&](const CategoryAccuracy& c) {
    out << std::setw(32) << c.category << std::setw(10) << c.correct << std::setw(10) << c.total << std::fixed
        << std::setprecision(2) << c.accuracy() << '\n';
  };
  for (const auto& c : report.categories) row(c);
  row(report.semantic);
  row(report.syntactic);
  row(report.overall);
  out << "questions with out-of-vocabulary answers: " << report.oov_gold << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace mswe
