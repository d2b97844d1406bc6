#include "mswe/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mswe/corpus.hpp"
#include "mswe/errors.hpp"
#include "mswe/eval.hpp"
#include "mswe/lda.hpp"
#include "mswe/model_io.hpp"
#include "mswe/trainer.hpp"

namespace mswe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  // preprocess
  std::string input;
  std::size_t chunk = 0;
  // shared paths
  std::string corpus;
  std::string vocab;
  std::string topics;
  std::string model;
  std::string dataset;
  std::string out;
  std::string summary;
  std::string pairs_out;
  // build-vocab
  std::size_t max_size = 200000;
  // train-lda
  std::size_t topic_count = 50;
  LdaConfig lda;
  // train
  TrainingConfig train;
  std::string variant = "skipgram";
  // eval
  std::string metric = "global";
  std::string delta = "inverse";
  unsigned eval_threads = 1;
};

void log_line(std::ostream& err, const std::string& msg) { err << "[mswe] " << msg << '\n'; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void run_preprocess(const Options& o) {
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + o.input + "' for reading");
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + o.out + "' for writing");
  std::string line;
  auto emit = [&](auto first, auto last) {
    for (auto it = first; it != last; ++it) {
      if (it != first) out << ' ';
      out << *it;
    }
    out << '\n';
  };
  while (std::getline(in, line)) {
    const auto tokens = preprocess_text(line);
    if (o.chunk == 0 || tokens.size() <= o.chunk) {
      emit(tokens.begin(), tokens.end());
      continue;
    }
    for (std::size_t begin = 0; begin < tokens.size(); begin += o.chunk) {
      const auto end = std::min(tokens.size(), begin + o.chunk);
      emit(tokens.begin() + static_cast<std::ptrdiff_t>(begin), tokens.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + o.out + "'");
}

void run_build_vocab(const Options& o, std::ostream& err) {
  std::ifstream in(o.corpus, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + o.corpus + "' for reading");
  VocabularyCounter counter;
  std::string line;
  while (std::getline(in, line)) counter.add(split_tokens(line));
  const auto vocab = counter.finish(o.max_size);
  save_vocabulary(o.out, vocab);
  log_line(err, "vocabulary: " + std::to_string(vocab.size()) + " entries (including <unk>)");
}

void run_train_lda(const Options& o, std::ostream& err) {
  const auto vocab = load_vocabulary(o.vocab);
  const auto corpus = encode_corpus_file(o.corpus, vocab);
  std::size_t nonempty = 0;
  for (const auto& d : corpus.documents) nonempty += !d.empty();
  if (nonempty == 0) throw std::runtime_error("empty corpus");
  const auto start = std::chrono::steady_clock::now();
  OnlineLda lda(vocab.size(), o.topic_count, nonempty, o.lda);
  for (std::size_t pass = 0; pass < o.lda.passes; ++pass) {
    lda.run_pass(corpus);
    log_line(err, "lda pass " + std::to_string(pass + 1) + "/" + std::to_string(o.lda.passes) + " done (" +
                      std::to_string(seconds_since(start)) + " s)");
  }
  save_topic_model(o.out, lda.model());
}

void run_train(Options o, std::ostream& err) {
  o.train.variant = parse_variant(o.variant);
  if (o.train.variant != Variant::skipgram && o.topics.empty()) {
    throw UsageError("variant " + o.variant + " requires --topics (a topic model written by train-lda)");
  }
  ModelBundle bundle;
  bundle.vocabulary = load_vocabulary(o.vocab);
  if (!o.topics.empty()) bundle.topics = load_topic_model(o.topics);
  if (o.train.variant == Variant::skipgram) bundle.topics.reset();
  const auto corpus = encode_corpus_file(o.corpus, bundle.vocabulary);
  log_line(err, "corpus: " + std::to_string(corpus.doc_count()) + " documents, " +
                    std::to_string(corpus.total_tokens()) + " tokens");

  const auto start = std::chrono::steady_clock::now();
  auto result = train(corpus, bundle.vocabulary, bundle.topics ? &*bundle.topics : nullptr, o.train,
                      [&](const EpochStats& s) {
                        std::ostringstream msg;
                        msg << "epoch " << s.epoch << ": mean loss " << s.mean_loss << " over " << s.pairs
                            << " pairs (" << seconds_since(start) << " s)";
                        log_line(err, msg.str());
                      });
  bundle.embeddings = std::move(result.model);
  bundle.config = o.train;
  save_bundle(bundle, o.out);
}

DeltaMode parse_delta(const std::string& s) {
  if (s == "inverse") return DeltaMode::inverse_distance;
  if (s == "cosine") return DeltaMode::cosine;
  throw UsageError("unknown delta mode '" + s + "'");
}

json load_summary(const std::string& path) {
  if (path.empty() || !fs::exists(path)) return json::object();
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    throw std::runtime_error("summary file '" + path + "' is not valid JSON");
  }
}

void store_summary(const std::string& path, const json& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << summary.dump(2) << '\n';
}

void run_eval_sim(const Options& o, std::ostream& out) {
  const auto metric = parse_similarity_metric(o.metric);
  const auto mode = parse_delta(o.delta);
  const auto dataset = load_similarity_dataset(o.dataset);
  if (metric == SimilarityMetric::avgc && !dataset.has_contexts()) {
    throw UsageError("metric avgc needs a dataset with contexts; '" + o.dataset + "' has none");
  }
  const auto bundle = load_bundle(o.model);
  const auto report = run_similarity_eval(bundle, dataset, metric, mode);
  print_similarity_report(out, report);

  if (!o.pairs_out.empty()) {
    std::ofstream pairs(o.pairs_out, std::ios::binary);
    if (!pairs) throw std::runtime_error("cannot open '" + o.pairs_out + "' for writing");
    pairs << "word1\tword2\thuman\tmodel\toov1\toov2\tzero_vector\n";
    for (const auto& p : report.pairs) {
      pairs << p.word1 << '\t' << p.word2 << '\t' << p.human_score << '\t' << p.model_score << '\t' << p.oov1
            << '\t' << p.oov2 << '\t' << p.zero_vector << '\n';
    }
  }
  if (!o.summary.empty()) {
    auto summary = load_summary(o.summary);
    summary["similarity"][report.dataset][std::string(to_string(metric))] = {
        {"rho_x100", report.rho * 100.0}, {"pairs", report.pairs.size()}, {"oov_pairs", report.oov_pairs}};
    store_summary(o.summary, summary);
  }
}

void run_eval_analogy(const Options& o, std::ostream& out) {
  const auto dataset = load_analogy_dataset(o.dataset);
  const auto bundle = load_bundle(o.model);
  const auto report = run_analogy_eval(bundle, dataset, o.eval_threads);
  print_analogy_report(out, report);
  if (!o.summary.empty()) {
    auto summary = load_summary(o.summary);
    json categories = json::object();
    for (const auto& c : report.categories) categories[c.category] = c.accuracy();
    summary["analogy"][fs::path(o.dataset).stem().string()] = {
        {"accuracy", report.overall.accuracy()},     {"semantic_accuracy", report.semantic.accuracy()},
        {"syntactic_accuracy", report.syntactic.accuracy()}, {"questions", report.overall.total},
        {"oov_gold", report.oov_gold},               {"categories", categories}};
    store_summary(o.summary, summary);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-sense word embeddings: topic-mixture training and evaluation", "mswe"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  Options o;

  auto* pre = app.add_subcommand("preprocess", "Lowercase, map numbers to 0, strip punctuation; one document per line");
  pre->add_option("--input", o.input, "Raw UTF-8 text, one document per line")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", o.out, "Output corpus file")->required();
  pre->add_option("--chunk", o.chunk, "Split documents longer than this many tokens (0 = never)");

  auto* bv = app.add_subcommand("build-vocab", "Count tokens and keep the most frequent");
  bv->add_option("--corpus", o.corpus, "Preprocessed corpus")->required()->check(CLI::ExistingFile);
  bv->add_option("--max-size", o.max_size, "Number of retained tokens (UNK excluded)")->check(CLI::PositiveNumber);
  bv->add_option("--out", o.out, "Vocabulary file")->required();

  auto* lda = app.add_subcommand("train-lda", "Train an online variational LDA topic model");
  lda->add_option("--corpus", o.corpus, "Preprocessed corpus")->required()->check(CLI::ExistingFile);
  lda->add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  lda->add_option("--topics-count,-T", o.topic_count, "Number of topics")->check(CLI::Range(2, 100000));
  lda->add_option("--passes", o.lda.passes, "Passes over the corpus")->check(CLI::PositiveNumber);
  lda->add_option("--batch-size", o.lda.batch_size, "Documents per minibatch")->check(CLI::PositiveNumber);
  lda->add_option("--tau0", o.lda.tau0, "Learning-rate offset")->check(CLI::NonNegativeNumber);
  lda->add_option("--kappa", o.lda.kappa, "Learning-rate decay exponent")->check(CLI::Range(0.5, 1.0));
  lda->add_option("--seed", o.lda.seed, "Random seed");
  lda->add_option("--threads", o.lda.threads, "Worker threads for the E-step")->check(CLI::PositiveNumber);
  lda->add_option("--out", o.out, "Topic model file")->required();

  auto* tr = app.add_subcommand("train", "Train word, context and topic embeddings");
  tr->add_option("--corpus", o.corpus, "Preprocessed corpus")->required()->check(CLI::ExistingFile);
  tr->add_option("--vocab", o.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  tr->add_option("--topics", o.topics, "Topic model file (required for mswe1/mswe2)")->check(CLI::ExistingFile);
  tr->add_option("--variant", o.variant, "skipgram, mswe1 or mswe2")
      ->check(CLI::IsMember({"skipgram", "mswe1", "mswe2"}));
  tr->add_option("--dim", o.train.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  tr->add_option("--window", o.train.window, "Context size k on each side")->check(CLI::PositiveNumber);
  tr->add_option("--negative", o.train.negatives, "Negative samples K per pair")->check(CLI::PositiveNumber);
  tr->add_option("--lr", o.train.learning_rate, "Initial learning rate")->check(CLI::PositiveNumber);
  tr->add_option("--epochs", o.train.epochs, "Passes over the corpus")->check(CLI::PositiveNumber);
  tr->add_option("--seed", o.train.seed, "Random seed");
  tr->add_option("--threads", o.train.threads, "Worker threads (1 = deterministic)")->check(CLI::PositiveNumber);
  tr->add_option("--subsample", o.train.subsample_threshold, "Frequent-word subsampling threshold (0 = off)")
      ->check(CLI::NonNegativeNumber);
  tr->add_option("--out", o.out, "Output bundle directory")->required();

  auto* es = app.add_subcommand("eval-sim", "Word similarity: Spearman correlation with human scores");
  es->add_option("--model", o.model, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  es->add_option("--dataset", o.dataset, "Similarity dataset (word pairs or SCWS)")->required()->check(CLI::ExistingFile);
  es->add_option("--metric", o.metric, "global, avg or avgc")->check(CLI::IsMember({"global", "avg", "avgc"}));
  es->add_option("--delta", o.delta, "Context weight for avgc: inverse (1/(1-cos)) or cosine")
      ->check(CLI::IsMember({"inverse", "cosine"}));
  es->add_option("--pairs-out", o.pairs_out, "Per-pair report (TSV)");
  es->add_option("--summary", o.summary, "JSON summary file to create or update");

  auto* ea = app.add_subcommand("eval-analogy", "Word analogy by 3CosAdd");
  ea->add_option("--model", o.model, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  ea->add_option("--dataset", o.dataset, "Analogy questions file")->required()->check(CLI::ExistingFile);
  ea->add_option("--threads", o.eval_threads, "Worker threads")->check(CLI::PositiveNumber);
  ea->add_option("--summary", o.summary, "JSON summary file to create or update");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pre->parsed()) run_preprocess(o);
    else if (bv->parsed()) run_build_vocab(o, err);
    else if (lda->parsed()) run_train_lda(o, err);
    else if (tr->parsed()) run_train(o, err);
    else if (es->parsed()) run_eval_sim(o, out);
    else if (ea->parsed()) run_eval_analogy(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mswe
