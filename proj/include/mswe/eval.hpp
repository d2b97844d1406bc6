#ifndef MSWE_EVAL_HPP
#define MSWE_EVAL_HPP

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mswe/corpus.hpp"
#include "mswe/matrix.hpp"
#include "mswe/model_io.hpp"

namespace mswe {

// ---------------------------------------------------------------------------
// Datasets

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double human_score = 0;
  // Sentential contexts with the target marker removed (SCWS only).
  std::optional<std::string> context1;
  std::optional<std::string> context2;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;

  bool has_contexts() const;
};

struct AnalogyQuestion {
  std::string a, b, c, gold;
  std::string category;
};

struct AnalogyDataset {
  std::vector<AnalogyQuestion> questions;
  // Categories in file order with their question counts.
  std::vector<std::pair<std::string, std::size_t>> categories;

  /// Categories named "gram*" are syntactic, the rest semantic.
  static bool is_syntactic(std::string_view category) { return category.starts_with("gram"); }
  std::size_t semantic_count() const;
  std::size_t syntactic_count() const;
};

/// Accepts "word1 word2 score" lines (tab or space separated; lines starting
/// with '#' are comments) and the SCWS layout
/// "id word1 pos1 word2 pos2 context1 context2 avg_score scores..." with
/// tab-separated fields and the target marked <b> ... </b>.
SimilarityDataset read_similarity_dataset(std::istream& in, std::string name);
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path);

/// ": category" header lines followed by "a b c d" lines.
AnalogyDataset read_analogy_dataset(std::istream& in);
AnalogyDataset load_analogy_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Metrics on raw vectors

/// How the context-fit weight delta(u, v) is read from the cosine.
enum class DeltaMode {
  inverse_distance,  // 1 / max(1 - cos, eps)
  cosine,            // 1 - cosine distance = cos
};

inline constexpr double kDeltaEpsilon = 1e-4;

double delta(std::span<const double> u, std::span<const double> v, DeltaMode mode = DeltaMode::inverse_distance);

/// Mean cosine over all T^2 pairs of sense vectors v_w (+) p_w[t] v_t.
double avg_sim(std::span<const float> v_w, std::span<const double> p_w, std::span<const float> v_w2,
               std::span<const double> p_w2, const Matrix<float>& topic_vectors);

/// AvgSim with each pair weighted by delta(sense, context) on both sides.
double avg_sim_c(std::span<const float> v_w, std::span<const double> p_w, std::span<const double> ctx,
                 std::span<const float> v_w2, std::span<const double> p_w2, std::span<const double> ctx2,
                 const Matrix<float>& topic_vectors, DeltaMode mode = DeltaMode::inverse_distance);

/// Pearson correlation of average ranks. Throws
/// std::invalid_argument("undefined correlation") on a length mismatch,
/// fewer than two items, or a constant sequence.
double spearman(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Metrics on a trained bundle

/// Maps an evaluation word through the training preprocessing; anything
/// that is not a single in-vocabulary token resolves to UNK.
WordId lookup_word(const Vocabulary& vocab, std::string_view word);

/// Context words that survive preprocessing and are in the vocabulary.
std::vector<WordId> lookup_context(const Vocabulary& vocab, std::string_view text);

double global_sim(const ModelBundle& bundle, std::string_view w, std::string_view w2);
double avg_sim(const ModelBundle& bundle, std::string_view w, std::string_view w2);
double avg_sim_c(const ModelBundle& bundle, std::string_view w, std::string_view context,
                 std::string_view w2, std::string_view context2, DeltaMode mode = DeltaMode::inverse_distance);

enum class SimilarityMetric { global, avg, avgc };
SimilarityMetric parse_similarity_metric(std::string_view s);
std::string_view to_string(SimilarityMetric m);

struct PairResult {
  std::string word1, word2;
  double human_score = 0;
  double model_score = 0;
  bool oov1 = false;
  bool oov2 = false;
  // Score forced to 0 because a vector had zero norm.
  bool zero_vector = false;
};

struct SimilarityReport {
  std::string dataset;
  SimilarityMetric metric = SimilarityMetric::global;
  double rho = 0;
  std::size_t oov_pairs = 0;
  std::vector<PairResult> pairs;
};

/// Scores every pair with `metric` and correlates with the human scores.
/// Throws UsageError when avgc is requested on a dataset without contexts
/// or avg/avgc on a model without topics.
SimilarityReport run_similarity_eval(const ModelBundle& bundle, const SimilarityDataset& dataset,
                                     SimilarityMetric metric, DeltaMode mode = DeltaMode::inverse_distance);

/// 3CosAdd over normalized target vectors.
class AnalogySolver {
public:
  explicit AnalogySolver(const ModelBundle& bundle);

  /// Nearest word to v_b - v_a + v_c by cosine, excluding a, b, c and UNK.
  WordId answer(WordId a, WordId b, WordId c) const;
  std::string answer(std::string_view a, std::string_view b, std::string_view c) const;

private:
  const ModelBundle& bundle_;
  Matrix<float> normalized_;
};

struct CategoryAccuracy {
  std::string category;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct AnalogyReport {
  CategoryAccuracy overall{"overall"};
  CategoryAccuracy semantic{"semantic"};
  CategoryAccuracy syntactic{"syntactic"};
  std::vector<CategoryAccuracy> categories;
  // Questions whose gold answer is out of vocabulary (all counted wrong).
  std::size_t oov_gold = 0;
};

AnalogyReport run_analogy_eval(const ModelBundle& bundle, const AnalogyDataset& dataset, unsigned threads = 1);

void print_similarity_report(std::ostream& out, const SimilarityReport& report);
void print_analogy_report(std::ostream& out, const AnalogyReport& report);

}  // namespace mswe

#endif  // MSWE_EVAL_HPP
