#ifndef MSWE_MODEL_IO_HPP
#define MSWE_MODEL_IO_HPP

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "mswe/corpus.hpp"
#include "mswe/embedding_model.hpp"
#include "mswe/lda.hpp"
#include "mswe/trainer.hpp"

namespace mswe {

/// Everything needed to evaluate or continue working with a trained model.
struct ModelBundle {
  Vocabulary vocabulary;
  std::optional<TopicModel> topics;
  EmbeddingModel embeddings;
  TrainingConfig config;

  /// Throws std::runtime_error("corrupt bundle: ...") naming the first
  /// violated cross-reference.
  void validate() const;
};

// File names inside a bundle directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kVocabularyFile = "vocab.tsv";
inline constexpr const char* kTopicsFile = "topics.txt";
inline constexpr const char* kModelFile = "model.txt";
inline constexpr const char* kVectorsFile = "vectors.txt";
inline constexpr const char* kConfigFile = "config.json";

/// Model file: "V T dim variant", V target rows "token f1 .. f_dim",
/// "#context" and V rows, "#topics" and T rows. Values carry 9 significant
/// digits.
void write_embedding_model(std::ostream& out, const EmbeddingModel& model, const Vocabulary& vocab);
EmbeddingModel read_embedding_model(std::istream& in, const Vocabulary& vocab);

/// Word vectors only: "V dim" then one "token f1 .. f_dim" line per word.
void write_word_vectors(std::ostream& out, const EmbeddingModel& model, const Vocabulary& vocab);

std::string training_config_json(const TrainingConfig& config);
TrainingConfig parse_training_config_json(const std::string& text);

/// Writes the bundle into `dir` (created if needed) with a manifest listing
/// each component file and its CRC-32.
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

}  // namespace mswe

#endif  // MSWE_MODEL_IO_HPP
