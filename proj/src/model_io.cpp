#include "mswe/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <zlib.h>

#include "mswe/number_format.hpp"

namespace mswe {
namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) { throw std::runtime_error("corrupt bundle: " + what); }

void append_row(std::string& line, std::span<const float> row) {
  for (float v : row) {
    line += ' ';
    append_sig9(line, v);
  }
}

void read_row(std::string_view what, const std::vector<std::string>& fields, std::size_t first,
              std::span<float> row) {
  if (fields.size() - first != row.size()) {
    corrupt(std::string(what) + " has " + std::to_string(fields.size() - first) + " values, expected " +
            std::to_string(row.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = parse_number<float>(fields[first + i], what);
}

void read_section(std::istream& in, std::string_view name, Matrix<float>& m) {
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!std::getline(in, line) || line.starts_with('#')) {
      corrupt("expected " + std::to_string(m.rows()) + " " + std::string(name) + " rows, found " +
              std::to_string(r));
    }
    read_row(std::string(name) + " row " + std::to_string(r), split_tokens(line), 0, m.row(r));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string crc32_hex(const std::string& content) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace

void ModelBundle::validate() const {
  const std::size_t V = vocabulary.size();
  const auto& m = embeddings;
  if (m.target.rows() != V) {
    corrupt("vocabulary has " + std::to_string(V) + " entries but model has " + std::to_string(m.target.rows()) +
            " target rows");
  }
  if (m.context.rows() != V || m.context.cols() != m.dim()) corrupt("context matrix shape disagrees with target");
  if (m.topic.rows() > 0 && m.topic.cols() != m.dim()) corrupt("topic matrix dimension disagrees with target");
  if (m.dim() != config.dim) {
    corrupt("config dim " + std::to_string(config.dim) + " disagrees with model dim " + std::to_string(m.dim()));
  }
  if (m.variant != config.variant) corrupt("config variant disagrees with model variant");
  if (m.variant != Variant::skipgram && !topics) corrupt("variant " + std::string(to_string(m.variant)) + " needs a topic model");
  if (topics) {
    if (topics->vocab_size() != V) {
      corrupt("topic model covers " + std::to_string(topics->vocab_size()) + " words, vocabulary has " +
              std::to_string(V));
    }
    if (topics->topics() != m.topics()) {
      corrupt("topic model has " + std::to_string(topics->topics()) + " topics, model has " +
              std::to_string(m.topics()) + " topic rows");
    }
  } else if (m.topics() != 0) {
    corrupt("model has topic rows but no topic model");
  }
  for (const auto* mat : {&m.target, &m.context, &m.topic}) {
    for (float v : mat->data()) {
      if (!std::isfinite(v)) corrupt("non-finite embedding value");
    }
  }
}

void write_embedding_model(std::ostream& out, const EmbeddingModel& model, const Vocabulary& vocab) {
  std::string line;
  line = std::to_string(model.vocab_size()) + ' ' + std::to_string(model.topics()) + ' ' +
         std::to_string(model.dim()) + ' ' + std::string(to_string(model.variant)) + '\n';
  out << line;
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    line = vocab.token(static_cast<WordId>(w));
    append_row(line, model.target.row(w));
    line += '\n';
    out << line;
  }
  out << "#context\n";
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    line.clear();
    append_row(line, model.context.row(w));
    out << std::string_view(line).substr(1) << '\n';
  }
  out << "#topics\n";
  for (std::size_t t = 0; t < model.topics(); ++t) {
    line.clear();
    append_row(line, model.topic.row(t));
    out << std::string_view(line).substr(1) << '\n';
  }
}

EmbeddingModel read_embedding_model(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  if (!std::getline(in, line)) corrupt("model file is empty");
  const auto header = split_tokens(line);
  if (header.size() != 4) corrupt("model header must be 'V T dim variant'");
  const auto V = parse_number<std::size_t>(header[0], "vocabulary size");
  const auto T = parse_number<std::size_t>(header[1], "topic count");
  const auto dim = parse_number<std::size_t>(header[2], "dimension");
  if (V != vocab.size()) {
    corrupt("model header says V=" + std::to_string(V) + " but vocabulary has " + std::to_string(vocab.size()) +
            " entries");
  }
  if (dim == 0) corrupt("dimension must be positive");

  EmbeddingModel model;
  model.variant = parse_variant(header[3]);
  model.target = Matrix<float>(V, dim);
  model.context = Matrix<float>(V, dim);
  model.topic = Matrix<float>(T, dim);

  for (std::size_t w = 0; w < V; ++w) {
    if (!std::getline(in, line) || line.starts_with('#')) {
      corrupt("expected " + std::to_string(V) + " target rows, found " + std::to_string(w));
    }
    const auto fields = split_tokens(line);
    if (fields.empty() || fields[0] != vocab.token(static_cast<WordId>(w))) {
      corrupt("target row " + std::to_string(w) + " is not '" + vocab.token(static_cast<WordId>(w)) + "'");
    }
    read_row("target row " + std::to_string(w), fields, 1, model.target.row(w));
  }
  if (!std::getline(in, line) || line != "#context") corrupt("missing #context section");
  read_section(in, "context", model.context);
  if (!std::getline(in, line) || line != "#topics") corrupt("missing #topics section");
  read_section(in, "topic", model.topic);
  while (std::getline(in, line)) {
    if (!line.empty()) corrupt("unexpected trailing data in model file");
  }
  return model;
}

void write_word_vectors(std::ostream& out, const EmbeddingModel& model, const Vocabulary& vocab) {
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  std::string line;
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    line = vocab.token(static_cast<WordId>(w));
    append_row(line, model.target.row(w));
    line += '\n';
    out << line;
  }
}

std::string training_config_json(const TrainingConfig& c) {
  json j;
  j["dim"] = c.dim;
  j["window"] = c.window;
  j["negatives"] = c.negatives;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["variant"] = std::string(to_string(c.variant));
  j["subsample_threshold"] = c.subsample_threshold;
  j["zero_mixture_weights"] = c.zero_mixture_weights;
  return j.dump(2) + '\n';
}

TrainingConfig parse_training_config_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    TrainingConfig c;
    c.dim = j.at("dim").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.negatives = j.at("negatives").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<unsigned>();
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.subsample_threshold = j.at("subsample_threshold").get<double>();
    c.zero_mixture_weights = j.value("zero_mixture_weights", false);
    return c;
  } catch (const json::exception& e) {
    corrupt(std::string("config: ") + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
  bundle.validate();
  std::filesystem::create_directories(dir);

  std::ostringstream vocab_out, model_out, vectors_out;
  write_vocabulary(vocab_out, bundle.vocabulary);
  write_embedding_model(model_out, bundle.embeddings, bundle.vocabulary);
  write_word_vectors(vectors_out, bundle.embeddings, bundle.vocabulary);

  json manifest;
  manifest["format"] = "mswe-bundle-1";
  json entries = json::array();
  auto add = [&](const char* role, const char* name, const std::string& content) {
    write_file(dir / name, content);
    entries.push_back({{"role", role}, {"file", name}, {"crc32", crc32_hex(content)}});
  };
  add("vocabulary", kVocabularyFile, vocab_out.str());
  if (bundle.topics) {
    std::ostringstream topics_out;
    write_topic_model(topics_out, *bundle.topics);
    add("topics", kTopicsFile, topics_out.str());
  } else {
    std::filesystem::remove(dir / kTopicsFile);
  }
  add("model", kModelFile, model_out.str());
  add("vectors", kVectorsFile, vectors_out.str());
  add("config", kConfigFile, training_config_json(bundle.config));
  manifest["files"] = entries;
  write_file(dir / kManifestFile, manifest.dump(2) + '\n');
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifestFile));
  } catch (const json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  }

  std::map<std::string, std::string> contents;
  for (const auto& entry : manifest.at("files")) {
    const auto role = entry.at("role").get<std::string>();
    const auto name = entry.at("file").get<std::string>();
    auto content = read_file(dir / name);
    if (crc32_hex(content) != entry.at("crc32").get<std::string>()) corrupt("checksum mismatch for " + name);
    contents[role] = std::move(content);
  }
  for (const char* required : {"vocabulary", "model", "config"}) {
    if (!contents.count(required)) corrupt(std::string("manifest lists no ") + required + " file");
  }

  ModelBundle bundle;
  {
    std::istringstream in(contents["vocabulary"]);
    bundle.vocabulary = read_vocabulary(in);
  }
  if (contents.count("topics")) {
    std::istringstream in(contents["topics"]);
    bundle.topics = read_topic_model(in);
  }
  {
    std::istringstream in(contents["model"]);
    bundle.embeddings = read_embedding_model(in, bundle.vocabulary);
  }
  bundle.config = parse_training_config_json(contents["config"]);
  bundle.validate();
  return bundle;
}

}  // namespace mswe
