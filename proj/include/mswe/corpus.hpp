#ifndef MSWE_CORPUS_HPP
#define MSWE_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mswe {

using WordId = std::uint32_t;
using Document = std::vector<WordId>;

inline constexpr std::string_view kUnkToken = "<unk>";

/// Lowercases, replaces every maximal number (digits with single '.' or ','
/// separators between them) by "0" in place ("1990s" -> "0s"), removes
/// characters of the Unicode P* and S* categories, and splits on whitespace.
std::vector<std::string> preprocess_text(std::string_view raw);

/// Token <-> id map over the most frequent corpus tokens. UNK always holds
/// the last id; its count is the number of corpus occurrences that fell
/// outside the retained set.
class Vocabulary {
public:
  Vocabulary() = default;

  /// Builds from explicit (token, count) pairs already in id order. The UNK
  /// entry is appended with `unk_count`. Throws on duplicates, non-positive
  /// counts or a token spelled like UNK.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts,
             std::uint64_t unk_count);

  std::size_t size() const { return tokens_.size(); }
  WordId unk_id() const { return static_cast<WordId>(tokens_.size() - 1); }

  /// Id of `token`, or UNK when absent.
  WordId id(std::string_view token) const;
  std::optional<WordId> find(std::string_view token) const;
  const std::string& token(WordId id) const { return tokens_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_;
  }

private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, Hash, std::equal_to<>> index_;
};

/// Keeps the `max_size` most frequent tokens (ties broken by ascending byte
/// order) plus UNK. Throws std::invalid_argument("empty corpus") when the
/// corpus contains no tokens.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& documents,
                            std::size_t max_size);

/// Counting pass shared by the in-memory and streaming builders.
class VocabularyCounter {
public:
  void add(const std::vector<std::string>& tokens);
  Vocabulary finish(std::size_t max_size) const;

private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Document encode_document(const std::vector<std::string>& tokens, const Vocabulary& vocab);
std::vector<std::string> decode_document(const Document& ids, const Vocabulary& vocab);

struct EncodedCorpus {
  std::vector<Document> documents;

  std::size_t doc_count() const { return documents.size(); }
  std::size_t total_tokens() const;
};

/// Splits a pre-tokenized line on ASCII whitespace.
std::vector<std::string> split_tokens(std::string_view line);

/// Reads a corpus file (one document per line, tokens separated by spaces).
/// Lines are taken as already preprocessed.
std::vector<std::vector<std::string>> read_tokenized_corpus(const std::filesystem::path& path);
EncodedCorpus encode_corpus_file(const std::filesystem::path& path, const Vocabulary& vocab);
EncodedCorpus encode_corpus(const std::vector<std::vector<std::string>>& documents,
                            const Vocabulary& vocab);

void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace mswe

#endif  // MSWE_CORPUS_HPP
