#include "mswe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace mswe {
namespace {

bool is_punct_or_symbol(UChar32 c) {
  const auto mask = U_GET_GC_MASK(c);
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

bool is_digit(UChar32 c) { return u_charType(c) == U_DECIMAL_DIGIT_NUMBER; }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

std::vector<UChar32> decode_lowercase(std::string_view raw) {
  std::vector<UChar32> cps;
  cps.reserve(raw.size());
  const auto* s = reinterpret_cast<const uint8_t*>(raw.data());
  const auto length = static_cast<int32_t>(raw.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) continue;  // ill-formed byte sequence
    cps.push_back(u_tolower(c));
  }
  return cps;
}

}  // namespace

std::vector<std::string> preprocess_text(std::string_view raw) {
  const auto cps = decode_lowercase(raw);
  std::string cleaned;
  cleaned.reserve(raw.size() + 8);
  // Set after a number is written, cleared by any other kept character, so
  // numbers separated only by dropped punctuation ("1-2") collapse to one 0.
  bool after_number = false;
  for (std::size_t i = 0; i < cps.size();) {
    const UChar32 c = cps[i];
    if (is_digit(c)) {
      // Number run: digits, optionally joined by a single '.' or ','.
      std::size_t j = i + 1;
      while (j < cps.size()) {
        if (is_digit(cps[j])) {
          ++j;
        } else if ((cps[j] == '.' || cps[j] == ',') && j + 1 < cps.size() && is_digit(cps[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      if (!after_number) cleaned += '0';
      after_number = true;
      i = j;
      continue;
    }
    if (u_isUWhiteSpace(c)) {
      cleaned += ' ';
      after_number = false;
    } else if (!is_punct_or_symbol(c)) {
      append_utf8(cleaned, c);
      after_number = false;
    }
    ++i;
  }
  return split_tokens(cleaned);
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const auto is_space = [](char ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts,
                       std::uint64_t unk_count)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  if (tokens_.size() != counts_.size()) {
    throw std::invalid_argument("vocabulary: token and count lists differ in length");
  }
  index_.reserve(tokens_.size() + 1);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw std::invalid_argument("vocabulary: empty token");
    if (tokens_[i] == kUnkToken) throw std::invalid_argument("vocabulary: reserved token <unk>");
    if (counts_[i] == 0) {
      throw std::invalid_argument("vocabulary: non-positive count for '" + tokens_[i] + "'");
    }
    if (!index_.emplace(tokens_[i], static_cast<WordId>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
  tokens_.emplace_back(kUnkToken);
  counts_.push_back(unk_count);
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view token) const { return find(token).value_or(unk_id()); }

void VocabularyCounter::add(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) ++counts_[t];
  total_ += tokens.size();
}

Vocabulary VocabularyCounter::finish(std::size_t max_size) const {
  if (max_size < 1) throw std::invalid_argument("max_size must be at least 1");
  if (total_ == 0) throw std::invalid_argument("empty corpus");
  std::vector<std::pair<std::string_view, std::uint64_t>> entries;
  entries.reserve(counts_.size());
  for (const auto& [token, count] : counts_) {
    // A literal "<unk>" in the corpus is folded into UNK.
    if (token != kUnkToken) entries.emplace_back(token, count);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (entries.size() > max_size) entries.resize(max_size);

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(entries.size());
  counts.reserve(entries.size());
  std::uint64_t retained = 0;
  for (const auto& [token, count] : entries) {
    tokens.emplace_back(token);
    counts.push_back(count);
    retained += count;
  }
  return Vocabulary(std::move(tokens), std::move(counts), total_ - retained);
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& documents,
                            std::size_t max_size) {
  VocabularyCounter counter;
  for (const auto& doc : documents) counter.add(doc);
  return counter.finish(max_size);
}

Document encode_document(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  Document ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

std::vector<std::string> decode_document(const Document& ids, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (auto id : ids) tokens.push_back(vocab.token(id));
  return tokens;
}

std::size_t EncodedCorpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.size();
  return n;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::vector<std::vector<std::string>> read_tokenized_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<std::string>> docs;
  std::string line;
  while (std::getline(in, line)) docs.push_back(split_tokens(line));
  return docs;
}

EncodedCorpus encode_corpus_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_input(path);
  EncodedCorpus corpus;
  std::string line;
  while (std::getline(in, line)) corpus.documents.push_back(encode_document(split_tokens(line), vocab));
  return corpus;
}

EncodedCorpus encode_corpus(const std::vector<std::vector<std::string>>& documents,
                            const Vocabulary& vocab) {
  EncodedCorpus corpus;
  corpus.documents.reserve(documents.size());
  for (const auto& d : documents) corpus.documents.push_back(encode_document(d, vocab));
  return corpus;
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.tokens()[i] << '\t' << vocab.counts()[i] << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": expected token<TAB>count");
    }
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": bad count");
    }
    tokens.push_back(line.substr(0, tab));
    counts.push_back(count);
  }
  if (tokens.empty() || tokens.back() != kUnkToken) {
    throw std::runtime_error("vocabulary: last entry must be <unk>");
  }
  const auto unk_count = counts.back();
  tokens.pop_back();
  counts.pop_back();
  return Vocabulary(std::move(tokens), std::move(counts), unk_count);
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_vocabulary(out, vocab);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_vocabulary(in);
}

}  // namespace mswe
