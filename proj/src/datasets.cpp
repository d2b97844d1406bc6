#include <algorithm>
#include <cmath>
#include <optional>
#include <fstream>
#include <stdexcept>

#include "mswe/eval.hpp"
#include "mswe/number_format.hpp"

namespace mswe {
namespace {

std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string strip_markers(std::string text) {
  for (std::string_view marker : {"<b>", "</b>"}) {
    for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker, pos)) {
      text.replace(pos, marker.size(), " ");
    }
  }
  return text;
}

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::optional<double> try_score(const std::string& field) {
  try {
    const double v = parse_number<double>(field, "score");
    if (std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

bool SimilarityDataset::has_contexts() const {
  return !pairs.empty() && std::all_of(pairs.begin(), pairs.end(), [](const SimilarityPair& p) {
    return p.context1.has_value() && p.context2.has_value();
  });
}

std::size_t AnalogyDataset::semantic_count() const {
  std::size_t n = 0;
  for (const auto& [name, count] : categories) {
    if (!is_syntactic(name)) n += count;
  }
  return n;
}

std::size_t AnalogyDataset::syntactic_count() const { return questions.size() - semantic_count(); }

SimilarityDataset read_similarity_dataset(std::istream& in, std::string name) {
  SimilarityDataset ds{std::move(name), {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty() || line.starts_with('#')) continue;
    const auto tabbed = split_on(line, '\t');
    const auto where = ds.name + " line " + std::to_string(line_no);

    if (tabbed.size() >= 8) {
      // SCWS
      const auto score = try_score(tabbed[7]);
      if (!score) throw std::runtime_error(where + ": bad SCWS average score");
      ds.pairs.push_back({tabbed[1], tabbed[3], *score, strip_markers(tabbed[5]), strip_markers(tabbed[6])});
      continue;
    }
    const auto fields = tabbed.size() >= 3 ? tabbed : split_tokens(line);
    if (fields.size() < 3) throw std::runtime_error(where + ": expected 'word1 word2 score'");
    const auto score = try_score(fields[2]);
    if (!score) {
      if (ds.pairs.empty()) continue;  // column header
      throw std::runtime_error(where + ": bad score '" + fields[2] + "'");
    }
    ds.pairs.push_back({fields[0], fields[1], *score, std::nullopt, std::nullopt});
  }
  if (ds.pairs.empty()) throw std::runtime_error(ds.name + ": no word pairs");
  return ds;
}

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return read_similarity_dataset(in, path.stem().string());
}

AnalogyDataset read_analogy_dataset(std::istream& in) {
  AnalogyDataset ds;
  std::string line;
  std::string category;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.starts_with(':')) {
      const auto parts = split_tokens(std::string_view(line).substr(1));
      category = parts.empty() ? std::string("uncategorized") : parts.front();
      ds.categories.emplace_back(category, 0);
      continue;
    }
    const auto words = split_tokens(line);
    if (words.empty()) continue;
    if (words.size() != 4) {
      throw std::runtime_error("analogy line " + std::to_string(line_no) + ": expected 4 words");
    }
    if (ds.categories.empty()) ds.categories.emplace_back("uncategorized", 0);
    ++ds.categories.back().second;
    ds.questions.push_back({words[0], words[1], words[2], words[3], ds.categories.back().first});
  }
  return ds;
}

AnalogyDataset load_analogy_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return read_analogy_dataset(in);
}

}  // namespace mswe
