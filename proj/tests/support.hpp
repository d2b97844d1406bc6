#ifndef MSWE_TESTS_SUPPORT_HPP
#define MSWE_TESTS_SUPPORT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mswe/corpus.hpp"
#include "mswe/lda.hpp"
#include "mswe/matrix.hpp"

namespace mswe::testing {

namespace fs = std::filesystem;

class TempDir {
public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("mswe-test-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Three topics over V=30 with disjoint supports of 10 words each and
// uneven weights inside each support.
inline Matrix<double> disjoint_topics(std::size_t topics = 3, std::size_t support = 10) {
  Matrix<double> phi(topics, topics * support, 0.0);
  for (std::size_t t = 0; t < topics; ++t) {
    double total = 0;
    for (std::size_t j = 0; j < support; ++j) total += static_cast<double>(j + 1);
    for (std::size_t j = 0; j < support; ++j) phi(t, t * support + j) = static_cast<double>(j + 1) / total;
  }
  return phi;
}

inline std::vector<double> sample_dirichlet(double alpha, std::size_t k, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> x(k);
  double total = 0;
  for (auto& v : x) total += (v = gamma(rng));
  if (total == 0) {
    x.assign(k, 0.0);
    x[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return x;
  }
  for (auto& v : x) v /= total;
  return x;
}

inline WordId sample_categorical(std::span<const double> p, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (u < p[i]) return static_cast<WordId>(i);
    u -= p[i];
  }
  return static_cast<WordId>(p.size() - 1);
}

struct SyntheticCorpus {
  Matrix<double> phi;
  std::vector<std::vector<double>> theta;
  EncodedCorpus corpus;
};

// Standard LDA generative process with a sparse document prior.
inline SyntheticCorpus generate_lda_corpus(const Matrix<double>& phi, std::size_t docs, std::size_t length,
                                           double doc_alpha, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SyntheticCorpus out{phi, {}, {}};
  for (std::size_t d = 0; d < docs; ++d) {
    auto theta = sample_dirichlet(doc_alpha, phi.rows(), rng);
    Document doc;
    for (std::size_t i = 0; i < length; ++i) {
      const auto t = sample_categorical(theta, rng);
      doc.push_back(sample_categorical(phi.row(t), rng));
    }
    out.theta.push_back(std::move(theta));
    out.corpus.documents.push_back(std::move(doc));
  }
  return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

struct Alignment {
  // learned topic matched to each true topic
  std::vector<std::size_t> match;
  double mean_tv = 0;
};

// Repeatedly pairs the closest remaining (true, learned) rows.
inline Alignment greedy_align(const Matrix<double>& truth, const Matrix<double>& learned) {
  const std::size_t T = truth.rows();
  Alignment a{std::vector<std::size_t>(T, 0), 0.0};
  std::vector<bool> used_true(T, false), used_learned(learned.rows(), false);
  for (std::size_t round = 0; round < T; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < T; ++i) {
      if (used_true[i]) continue;
      for (std::size_t j = 0; j < learned.rows(); ++j) {
        if (used_learned[j]) continue;
        const double tv = total_variation(truth.row(i), learned.row(j));
        if (tv < best) best = tv, bi = i, bj = j;
      }
    }
    used_true[bi] = used_learned[bj] = true;
    a.match[bi] = bj;
    a.mean_tv += best / static_cast<double>(T);
  }
  return a;
}

// Small corpus with topical structure: each document draws from one of a
// few word groups plus shared filler words. Tokens are "w<i>".
// Alphabetic token for an index (3 -> "wd", 30 -> "wda"), so preprocessing
// leaves it intact.
inline std::string word_name(std::size_t i) {
  std::string out = "w";
  for (char c : std::to_string(i)) out += static_cast<char>('a' + (c - '0'));
  return out;
}

inline std::vector<std::vector<std::string>> tiny_text_corpus(std::size_t total_tokens, std::size_t vocab,
                                                              std::size_t doc_length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t groups = 4;
  const std::size_t per_group = vocab / groups;
  std::vector<std::vector<std::string>> docs;
  std::size_t produced = 0;
  while (produced < total_tokens) {
    const std::size_t group = std::uniform_int_distribution<std::size_t>(0, groups - 1)(rng);
    std::vector<std::string> doc;
    const std::size_t len = std::min(doc_length, total_tokens - produced);
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t w;
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.8) {
        // skewed within the group
        const double u = std::uniform_real_distribution<double>(0, 1)(rng);
        w = group * per_group + static_cast<std::size_t>(u * u * static_cast<double>(per_group));
      } else {
        w = std::uniform_int_distribution<std::size_t>(0, vocab - 1)(rng);
      }
      doc.push_back(word_name(w));
    }
    produced += len;
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace mswe::testing

#endif  // MSWE_TESTS_SUPPORT_HPP
