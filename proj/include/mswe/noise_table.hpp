#ifndef MSWE_NOISE_TABLE_HPP
#define MSWE_NOISE_TABLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "mswe/corpus.hpp"

namespace mswe {

/// Negative-sampling distribution Pr(c) proportional to count(c)^0.75,
/// sampled in O(1) with Walker's alias method. Entries with a zero count
/// (an unused UNK) get probability 0.
class NoiseTable {
public:
  static constexpr double kPower = 0.75;

  NoiseTable() = default;
  explicit NoiseTable(std::span<const std::uint64_t> counts, double power = kPower);
  explicit NoiseTable(const Vocabulary& vocab) : NoiseTable(vocab.counts()) {}

  std::size_t size() const { return probs_.size(); }
  double probability(WordId id) const { return probs_.at(id); }

  /// Maps 64 uniformly random bits to a word id.
  WordId sample(std::uint64_t bits) const {
    const auto column = static_cast<std::uint32_t>(((bits >> 32) * accept_.size()) >> 32);
    const double coin = static_cast<double>(bits & 0xffffffffu) * 0x1p-32;
    return coin < accept_[column] ? column : alias_[column];
  }

  template <typename Engine>
  WordId operator()(Engine& rng) const {
    return sample(static_cast<std::uint64_t>(rng()));
  }

private:
  std::vector<double> probs_;
  std::vector<double> accept_;
  std::vector<WordId> alias_;
};

}  // namespace mswe

#endif  // MSWE_NOISE_TABLE_HPP
