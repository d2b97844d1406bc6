#include "mswe/noise_table.hpp"

#include <cmath>
#include <stdexcept>

namespace mswe {

NoiseTable::NoiseTable(std::span<const std::uint64_t> counts, double power) {
  const std::size_t n = counts.size();
  if (n == 0) throw std::invalid_argument("noise table over an empty vocabulary");
  if (n > 0xffffffffu) throw std::invalid_argument("vocabulary too large for noise table");

  probs_.resize(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    probs_[i] = counts[i] == 0 ? 0.0 : std::pow(static_cast<double>(counts[i]), power);
    total += probs_[i];
  }
  if (total <= 0) throw std::invalid_argument("noise table needs at least one positive count");
  for (double& p : probs_) p /= total;

  // Vose's construction over weights scaled to mean 1.
  accept_.assign(n, 0.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<WordId> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<WordId>(i);
    scaled[i] = probs_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<WordId>(i));
  }
  while (!small.empty() && !large.empty()) {
    const WordId s = small.back();
    small.pop_back();
    const WordId l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers carry weight 1 up to rounding.
  for (WordId l : large) accept_[l] = 1.0;
  WordId fallback = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (probs_[i] > probs_[fallback]) fallback = static_cast<WordId>(i);
  }
  for (WordId s : small) {
    accept_[s] = probs_[s] > 0 ? 1.0 : 0.0;
    if (probs_[s] == 0) alias_[s] = fallback;
  }
}

}  // namespace mswe
