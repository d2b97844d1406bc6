#ifndef MSWE_TESTS_GRADIENT_ORACLE_HPP
#define MSWE_TESTS_GRADIENT_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "mswe/mixture.hpp"
#include "mswe/trainer.hpp"

// The update applied by the training kernel with lr = 1 must equal minus
// the central finite-difference gradient of the composed objective.
namespace mswe::testing {

using Vec = std::vector<double>;

struct Instance {
  Vec target;
  Matrix<double> topics;
  Matrix<double> context;  // row 0 positive, rows 1.. negatives
  std::vector<std::size_t> negative_rows;
  MixtureWeights weights;
  Variant variant;
};

inline Instance random_instance(std::mt19937_64& rng, Variant variant) {
  const std::size_t dim = 5, T = 3, K = 4;
  std::normal_distribution<double> normal(0.0, 0.6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Instance in{Vec(dim), Matrix<double>(T, dim), Matrix<double>(K + 1, dim), {}, {}, variant};
  for (auto& x : in.target) x = normal(rng);
  for (auto& x : in.topics.data()) x = normal(rng);
  for (auto& x : in.context.data()) x = normal(rng);
  for (std::size_t k = 0; k < K; ++k) {
    // occasionally repeat a negative so accumulation is exercised
    in.negative_rows.push_back(k > 0 && unit(rng) < 0.2 ? in.negative_rows.back() : 1 + k);
  }
  Vec lambda(T);
  for (auto& l : lambda) l = unit(rng) * unit(rng);
  in.weights = MixtureWeights::from(lambda);
  return in;
}

inline double objective(const Instance& in) {
  const auto comp = composition_for(in.variant, in.weights);
  Vec s(in.target.size());
  compose_into<double>(in.target, in.topics, comp, s);
  Matrix<double> negs(in.negative_rows.size(), s.size());
  for (std::size_t k = 0; k < in.negative_rows.size(); ++k) {
    std::copy(in.context.row(in.negative_rows[k]).begin(), in.context.row(in.negative_rows[k]).end(),
              negs.row(k).begin());
  }
  return negative_sampling_loss<double>(s, in.context.row(0), negs);
}

// Flattened parameters: target, topics, context.
inline std::vector<double*> parameters(Instance& in) {
  std::vector<double*> p;
  for (auto& x : in.target) p.push_back(&x);
  for (auto& x : in.topics.data()) p.push_back(&x);
  for (auto& x : in.context.data()) p.push_back(&x);
  return p;
}

inline double gradient_check_error(Instance base) {
  Instance stepped = base;
  {
    std::vector<std::span<double>> negs;
    for (auto r : stepped.negative_rows) negs.push_back(stepped.context.row(r));
    StepWorkspace<double> ws;
    negative_sampling_step<double>(stepped.target, stepped.topics, composition_for(base.variant, base.weights),
                                   stepped.context.row(0), negs, 1.0, ws);
  }
  Instance probe = base;
  auto p_base = parameters(base);
  auto p_step = parameters(stepped);
  auto p_probe = parameters(probe);
  const double h = 1e-6;
  double diff2 = 0, norm2 = 0;
  for (std::size_t i = 0; i < p_probe.size(); ++i) {
    const double analytic = *p_base[i] - *p_step[i];
    const double keep = *p_probe[i];
    *p_probe[i] = keep + h;
    const double up = objective(probe);
    *p_probe[i] = keep - h;
    const double down = objective(probe);
    *p_probe[i] = keep;
    const double numeric = (up - down) / (2 * h);
    diff2 += (analytic - numeric) * (analytic - numeric);
    norm2 += std::max(analytic * analytic, numeric * numeric);
  }
  return std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-12);
}

}  // namespace mswe::testing

#endif  // MSWE_TESTS_GRADIENT_ORACLE_HPP
