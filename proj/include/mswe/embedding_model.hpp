#ifndef MSWE_EMBEDDING_MODEL_HPP
#define MSWE_EMBEDDING_MODEL_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "mswe/matrix.hpp"

namespace mswe {

enum class Variant { skipgram, mswe1, mswe2 };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::skipgram: return "skipgram";
    case Variant::mswe1: return "mswe1";
    case Variant::mswe2: return "mswe2";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "skipgram") return Variant::skipgram;
  if (s == "mswe1") return Variant::mswe1;
  if (s == "mswe2") return Variant::mswe2;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

/// Target (v_w), context (v~_w) and topic (v_t) embeddings.
struct EmbeddingModel {
  Matrix<float> target;
  Matrix<float> context;
  Matrix<float> topic;
  Variant variant = Variant::skipgram;

  std::size_t dim() const { return target.cols(); }
  std::size_t vocab_size() const { return target.rows(); }
  std::size_t topics() const { return topic.rows(); }

  bool operator==(const EmbeddingModel&) const = default;
};

}  // namespace mswe

#endif  // MSWE_EMBEDDING_MODEL_HPP
