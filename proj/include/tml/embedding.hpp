#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tml/event.hpp"

namespace tml {

inline constexpr std::size_t kDefaultDim = 384;

class EmbedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a followed by a splitmix64 finalizer. Platform independent.
std::uint64_t stable_hash(std::string_view s);

/// Signed feature hashing of unigrams and adjacent bigrams, L2-normalized.
/// Throws EmbedError when the text has no tokens.
std::vector<float> hash_embed(std::string_view text, std::size_t dim);

/// dot(a,b) / (|a||b|). Throws std::invalid_argument on dimension mismatch or
/// a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = kDefaultDim);
  std::string name() const override { return "hash"; }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(std::string_view text) const override { return hash_embed(text, dim_); }

 private:
  std::size_t dim_;
};

/// Event ids aligned with half-precision rows. Immutable once built; the
/// dequantized rows and their norms are cached for scoring.
class VectorStore {
 public:
  VectorStore() = default;
  VectorStore(std::size_t dim, std::vector<std::string> ids, std::vector<std::uint16_t> halves);

  /// Quantizes single-precision rows (count x dim, row-major).
  static VectorStore from_floats(std::size_t dim, std::vector<std::string> ids,
                                 std::span<const float> rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::uint16_t>& halves() const { return halves_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const { return values_; }
  double norm(std::size_t i) const { return norms_[i]; }
  const std::vector<double>& norms() const { return norms_; }

  bool operator==(const VectorStore& o) const {
    return dim_ == o.dim_ && ids_ == o.ids_ && halves_ == o.halves_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::uint16_t> halves_;
  std::vector<float> values_;
  std::vector<double> norms_;
};

/// One vector per event in store order, quantized to half precision.
/// Embedding failures are rethrown as EmbedError naming the event id.
VectorStore encode_store(const EventStore& store, const Embedder& emb);

/// Checks that the vector ids are exactly the store ids, in store order.
void check_alignment(const EventStore& store, const VectorStore& vecs);

// ---- "TMV1" vector files -------------------------------------------------

class VectorFileError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kBadVersion, kDimMismatch, kCountMismatch, kTruncated };
  VectorFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Layout: "TMV1", u32 dim, u64 count (little-endian), count newline-terminated
/// ids, then count*dim binary16 values (little-endian).
std::string serialize_vectors(const VectorStore& vs);
VectorStore parse_vectors(std::string_view bytes, std::optional<std::size_t> expected_dim = std::nullopt,
                          std::optional<std::size_t> expected_count = std::nullopt);

void write_vector_file(const std::filesystem::path& path, const VectorStore& vs);
VectorStore read_vector_file(const std::filesystem::path& path,
                             std::optional<std::size_t> expected_dim = std::nullopt,
                             std::optional<std::size_t> expected_count = std::nullopt);

}  // namespace tml
