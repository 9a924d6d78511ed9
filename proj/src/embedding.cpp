#include "tml/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tml/half.hpp"
#include "tml/kernels.hpp"

namespace tml {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    // Bytes >= 0x80 belong to UTF-8 sequences and stay inside the token.
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

std::vector<float> hash_embed(std::string_view text, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("embedding dim must be >= 2");
  auto tokens = tokenize(text);
  if (tokens.empty()) throw EmbedError("no tokens to embed in '" + std::string(text) + "'");

  std::vector<double> acc(dim, 0.0);
  auto add = [&](std::string_view feature) {
    std::uint64_t h = stable_hash(feature);
    acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1]);
  }

  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw EmbedError("hashed features cancel out for '" + std::string(text) + "'");

  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 2) throw std::invalid_argument("embedding dim must be >= 2");
}

VectorStore::VectorStore(std::size_t dim, std::vector<std::string> ids,
                         std::vector<std::uint16_t> halves)
    : dim_(dim), ids_(std::move(ids)), halves_(std::move(halves)) {
  if (halves_.size() != ids_.size() * dim_) {
    throw std::invalid_argument("VectorStore: payload size does not match ids x dim");
  }
  values_.resize(halves_.size());
  for (std::size_t i = 0; i < halves_.size(); ++i) values_[i] = half_to_float(halves_[i]);
  norms_.resize(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    double s = 0.0;
    for (float x : row(r)) s += static_cast<double>(x) * static_cast<double>(x);
    norms_[r] = std::sqrt(s);
  }
}

VectorStore VectorStore::from_floats(std::size_t dim, std::vector<std::string> ids,
                                     std::span<const float> rows) {
  std::vector<std::uint16_t> halves(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) halves[i] = float_to_half(rows[i]);
  return VectorStore(dim, std::move(ids), std::move(halves));
}

VectorStore encode_store(const EventStore& store, const Embedder& emb) {
  const std::size_t dim = emb.dim();
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  texts.reserve(store.size());
  ids.reserve(store.size());
  for (const auto& e : store.events()) {
    texts.push_back(e.text_repr);
    ids.push_back(e.event_id);
  }
  std::vector<float> rows(texts.size() * dim);
  std::vector<std::string> errors;
  kernels::embed_parallel(texts, emb, rows, errors);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw EmbedError("event " + ids[i] + ": " + errors[i]);
  }
  return VectorStore::from_floats(dim, std::move(ids), rows);
}

void check_alignment(const EventStore& store, const VectorStore& vecs) {
  if (store.size() != vecs.size()) {
    throw std::invalid_argument("vector store has " + std::to_string(vecs.size()) +
                                " rows but event store has " + std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].event_id != vecs.ids()[i]) {
      throw std::invalid_argument("vector row " + std::to_string(i) + " is '" + vecs.ids()[i] +
                                  "' but event store has '" + store[i].event_id + "'");
    }
  }
}

namespace {

using Kind = VectorFileError::Kind;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view in, std::size_t pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::string serialize_vectors(const VectorStore& vs) {
  std::string out = "TMV1";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vs.dim()));
  put_le<std::uint64_t>(out, vs.size());
  for (const auto& id : vs.ids()) {
    if (id.find('\n') != std::string::npos) {
      throw VectorFileError(Kind::kIo, "event id contains a newline: " + id);
    }
    out += id;
    out.push_back('\n');
  }
  out.reserve(out.size() + vs.halves().size() * 2);
  for (std::uint16_t h : vs.halves()) put_le<std::uint16_t>(out, h);
  return out;
}

VectorStore parse_vectors(std::string_view in, std::optional<std::size_t> expected_dim,
                          std::optional<std::size_t> expected_count) {
  if (in.size() < 4) throw VectorFileError(Kind::kTruncated, "vector file truncated in header");
  if (in.substr(0, 3) != "TMV") throw VectorFileError(Kind::kBadMagic, "not a TMV vector file");
  if (in[3] != '1') {
    throw VectorFileError(Kind::kBadVersion,
                          std::string("unsupported vector file version '") + in[3] + "'");
  }
  if (in.size() < 16) throw VectorFileError(Kind::kTruncated, "vector file truncated in header");
  const auto dim = get_le<std::uint32_t>(in, 4);
  const auto count = get_le<std::uint64_t>(in, 8);
  if (dim == 0 || (expected_dim && dim != *expected_dim)) {
    throw VectorFileError(Kind::kDimMismatch,
                          "vector file dim " + std::to_string(dim) +
                              (expected_dim ? ", expected " + std::to_string(*expected_dim) : ""));
  }
  if (expected_count && count != *expected_count) {
    throw VectorFileError(Kind::kCountMismatch, "vector file has " + std::to_string(count) +
                                                    " vectors, expected " +
                                                    std::to_string(*expected_count));
  }

  std::size_t pos = 16;
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    auto nl = in.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw VectorFileError(Kind::kTruncated, "vector file truncated in id list");
    }
    ids.emplace_back(in.substr(pos, nl - pos));
    pos = nl + 1;
  }

  const std::uint64_t payload = count * dim * 2;
  if (in.size() - pos < payload) {
    throw VectorFileError(Kind::kTruncated, "vector file truncated in payload");
  }
  if (in.size() - pos > payload) {
    throw VectorFileError(Kind::kCountMismatch,
                          "vector file has trailing bytes beyond the declared count");
  }
  std::vector<std::uint16_t> halves(static_cast<std::size_t>(count * dim));
  for (std::size_t i = 0; i < halves.size(); ++i) halves[i] = get_le<std::uint16_t>(in, pos + 2 * i);
  return VectorStore(dim, std::move(ids), std::move(halves));
}

void write_vector_file(const std::filesystem::path& path, const VectorStore& vs) {
  auto bytes = serialize_vectors(vs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw VectorFileError(Kind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw VectorFileError(Kind::kIo, "short write to " + path.string());
}

VectorStore read_vector_file(const std::filesystem::path& path,
                             std::optional<std::size_t> expected_dim,
                             std::optional<std::size_t> expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VectorFileError(Kind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_vectors(ss.str(), expected_dim, expected_count);
}

}  // namespace tml
