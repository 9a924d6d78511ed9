#include "tml/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tml/embedding.hpp"

namespace tml::kernels {

double cosine_row(std::span<const float> q, double q_norm, std::span<const float> row,
                  double row_norm) {
  double dot = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    dot += static_cast<double>(q[j]) * static_cast<double>(row[j]);
  }
  return dot / (q_norm * row_norm);
}

namespace {

double l2(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

std::uint32_t nearest(std::span<const float> p, std::span<const double> centroids,
                      std::size_t dim, double& best) {
  const std::size_t k = centroids.size() / dim;
  std::uint32_t arg = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    double d = squared_distance(p, centroids.subspan(c * dim, dim));
    if (d < best) {
      best = d;
      arg = static_cast<std::uint32_t>(c);
    }
  }
  return arg;
}

void embed_one(const std::string& text, const Embedder& emb, std::span<float> out,
               std::string& error) {
  try {
    auto v = emb.embed(text);
    std::copy(v.begin(), v.end(), out.begin());
  } catch (const std::exception& ex) {
    error = ex.what();
    std::fill(out.begin(), out.end(), 0.0f);
  }
}

}  // namespace

double squared_distance(std::span<const float> p, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double d = static_cast<double>(p[j]) - c[j];
    s += d * d;
  }
  return s;
}

void cosine_rows_serial(std::span<const float> q, const VectorStore& vs,
                        std::span<const std::size_t> rows, std::span<double> out) {
  const double qn = l2(q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = cosine_row(q, qn, vs.row(rows[i]), vs.norm(rows[i]));
  }
}

void cosine_rows_parallel(std::span<const float> q, const VectorStore& vs,
                          std::span<const std::size_t> rows, std::span<double> out) {
  const double qn = l2(q);
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = rows[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = cosine_row(q, qn, vs.row(r), vs.norm(r));
  }
}

void assign_serial(std::span<const float> points, std::size_t dim,
                   std::span<const double> centroids, std::span<std::uint32_t> labels,
                   std::span<double> dist2) {
  const std::size_t n = points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = nearest(points.subspan(i * dim, dim), centroids, dim, dist2[i]);
  }
}

void assign_parallel(std::span<const float> points, std::size_t dim,
                     std::span<const double> centroids, std::span<std::uint32_t> labels,
                     std::span<double> dist2) {
  const auto n = static_cast<std::ptrdiff_t>(points.size() / dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    labels[u] = nearest(points.subspan(u * dim, dim), centroids, dim, dist2[u]);
  }
}

void embed_serial(std::span<const std::string> texts, const Embedder& emb, std::span<float> out,
                  std::vector<std::string>& errors) {
  const std::size_t dim = emb.dim();
  errors.assign(texts.size(), {});
  for (std::size_t i = 0; i < texts.size(); ++i) {
    embed_one(texts[i], emb, out.subspan(i * dim, dim), errors[i]);
  }
}

void embed_parallel(std::span<const std::string> texts, const Embedder& emb,
                    std::span<float> out, std::vector<std::string>& errors) {
  const std::size_t dim = emb.dim();
  errors.assign(texts.size(), {});
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    embed_one(texts[u], emb, out.subspan(u * dim, dim), errors[u]);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tml::kernels
