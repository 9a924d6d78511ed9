#include "tml/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tml/kernels.hpp"

namespace tml {

namespace {

// Uniform draws built directly on the engine output so results do not depend
// on the standard library's distribution implementations.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return rng() % n; }
double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> plus_plus_init(PointSet pts, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = pts.size(), dim = pts.dim;
  std::vector<double> centroids(k * dim);
  auto set_center = [&](std::size_t c, std::size_t p) {
    auto row = pts.row(p);
    std::copy(row.begin(), row.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
  };
  set_center(0, draw_index(rng, n));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = kernels::squared_distance(pts.row(i), {centroids.data(), dim});
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = draw_index(rng, n);
    } else {
      double r = draw_unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > r && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    set_center(c, pick);
    std::span<const double> cent{centroids.data() + c * dim, dim};
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kernels::squared_distance(pts.row(i), cent));
    }
  }
  return centroids;
}

std::vector<std::size_t> compute_means(PointSet pts, std::size_t k,
                                       const std::vector<std::uint32_t>& labels,
                                       std::vector<double>& centroids) {
  const std::size_t dim = pts.dim;
  std::vector<std::size_t> counts(k, 0);
  std::fill(centroids.begin(), centroids.end(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = pts.row(i);
    double* c = centroids.data() + labels[i] * dim;
    for (std::size_t j = 0; j < dim; ++j) c[j] += row[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] /= static_cast<double>(counts[c]);
  }
  return counts;
}

}  // namespace

KMeansResult kmeans(PointSet pts, std::size_t k, std::uint64_t seed, int max_iter) {
  const std::size_t n = pts.size(), dim = pts.dim;
  if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) {
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds n=" +
                                std::to_string(n));
  }

  std::mt19937_64 rng(seed);
  std::vector<double> centroids = plus_plus_init(pts, k, rng);
  std::vector<std::uint32_t> labels(n, 0), next(n, 0);
  std::vector<double> dist2(n, 0.0);

  KMeansResult res;
  res.k = k;
  for (int it = 0; it < max_iter; ++it) {
    kernels::assign_parallel(pts.data, dim, centroids, next, dist2);
    res.iterations = it + 1;
    if (it > 0 && next == labels) break;
    labels.swap(next);

    auto counts = compute_means(pts, k, labels, centroids);
    // Refill empty clusters with the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] < 2) continue;
        if (far == n || dist2[i] > dist2[far]) far = i;
      }
      if (far == n) break;
      --counts[labels[far]];
      labels[far] = static_cast<std::uint32_t>(c);
      counts[c] = 1;
      dist2[far] = 0.0;
      counts = compute_means(pts, k, labels, centroids);
    }
  }

  compute_means(pts, k, labels, centroids);
  res.wcss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.wcss += kernels::squared_distance(pts.row(i), {centroids.data() + labels[i] * dim, dim});
  }
  res.labels = std::move(labels);
  res.centroids.resize(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) norm += centroids[c * dim + j] * centroids[c * dim + j];
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) {
      res.centroids[c * dim + j] =
          norm > 0.0 ? static_cast<float>(centroids[c * dim + j] / norm) : 0.0f;
    }
  }
  return res;
}

std::size_t default_k_max(std::size_t n) {
  if (n < 2) return 1;
  auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  return std::min<std::size_t>({9, root, n - 1});
}

ElbowResult select_k(PointSet pts, std::size_t k_max, std::uint64_t seed) {
  ElbowResult out;
  const std::size_t n = pts.size();
  if (n < 4) return out;
  k_max = std::min(k_max, n);
  if (k_max < 1) return out;

  out.wcss.assign(k_max, 0.0);
  const auto kk = static_cast<std::ptrdiff_t>(k_max);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < kk; ++j) {
    out.wcss[static_cast<std::size_t>(j)] = kmeans(pts, static_cast<std::size_t>(j) + 1, seed).wcss;
  }

  if (out.wcss[0] <= 1e-12 * static_cast<double>(n)) return out;
  double best = 0.0;
  bool found = false;
  for (std::size_t k = 2; k + 1 <= k_max; ++k) {
    double d2 = out.wcss[k - 2] - 2.0 * out.wcss[k - 1] + out.wcss[k];
    if (!found || d2 > best) {
      best = d2;
      out.k = k;
      found = true;
    }
  }
  return out;
}

}  // namespace tml
