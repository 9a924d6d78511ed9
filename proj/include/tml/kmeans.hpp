#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tml {

/// Row-major n x dim view over single-precision points.
struct PointSet {
  std::span<const float> data;
  std::size_t dim = 0;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

struct KMeansResult {
  std::vector<std::uint32_t> labels;
  /// k x dim, each row L2-normalized (zero rows stay zero).
  std::vector<float> centroids;
  /// Within-cluster sum of squared distances to the (unnormalized) means.
  double wcss = 0.0;
  int iterations = 0;
  std::size_t k = 0;
};

/// k-means++ seeding from `seed`, then Lloyd iterations until the assignment
/// is a fixpoint or 100 iterations. Empty clusters take the point farthest
/// from its current centroid. Deterministic for fixed inputs.
KMeansResult kmeans(PointSet points, std::size_t k, std::uint64_t seed, int max_iter = 100);

/// Default upper bound for the elbow search: min(9, floor(sqrt(n)), n - 1).
std::size_t default_k_max(std::size_t n);

struct ElbowResult {
  std::size_t k = 1;
  std::vector<double> wcss;  // wcss[j] is WCSS(j + 1)
};

/// Elbow rule: among k in [2, k_max - 1] maximize
/// WCSS(k-1) - 2 WCSS(k) + WCSS(k+1), ties to the smaller k. Returns 1 for
/// n < 4, an empty candidate range, or an already-zero WCSS(1).
ElbowResult select_k(PointSet points, std::size_t k_max, std::uint64_t seed);

}  // namespace tml
