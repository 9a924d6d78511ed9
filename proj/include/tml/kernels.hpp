#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version and a serial
// reference that the tests hold it to bit-for-bit; both call the same per-row
// routine so the floating-point evaluation order is identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tml {
class Embedder;
class VectorStore;
}  // namespace tml

namespace tml::kernels {

/// dot(q, row) / (q_norm * |row|) in double, summed in index order.
double cosine_row(std::span<const float> q, double q_norm, std::span<const float> row,
                  double row_norm);

/// out[i] = cosine of q with vs.row(rows[i]).
void cosine_rows_serial(std::span<const float> q, const VectorStore& vs,
                        std::span<const std::size_t> rows, std::span<double> out);
void cosine_rows_parallel(std::span<const float> q, const VectorStore& vs,
                          std::span<const std::size_t> rows, std::span<double> out);

/// Squared Euclidean distance between a float point and a double centroid.
double squared_distance(std::span<const float> p, std::span<const double> c);

/// Nearest centroid per point (lowest index on ties). points is n x dim,
/// centroids k x dim, both row-major.
void assign_serial(std::span<const float> points, std::size_t dim,
                   std::span<const double> centroids, std::span<std::uint32_t> labels,
                   std::span<double> dist2);
void assign_parallel(std::span<const float> points, std::size_t dim,
                     std::span<const double> centroids, std::span<std::uint32_t> labels,
                     std::span<double> dist2);

/// Embeds texts into out (texts.size() x emb.dim()). errors[i] is empty on
/// success, otherwise the failure message for texts[i].
void embed_serial(std::span<const std::string> texts, const Embedder& emb, std::span<float> out,
                  std::vector<std::string>& errors);
void embed_parallel(std::span<const std::string> texts, const Embedder& emb,
                    std::span<float> out, std::vector<std::string>& errors);

/// Threads OpenMP will use for a parallel region (1 without OpenMP).
int max_threads();

}  // namespace tml::kernels
