#pragma once

// High-order spectral clustering: HOSVD factors, one power-iteration step,
// projected row matrices and relaxed k-means on their rows.

#include "tbm/labels.hpp"
#include "tbm/linalg.hpp"
#include "tbm/tensor.hpp"

#include <cstdint>
#include <vector>

namespace tbm {

struct KMeansConfig {
  /// Independent k-means++ seedings; the lowest-cost run wins.
  int restarts = 10;
  /// Lloyd iterations per run; a run also stops once assignments are stable.
  int max_iters = 100;
};

struct KMeansResult {
  Labels labels;
  Matrix centroids;  // r x dim
  double cost = 0.0;
};

/// Squared distance of every row to its centroid, summed.
double kmeans_cost(const Matrix& rows, const Labels& labels, const Matrix& centroids);

/// Best of `restarts` runs of k-means++ seeding followed by Lloyd iterations.
/// Ties in nearest-centroid assignment go to the lowest index; a cluster that
/// empties receives the point farthest from its centroid.
KMeansResult relaxed_kmeans(const Matrix& rows, int r, const KMeansConfig& config, std::uint64_t seed);

struct HscConfig {
  std::vector<int> ranks;
  KMeansConfig kmeans;
  std::uint64_t seed = 0;
};

/// U~_k = SVD_{r_k}(unfold(y, k)).
std::vector<OrthonormalBasis> hosvd_factors(const DenseTensor& y, const std::vector<int>& ranks);

/// y x_{l != k} U_l^T.
DenseTensor project_other_modes(const DenseTensor& y, const std::vector<OrthonormalBasis>& factors, std::size_t mode);

/// U^_k = SVD_{r_k}(unfold(y x_{l != k} U~_l^T, k)).
std::vector<OrthonormalBasis> power_step(const DenseTensor& y, const std::vector<OrthonormalBasis>& hosvd,
                                         const std::vector<int>& ranks);

/// Y^_k = U^_k U^_k^T unfold(y x_{l != k} U^_l^T, k), a p_k x r_{-k} matrix.
Matrix projected_rows(const DenseTensor& y, const std::vector<OrthonormalBasis>& factors, std::size_t mode);

/// Initial labels for every mode.
std::vector<Labels> hsc(const DenseTensor& y, const HscConfig& config);

void validate_ranks(const Shape& shape, const std::vector<int>& ranks);

}  // namespace tbm
