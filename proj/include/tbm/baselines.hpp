#pragma once

// Comparison methods: HOOI low-rank estimation, k-means on HOSVD factors, the
// contaminated-truth oracle refined by HLloyd, and the exhaustive least-squares
// solution for tiny instances.

#include "tbm/block_model.hpp"
#include "tbm/hlloyd.hpp"
#include "tbm/hsc.hpp"
#include "tbm/random.hpp"

#include <cstdint>
#include <vector>

namespace tbm {

struct HooiConfig {
  int max_sweeps = 10;
  /// Stop once every factor projector moves less than this (Frobenius).
  double projector_tol = 1e-8;
};

struct HooiResult {
  DenseTensor estimate;
  std::vector<OrthonormalBasis> factors;
  /// ||y - estimate||_F after each sweep.
  std::vector<double> residuals;
};

/// HOSVD-initialized alternating truncated SVDs; the estimate is
/// y x_0 U_0 U_0^T ... x_{d-1} U_{d-1} U_{d-1}^T.
HooiResult hooi_estimate(const DenseTensor& y, const std::vector<int>& ranks, const HooiConfig& config = {});

/// k-means on the rows of each HOSVD factor.
std::vector<Labels> hosvd_cluster(const DenseTensor& y, const std::vector<int>& ranks, const KMeansConfig& kmeans,
                                  std::uint64_t seed);

struct OracleConfig {
  /// Fraction of entities per mode whose label is redrawn uniformly.
  double contamination = 0.2;
  std::uint64_t seed = 0;
};

/// Redraws floor(fraction * p) distinct entries uniformly from [0, r). The
/// redrawn value may equal the original.
Labels contaminate(const Labels& truth, double fraction, Random& rng);

HLloydResult oracle_estimate(const DenseTensor& y, const std::vector<Labels>& truth, const OracleConfig& config,
                             const HLloydConfig& hlloyd_config = {});

struct MleResult {
  std::vector<Labels> labels;
  CoreTensor core;
  double objective = 0.0;
};

/// Global least-squares minimizer over every label assignment (ties go to the
/// lexicographically smallest label tuple). Requires prod_k r_k^{p_k} <= 1e7.
MleResult brute_force_mle(const DenseTensor& y, const std::vector<int>& ranks);

}  // namespace tbm
