#pragma once

// The tensor block model Y = S x_1 M_1 ... x_d M_d + E: separation and SNR,
// synthesis and sampling, block-mean estimation, the least-squares objective,
// BIC and the balance condition.

#include "tbm/labels.hpp"
#include "tbm/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tbm {

/// r_1 x ... x r_d tensor of block means.
using CoreTensor = DenseTensor;

struct BlockModel {
  CoreTensor core;
  std::vector<Labels> labels;
  double sigma = 0.0;

  Shape shape() const;
  std::vector<std::size_t> ranks() const;
  /// Throws unless labels and core agree, sigma >= 0 and every cluster is nonempty.
  void validate() const;
};

/// Delta_k^2: minimum squared distance between distinct rows of unfold(core, k).
double delta_sq(const CoreTensor& core, std::size_t mode);
/// Delta_min^2 = min_k Delta_k^2 over modes with at least two clusters.
double delta_min(const CoreTensor& core);
/// Delta_min^2 / sigma^2.
double snr(const CoreTensor& core, double sigma);

/// X_{j_1..j_d} = S_{z_1(j_1), ..., z_d(j_d)}.
DenseTensor synthesize_signal(const CoreTensor& core, const std::vector<Labels>& labels);
DenseTensor synthesize_signal(const BlockModel& model);

/// X + E with E iid N(0, sigma^2) drawn from Random(seed) in canonical order.
DenseTensor sample(const BlockModel& model, std::uint64_t seed);

/// Cluster sizes for p entities in r clusters: balanced (remainder to the first
/// clusters), or with cluster 0 holding round(xi * p) and the rest balanced.
std::vector<std::size_t> cluster_sizes(std::size_t p, int r, std::optional<double> first_fraction = std::nullopt);

/// Deterministic labels realizing `sizes`: round-robin over clusters that still
/// have room, so balanced sizes give j mod r.
Labels labels_from_sizes(const std::vector<std::size_t>& sizes);

struct InstanceSpec {
  std::vector<std::size_t> dims;
  std::vector<int> ranks;
  double sigma = 1.0;
  /// Target Delta_min (not squared).
  double delta = 1.0;
  /// Proportion of cluster 0 in every mode; balanced when empty.
  std::optional<double> first_fraction;
};

/// Delta_min realizing SNR = p^gamma: sigma * p^(gamma / 2).
double delta_for_gamma(std::size_t p, double gamma, double sigma);

/// Core with iid N(0,1) entries rescaled so that Delta_min equals spec.delta
/// exactly (redrawn while the raw Delta_min is below 1e-8).
BlockModel random_instance(const InstanceSpec& spec, std::uint64_t seed);

/// Order-d, p^d instance with r clusters per mode and Delta_min^2 / sigma^2 = p^gamma.
BlockModel random_instance(std::size_t d, std::size_t p, int r, double gamma, double sigma,
                           std::optional<double> first_fraction, std::uint64_t seed);

struct BlockMeans {
  CoreTensor core;
  /// Number of cells with no observations; those cells are 0.
  std::size_t empty_cells = 0;
};

/// Cell-wise averages of y under the given labels.
BlockMeans block_mean_estimate(const DenseTensor& y, const std::vector<Labels>& labels);

/// Blockwise-constant estimate of E[Y] from the estimated labels.
DenseTensor estimate_xhat(const DenseTensor& y, const std::vector<Labels>& labels);

/// sum (Y_j - S_{z(j)})^2.
double objective(const DenseTensor& y, const CoreTensor& core, const std::vector<Labels>& labels);

/// p_* log(rss) + (r_* + sum_k p_k log r_k) log p_*.
double bic_value(const std::vector<std::size_t>& dims, const std::vector<int>& ranks, double rss);

/// BIC of the block-mean fit under `labels`; throws on a zero residual.
double bic(const DenseTensor& y, const std::vector<Labels>& labels);

/// Every cluster size lies in [alpha p / r, beta p / r].
bool balance_check(const Labels& z, double alpha, double beta);

/// {"dims":[...],"ranks":[...],"sigma":s,"core":[...],"labels":[[...],...]}, labels 1-based.
std::string model_to_json(const BlockModel& model);
BlockModel model_from_json(const std::string& text);

}  // namespace tbm
