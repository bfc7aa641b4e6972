#include "tbm/baselines.hpp"

#include "cell_iteration.hpp"
#include "tbm/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace tbm {

namespace {

DenseTensor reconstruct(const DenseTensor& y, const std::vector<OrthonormalBasis>& u) {
  DenseTensor core = y;
  for (std::size_t k = 0; k < y.order(); ++k) core = mode_product(core, u[k].matrix().transpose(), k);
  for (std::size_t k = 0; k < y.order(); ++k) core = mode_product(core, u[k].matrix(), k);
  return core;
}

}  // namespace

HooiResult hooi_estimate(const DenseTensor& y, const std::vector<int>& ranks, const HooiConfig& config) {
  if (config.max_sweeps < 1) throw std::invalid_argument("hooi_estimate: need at least one sweep");
  HooiResult result;
  result.factors = hosvd_factors(y, ranks);
  auto& u = result.factors;
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t k = 0; k < y.order(); ++k) {
      OrthonormalBasis next = top_left_singular_vectors(unfold(project_other_modes(y, u, k), k),
                                                        static_cast<std::size_t>(ranks[k]));
      moved = std::max(moved, projector_distance(next.matrix(), u[k].matrix()));
      u[k] = std::move(next);
    }
    result.estimate = reconstruct(y, u);
    result.residuals.push_back(frobenius(y - result.estimate));
    if (moved < config.projector_tol) break;
  }
  return result;
}

std::vector<Labels> hosvd_cluster(const DenseTensor& y, const std::vector<int>& ranks, const KMeansConfig& kmeans,
                                  std::uint64_t seed) {
  const auto u = hosvd_factors(y, ranks);
  std::vector<Labels> labels;
  for (std::size_t k = 0; k < y.order(); ++k) {
    labels.push_back(relaxed_kmeans(u[k].matrix(), ranks[k], kmeans, derive_seed(seed, {k})).labels);
  }
  return labels;
}

Labels contaminate(const Labels& truth, double fraction, Random& rng) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("contaminate: fraction must lie in [0, 1)");
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(truth.size())));
  Labels out = truth;
  for (std::size_t j : rng.sample_without_replacement(truth.size(), count)) {
    out.assign(j, static_cast<int>(rng.index(static_cast<std::size_t>(truth.clusters()))));
  }
  return out;
}

HLloydResult oracle_estimate(const DenseTensor& y, const std::vector<Labels>& truth, const OracleConfig& config,
                             const HLloydConfig& hlloyd_config) {
  if (!(config.contamination >= 0.0 && config.contamination < 1.0)) {
    throw std::invalid_argument("oracle_estimate: contamination must lie in [0, 1)");
  }
  std::vector<Labels> init;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    // Redraw until no cluster is emptied; attempt 0 is the common case.
    for (std::uint64_t attempt = 0;; ++attempt) {
      Random rng(derive_seed(config.seed, {k, attempt}));
      Labels z = contaminate(truth[k], config.contamination, rng);
      if (z.all_nonempty()) {
        init.push_back(std::move(z));
        break;
      }
      if (attempt > 1000) throw EmptyClusterError("oracle_estimate: contamination keeps emptying a cluster");
    }
  }
  return hlloyd(y, init, hlloyd_config);
}

MleResult brute_force_mle(const DenseTensor& y, const std::vector<int>& ranks) {
  validate_ranks(y.shape(), ranks);
  const std::size_t d = y.order();
  double space = 1.0;
  for (std::size_t k = 0; k < d; ++k) space *= std::pow(static_cast<double>(ranks[k]), static_cast<double>(y.shape()[k]));
  if (space > 1e7) throw std::invalid_argument("brute_force_mle: label space too large for enumeration");

  std::vector<std::size_t> r_dims(ranks.begin(), ranks.end());
  const Shape cells(r_dims);
  std::vector<std::vector<int>> z(d);
  for (std::size_t k = 0; k < d; ++k) z[k].assign(y.shape()[k], 0);
  double sum_sq = 0.0;
  for (double v : y.data()) sum_sq += v * v;

  MleResult best;
  bool have = false;
  std::vector<double> sum(cells.total());
  std::vector<std::size_t> count(cells.total());
  for (;;) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    detail::for_each_mapped(y.shape(), z, cells, [&](std::size_t flat, std::size_t cell) {
      sum[cell] += y[flat];
      ++count[cell];
    });
    double obj = sum_sq;
    for (std::size_t c = 0; c < cells.total(); ++c) {
      if (count[c] > 0) obj -= sum[c] * sum[c] / static_cast<double>(count[c]);
    }
    obj = std::max(obj, 0.0);
    if (!have || obj < best.objective - 1e-12 * (1.0 + std::abs(best.objective))) {
      have = true;
      best.objective = obj;
      best.labels.clear();
      for (std::size_t k = 0; k < d; ++k) best.labels.emplace_back(z[k], ranks[k]);
    }
    // Odometer over the concatenated label tuple, last entry fastest.
    bool advanced = false;
    for (std::size_t k = d; k-- > 0 && !advanced;) {
      for (std::size_t j = z[k].size(); j-- > 0;) {
        if (++z[k][j] < ranks[k]) {
          advanced = true;
          break;
        }
        z[k][j] = 0;
      }
    }
    if (!advanced) break;
  }
  best.core = block_mean_estimate(y, best.labels).core;
  best.objective = objective(y, best.core, best.labels);
  return best;
}

}  // namespace tbm
