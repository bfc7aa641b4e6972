#include "tbm/hlloyd.hpp"

#include "cell_iteration.hpp"
#include "tbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tbm {

int default_hlloyd_iterations(const Shape& shape) {
  return std::max(1, static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(shape.max_extent())))));
}

DenseTensor aggregate_mode(const DenseTensor& y, const std::vector<Labels>& labels, std::size_t mode) {
  if (labels.size() != y.order() || mode >= y.order()) throw std::invalid_argument("aggregate_mode: bad mode or labels");
  std::vector<std::vector<int>> maps;
  std::vector<std::size_t> dims;
  for (std::size_t l = 0; l < y.order(); ++l) {
    if (labels[l].size() != y.shape()[l]) throw std::invalid_argument("aggregate_mode: label length mismatch");
    if (l == mode) {
      maps.push_back(detail::identity_map(y.shape()[l]));
      dims.push_back(y.shape()[l]);
    } else {
      if (!labels[l].all_nonempty()) throw EmptyClusterError("aggregate_mode: empty cluster on mode " + std::to_string(l));
      maps.push_back(labels[l].values());
      dims.push_back(static_cast<std::size_t>(labels[l].clusters()));
    }
  }
  const Shape out_shape(std::move(dims));
  std::vector<double> sum(out_shape.total(), 0.0);
  std::vector<std::size_t> count(out_shape.total(), 0);
  detail::for_each_mapped(y.shape(), maps, out_shape, [&](std::size_t flat, std::size_t cell) {
    sum[cell] += y[flat];
    ++count[cell];
  });
  for (std::size_t c = 0; c < sum.size(); ++c) sum[c] /= static_cast<double>(count[c]);
  return DenseTensor(out_shape, std::move(sum));
}

namespace {

Matrix squared_distances(const Matrix& rows, const Matrix& centers) {
  Matrix d(rows.rows(), centers.rows());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    for (Eigen::Index a = 0; a < centers.rows(); ++a) d(j, a) = (rows.row(j) - centers.row(a)).squaredNorm();
  }
  return d;
}

// Refills empty clusters with the entity farthest from its assigned core row.
std::size_t repair_empty_clusters(Labels& z, const Matrix& distances) {
  std::size_t repairs = 0;
  for (int empty = 0; empty < z.clusters(); ++empty) {
    auto sizes = z.cluster_sizes();
    if (sizes[static_cast<std::size_t>(empty)] > 0) continue;
    std::size_t far = z.size();
    double far_d = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (sizes[static_cast<std::size_t>(z[j])] < 2) continue;
      const double dj = distances(static_cast<Eigen::Index>(j), z[j]);
      if (dj > far_d) {
        far_d = dj;
        far = j;
      }
    }
    if (far == z.size()) throw EmptyClusterError("hlloyd: cannot refill empty cluster");
    z.assign(far, empty);
    ++repairs;
  }
  return repairs;
}

Labels nearest_rows(const Matrix& distances, int clusters) {
  std::vector<int> z(static_cast<std::size_t>(distances.rows()));
  for (Eigen::Index j = 0; j < distances.rows(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < distances.cols(); ++a) {
      if (distances(j, a) < distances(j, best)) best = a;
    }
    z[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return Labels(std::move(z), clusters);
}

void require_conformable(const DenseTensor& agg, const CoreTensor& core, std::size_t mode) {
  if (agg.order() != core.order() || mode >= agg.order()) throw std::invalid_argument("assign_mode: order mismatch");
  for (std::size_t l = 0; l < agg.order(); ++l) {
    if (l != mode && agg.shape()[l] != core.shape()[l]) throw std::invalid_argument("assign_mode: shape mismatch");
  }
}

}  // namespace

Labels assign_mode(const DenseTensor& agg, const CoreTensor& core, std::size_t mode) {
  require_conformable(agg, core, mode);
  const Matrix d = squared_distances(unfold(agg, mode), unfold(core, mode));
  return nearest_rows(d, static_cast<int>(core.shape()[mode]));
}

HLloydResult hlloyd(const DenseTensor& y, const std::vector<Labels>& init, const HLloydConfig& config) {
  if (init.size() != y.order()) throw std::invalid_argument("hlloyd: need one label vector per mode");
  for (std::size_t k = 0; k < init.size(); ++k) {
    if (init[k].size() != y.shape()[k]) throw std::invalid_argument("hlloyd: label length mismatch on mode " + std::to_string(k));
    if (!init[k].all_nonempty()) throw EmptyClusterError("hlloyd: initial labels leave a cluster empty on mode " + std::to_string(k));
  }
  const int rounds = config.max_iters.value_or(default_hlloyd_iterations(y.shape()));
  if (rounds < 1) throw std::invalid_argument("hlloyd: max_iters must be at least 1");

  HLloydResult result{init, {}};
  auto& z = result.labels;
  for (int t = 0; t < rounds; ++t) {
    const CoreTensor core = block_mean_estimate(y, z).core;
    result.trace.objectives.push_back(objective(y, core, z));
    const std::vector<Labels> start = z;
    std::vector<std::size_t> changes(y.order(), 0), repairs(y.order(), 0);
    for (std::size_t k = 0; k < y.order(); ++k) {
      const auto& context = config.order == UpdateOrder::simultaneous ? start : z;
      const DenseTensor agg = aggregate_mode(y, context, k);
      const Matrix distances = squared_distances(unfold(agg, k), unfold(core, k));
      Labels updated = nearest_rows(distances, z[k].clusters());
      repairs[k] = repair_empty_clusters(updated, distances);
      for (std::size_t j = 0; j < updated.size(); ++j) changes[k] += updated[j] != z[k][j] ? 1 : 0;
      z[k] = std::move(updated);
    }
    result.trace.changes.push_back(changes);
    result.trace.repairs.push_back(repairs);
    bool any = false;
    for (std::size_t c : changes) any = any || c > 0;
    if (config.early_stop && !any) break;
  }
  return result;
}

void write_trace_csv(std::ostream& out, const HLloydTrace& trace) {
  const std::size_t d = trace.changes.empty() ? 0 : trace.changes.front().size();
  out << "iter,objective";
  for (std::size_t k = 0; k < d; ++k) out << ",changes_mode_" << k + 1;
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < trace.iterations(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.objectives[t]);
    out << t + 1 << ',' << buf;
    for (std::size_t c : trace.changes[t]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace tbm
