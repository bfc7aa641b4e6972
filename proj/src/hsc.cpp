#include "tbm/hsc.hpp"

#include "tbm/random.hpp"

#include <limits>
#include <stdexcept>

namespace tbm {

namespace {

int nearest_centroid(const Matrix& rows, Eigen::Index j, const Matrix& centroids, double* distance = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < centroids.rows(); ++a) {
    const double dist = (rows.row(j) - centroids.row(a)).squaredNorm();
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<int>(a);
    }
  }
  if (distance) *distance = best_d;
  return best;
}

Matrix centroids_of(const Matrix& rows, const std::vector<int>& z, int r) {
  Matrix c = Matrix::Zero(r, rows.cols());
  std::vector<double> n(static_cast<std::size_t>(r), 0.0);
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    const int a = z[static_cast<std::size_t>(j)];
    c.row(a) += rows.row(j);
    n[static_cast<std::size_t>(a)] += 1.0;
  }
  for (int a = 0; a < r; ++a) {
    if (n[static_cast<std::size_t>(a)] > 0) c.row(a) /= n[static_cast<std::size_t>(a)];
  }
  return c;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Matrix& rows, std::vector<int>& z, int r) {
  for (int empty = 0; empty < r; ++empty) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(r), 0);
    for (int a : z) ++sizes[static_cast<std::size_t>(a)];
    if (sizes[static_cast<std::size_t>(empty)] > 0) continue;
    const Matrix c = centroids_of(rows, z, r);
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index j = 0; j < rows.rows(); ++j) {
      const int a = z[static_cast<std::size_t>(j)];
      if (sizes[static_cast<std::size_t>(a)] < 2) continue;
      const double dist = (rows.row(j) - c.row(a)).squaredNorm();
      if (dist > far_d) {
        far_d = dist;
        far = j;
      }
    }
    if (far < 0) throw std::logic_error("relaxed_kmeans: cannot repair empty cluster");
    z[static_cast<std::size_t>(far)] = empty;
  }
}

std::vector<int> assign_all(const Matrix& rows, const Matrix& centroids) {
  std::vector<int> z(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index j = 0; j < rows.rows(); ++j) z[static_cast<std::size_t>(j)] = nearest_centroid(rows, j, centroids);
  return z;
}

Matrix kmeanspp_seeds(const Matrix& rows, int r, Random& rng) {
  const Eigen::Index n = rows.rows();
  Matrix seeds(r, rows.cols());
  seeds.row(0) = rows.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Vector d2(n);
  for (Eigen::Index j = 0; j < n; ++j) d2(j) = (rows.row(j) - seeds.row(0)).squaredNorm();
  for (int c = 1; c < r; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (d2(j) <= 0.0) continue;
        pick = j;
        acc += d2(j);
        if (acc > target) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    seeds.row(c) = rows.row(pick);
    for (Eigen::Index j = 0; j < n; ++j) d2(j) = std::min(d2(j), (rows.row(j) - seeds.row(c)).squaredNorm());
  }
  return seeds;
}

KMeansResult kmeans_run(const Matrix& rows, int r, int max_iters, Random& rng) {
  std::vector<int> z = assign_all(rows, kmeanspp_seeds(rows, r, rng));
  repair_empty(rows, z, r);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<int> next = assign_all(rows, centroids_of(rows, z, r));
    repair_empty(rows, next, r);
    const bool stable = next == z;
    z = std::move(next);
    if (stable) break;
  }
  Matrix c = centroids_of(rows, z, r);
  Labels labels(std::move(z), r);
  const double cost = kmeans_cost(rows, labels, c);
  return {std::move(labels), std::move(c), cost};
}

}  // namespace

double kmeans_cost(const Matrix& rows, const Labels& labels, const Matrix& centroids) {
  double cost = 0.0;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) cost += (rows.row(j) - centroids.row(labels[static_cast<std::size_t>(j)])).squaredNorm();
  return cost;
}

KMeansResult relaxed_kmeans(const Matrix& rows, int r, const KMeansConfig& config, std::uint64_t seed) {
  if (r < 1 || r > rows.rows()) {
    throw std::invalid_argument("relaxed_kmeans: need 1 <= r <= rows, got r = " + std::to_string(r));
  }
  if (config.restarts < 1 || config.max_iters < 1) throw std::invalid_argument("relaxed_kmeans: bad config");
  if (!rows.allFinite()) throw std::invalid_argument("relaxed_kmeans: non-finite rows");
  KMeansResult best;
  bool have = false;
  for (int restart = 0; restart < config.restarts; ++restart) {
    Random rng(derive_seed(seed, {static_cast<std::uint64_t>(restart)}));
    KMeansResult run = kmeans_run(rows, r, config.max_iters, rng);
    if (!have || run.cost < best.cost) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

void validate_ranks(const Shape& shape, const std::vector<int>& ranks) {
  if (ranks.size() != shape.order()) throw std::invalid_argument("need one rank per mode");
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    if (ranks[k] < 1 || static_cast<std::size_t>(ranks[k]) > shape[k]) {
      throw std::invalid_argument("rank " + std::to_string(ranks[k]) + " invalid for mode " + std::to_string(k) +
                                  " of extent " + std::to_string(shape[k]));
    }
  }
}

std::vector<OrthonormalBasis> hosvd_factors(const DenseTensor& y, const std::vector<int>& ranks) {
  validate_ranks(y.shape(), ranks);
  std::vector<OrthonormalBasis> u;
  for (std::size_t k = 0; k < y.order(); ++k) {
    u.push_back(top_left_singular_vectors(unfold(y, k), static_cast<std::size_t>(ranks[k])));
  }
  return u;
}

DenseTensor project_other_modes(const DenseTensor& y, const std::vector<OrthonormalBasis>& factors, std::size_t mode) {
  if (factors.size() != y.order()) throw std::invalid_argument("project_other_modes: need one factor per mode");
  DenseTensor z = y;
  for (std::size_t l = 0; l < y.order(); ++l) {
    if (l == mode) continue;
    if (static_cast<std::size_t>(factors[l].rows()) != y.shape()[l]) {
      throw std::invalid_argument("project_other_modes: factor " + std::to_string(l) + " does not match extent");
    }
    z = mode_product(z, factors[l].matrix().transpose(), l);
  }
  return z;
}

std::vector<OrthonormalBasis> power_step(const DenseTensor& y, const std::vector<OrthonormalBasis>& hosvd,
                                         const std::vector<int>& ranks) {
  validate_ranks(y.shape(), ranks);
  std::vector<OrthonormalBasis> u;
  for (std::size_t k = 0; k < y.order(); ++k) {
    u.push_back(top_left_singular_vectors(unfold(project_other_modes(y, hosvd, k), k),
                                          static_cast<std::size_t>(ranks[k])));
  }
  return u;
}

Matrix projected_rows(const DenseTensor& y, const std::vector<OrthonormalBasis>& factors, std::size_t mode) {
  if (mode >= y.order()) throw std::invalid_argument("projected_rows: mode out of range");
  const Matrix& u = factors.at(mode).matrix();
  if (static_cast<std::size_t>(u.rows()) != y.shape()[mode]) throw std::invalid_argument("projected_rows: factor mismatch");
  const Matrix m = unfold(project_other_modes(y, factors, mode), mode);
  return u * (u.transpose() * m);
}

std::vector<Labels> hsc(const DenseTensor& y, const HscConfig& config) {
  const auto tilde = hosvd_factors(y, config.ranks);
  const auto hat = power_step(y, tilde, config.ranks);
  std::vector<Labels> labels;
  for (std::size_t k = 0; k < y.order(); ++k) {
    const Matrix rows = projected_rows(y, hat, k);
    labels.push_back(relaxed_kmeans(rows, config.ranks[k], config.kmeans, derive_seed(config.seed, {k})).labels);
  }
  return labels;
}

}  // namespace tbm
