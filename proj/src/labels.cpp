#include "tbm/labels.hpp"

#include "tbm/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tbm {

Labels::Labels(std::vector<int> assignment, int clusters) : z_(std::move(assignment)), r_(clusters) {
  if (z_.empty()) throw std::invalid_argument("Labels: empty assignment");
  if (r_ < 1) throw std::invalid_argument("Labels: cluster count must be positive");
  for (int v : z_) {
    if (v < 0 || v >= r_) {
      throw std::invalid_argument("Labels: entry " + std::to_string(v) + " outside [0, " +
                                  std::to_string(r_) + ")");
    }
  }
}

Labels Labels::from_one_based(const std::vector<int>& assignment, int clusters) {
  std::vector<int> z(assignment.size());
  std::transform(assignment.begin(), assignment.end(), z.begin(), [](int v) { return v - 1; });
  return Labels(std::move(z), clusters);
}

void Labels::assign(std::size_t j, int cluster) {
  if (cluster < 0 || cluster >= r_) throw std::invalid_argument("Labels::assign: cluster out of range");
  z_.at(j) = cluster;
}

std::vector<std::size_t> Labels::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(r_), 0);
  for (int v : z_) ++sizes[static_cast<std::size_t>(v)];
  return sizes;
}

bool Labels::all_nonempty() const {
  const auto sizes = cluster_sizes();
  return std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
}

std::vector<int> Labels::one_based() const {
  std::vector<int> out(z_.size());
  std::transform(z_.begin(), z_.end(), out.begin(), [](int v) { return v + 1; });
  return out;
}

Matrix membership_matrix(const Labels& z) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(z.size()), z.clusters());
  for (std::size_t j = 0; j < z.size(); ++j) m(static_cast<Eigen::Index>(j), z[j]) = 1.0;
  return m;
}

Matrix weighted_membership(const Labels& z) {
  const auto sizes = z.cluster_sizes();
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(z.size()), z.clusters());
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    if (sizes[a] == 0) {
      throw EmptyClusterError("weighted_membership: cluster " + std::to_string(a) + " is empty");
    }
  }
  for (std::size_t j = 0; j < z.size(); ++j) {
    w(static_cast<Eigen::Index>(j), z[j]) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(z[j])]);
  }
  return w;
}

namespace {

// counts[a][b] = #{i : a_i = a, b_i = b}
std::vector<std::vector<long>> contingency(const Labels& a, const Labels& b) {
  std::vector<std::vector<long>> c(static_cast<std::size_t>(a.clusters()),
                                   std::vector<long>(static_cast<std::size_t>(b.clusters()), 0));
  for (std::size_t i = 0; i < a.size(); ++i) ++c[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  return c;
}

void require_comparable(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw std::invalid_argument("labels have different lengths");
  if (a.clusters() != b.clusters()) throw std::invalid_argument("labels have different cluster counts");
}

Misclassification from_matches(const Labels& a, long matches, std::vector<int> perm) {
  const double p = static_cast<double>(a.size());
  return {(p - static_cast<double>(matches)) / p, std::move(perm)};
}

}  // namespace

Misclassification misclassification_brute_force(const Labels& a, const Labels& b) {
  require_comparable(a, b);
  const auto c = contingency(a, b);
  const auto r = static_cast<std::size_t>(a.clusters());
  std::vector<int> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  long best_matches = -1;
  do {
    long matches = 0;
    for (std::size_t l = 0; l < r; ++l) matches += c[static_cast<std::size_t>(perm[l])][l];
    if (matches > best_matches) {
      best_matches = matches;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return from_matches(a, best_matches, std::move(best));
}

std::vector<int> hungarian_min_cost(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: cost matrix must be square");
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials formulation, 1-based with a virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = static_cast<int>(j - 1);
  return result;
}

Misclassification misclassification_hungarian(const Labels& a, const Labels& b) {
  require_comparable(a, b);
  const auto c = contingency(a, b);
  const Eigen::Index r = a.clusters();
  // Rows are labels of b, columns labels of a.
  Matrix cost(r, r);
  for (Eigen::Index l = 0; l < r; ++l) {
    for (Eigen::Index k = 0; k < r; ++k) cost(l, k) = -static_cast<double>(c[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
  }
  std::vector<int> perm = hungarian_min_cost(cost);
  long matches = 0;
  for (std::size_t l = 0; l < perm.size(); ++l) matches += c[static_cast<std::size_t>(perm[l])][l];
  return from_matches(a, matches, std::move(perm));
}

Misclassification misclassification_rate(const Labels& a, const Labels& b) {
  return a.clusters() <= 8 ? misclassification_brute_force(a, b) : misclassification_hungarian(a, b);
}

double adjusted_rand_index(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: labels have different lengths");
  const auto c = contingency(a, b);
  auto pairs = [](double n) { return n * (n - 1.0) / 2.0; };
  double index = 0.0;
  std::vector<double> row(c.size(), 0.0), col(c.empty() ? 0 : c[0].size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      const auto n = static_cast<double>(c[i][j]);
      index += pairs(n);
      row[i] += n;
      col[j] += n;
    }
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (double n : row) sum_a += pairs(n);
  for (double n : col) sum_b += pairs(n);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double maximum = 0.5 * (sum_a + sum_b);
  const double denom = maximum - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double clustering_error_rate(const Labels& a, const Labels& b) { return 1.0 - adjusted_rand_index(a, b); }

double mean_clustering_error_rate(const std::vector<Labels>& a, const std::vector<Labels>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("mean_clustering_error_rate: mode count mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += clustering_error_rate(a[k], b[k]);
  return s / static_cast<double>(a.size());
}

void write_labels_csv(std::ostream& out, const Labels& z) {
  for (std::size_t j = 0; j < z.size(); ++j) out << (j ? "," : "") << z[j] + 1;
  out << '\n';
}

Labels read_labels_csv(std::istream& in, int clusters) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::vector<int> values;
  std::istringstream ls(line);
  std::string field;
  while (std::getline(ls, field, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(field, &used);
      if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
      values.push_back(v);
    } catch (const std::exception&) {
      throw DataError("labels CSV: bad field '" + field + "'");
    }
  }
  if (values.empty()) throw DataError("labels CSV: no labels");
  const int max_label = *std::max_element(values.begin(), values.end());
  if (clusters == 0) clusters = max_label;
  if (*std::min_element(values.begin(), values.end()) < 1 || max_label > clusters) {
    throw DataError("labels CSV: label outside [1, " + std::to_string(clusters) + "]");
  }
  return Labels::from_one_based(values, clusters);
}

void save_labels_csv(const std::string& path, const Labels& z) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_labels_csv(out, z);
}

Labels load_labels_csv(const std::string& path, int clusters) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_labels_csv(in, clusters);
}

}  // namespace tbm
