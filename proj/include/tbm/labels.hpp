#pragma once

// Cluster label vectors, membership matrices and clustering metrics.
//
// Labels are stored 0-based ([0, r)); the text formats (labels CSV, model
// JSON) use 1-based values.

#include "tbm/tensor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tbm {

class Labels {
 public:
  Labels() = default;
  /// Every entry must lie in [0, clusters); at least one entity.
  Labels(std::vector<int> assignment, int clusters);

  static Labels from_one_based(const std::vector<int>& assignment, int clusters);

  std::size_t size() const { return z_.size(); }
  int clusters() const { return r_; }
  int operator[](std::size_t j) const { return z_[j]; }
  const std::vector<int>& values() const { return z_; }

  void assign(std::size_t j, int cluster);

  std::vector<std::size_t> cluster_sizes() const;
  bool all_nonempty() const;

  std::vector<int> one_based() const;

  bool operator==(const Labels& other) const = default;

 private:
  std::vector<int> z_;
  int r_ = 0;
};

/// p x r binary matrix with (M)_{j, z_j} = 1.
Matrix membership_matrix(const Labels& z);

/// M diag(1^T M)^{-1}; throws EmptyClusterError if a cluster is empty.
Matrix weighted_membership(const Labels& z);

struct Misclassification {
  double rate = 0.0;
  /// permutation[b] is the label of `a` matched to label b of `b`.
  std::vector<int> permutation;
};

/// min over permutations pi of (1/p) sum 1{a_i != pi(b_i)}. Exhaustive search
/// for r <= 8, Hungarian assignment beyond.
Misclassification misclassification_rate(const Labels& a, const Labels& b);

/// Same quantity by exhaustive permutation search / by Hungarian assignment.
Misclassification misclassification_brute_force(const Labels& a, const Labels& b);
Misclassification misclassification_hungarian(const Labels& a, const Labels& b);

/// Minimum-cost perfect assignment on a square cost matrix; result[row] = column.
std::vector<int> hungarian_min_cost(const Matrix& cost);

double adjusted_rand_index(const Labels& a, const Labels& b);

/// 1 - ARI. Defined as 0 when the ARI denominator vanishes, which only happens
/// for two identical trivial partitions.
double clustering_error_rate(const Labels& a, const Labels& b);

/// Mean CER over modes.
double mean_clustering_error_rate(const std::vector<Labels>& a, const std::vector<Labels>& b);

// One line of comma-separated 1-based integers.
void write_labels_csv(std::ostream& out, const Labels& z);
Labels read_labels_csv(std::istream& in, int clusters = 0);
void save_labels_csv(const std::string& path, const Labels& z);
Labels load_labels_csv(const std::string& path, int clusters = 0);

}  // namespace tbm
