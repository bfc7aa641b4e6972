#pragma once

// Seeded Monte-Carlo sweeps over synthetic block models, producing one tidy
// record per (cell, replication, method).

#include "tbm/baselines.hpp"
#include "tbm/hlloyd.hpp"
#include "tbm/hsc.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tbm {

enum class Method { hsc, hsc_hlloyd, oracle, hosvd_cluster, hooi };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// Algorithm settings shared by every sweep.
struct MethodSettings {
  KMeansConfig kmeans;
  HLloydConfig hlloyd;
  HooiConfig hooi;
  /// Oracle initialization contamination.
  double contamination = 0.2;
};

struct ExperimentGrid {
  std::size_t d = 3;
  std::vector<std::size_t> p = {80};
  /// One entry applies to every mode; otherwise one per mode.
  std::vector<int> ranks = {5};
  std::vector<double> gamma;
  double sigma = 1.0;
  int replications = 20;
  std::vector<Method> methods = {Method::hsc_hlloyd, Method::oracle};
  std::uint64_t seed = 0;
  /// Proportions of cluster 0; an empty list means balanced clusters only.
  std::vector<double> xi;
  MethodSettings settings;
  int workers = 1;

  std::vector<int> mode_ranks() const;
  void validate() const;
};

struct InitImpactSpec {
  std::size_t d = 3;
  std::size_t p = 50;
  int r = 5;
  double sigma = 1.0;
  std::vector<double> delta = {0.3, 0.5, 0.7, 1.0, 2.0};
  std::vector<double> contamination = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  int replications = 20;
  std::uint64_t seed = 0;
  MethodSettings settings;
  int workers = 1;
};

struct EstimationSpec {
  std::size_t d = 3;
  std::vector<std::size_t> p = {40, 50, 60, 70, 80, 90, 100};
  int r = 2;
  double delta = 2.0;
  double sigma = 1.0;
  int replications = 20;
  std::uint64_t seed = 0;
  MethodSettings settings;
  int workers = 1;
};

struct RunRecord {
  std::string method;
  std::size_t d = 0;
  std::size_t p = 0;
  std::vector<int> ranks;
  double gamma = 0.0;
  double sigma = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  /// Mean over modes of 1 - ARI; NaN when not applicable or failed.
  double cer = 0.0;
  std::vector<double> h;
  /// ||X^ - X||_F; NaN when not computed.
  double rmse = 0.0;
  double ms = 0.0;
  std::string error;
  double delta = 0.0;
  double contamination = 0.0;
  double xi = 0.0;
};

std::vector<RunRecord> run_phase_transition(const ExperimentGrid& grid);
std::vector<RunRecord> run_init_impact(const InitImpactSpec& spec);
std::vector<RunRecord> run_estimation_comparison(const EstimationSpec& spec);
/// Sweeps gamma, and xi when given; supports per-mode ranks.
std::vector<RunRecord> run_method_comparison(const ExperimentGrid& grid);

/// Header: method,d,p,r1..rd,gamma,sigma,rep,seed,cer,h1..hd,rmse,ms,error,
/// followed by delta,contamination,xi. The ms column is left empty unless
/// `timing` is set, so that reruns are byte-identical.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool timing = false);

struct Summary {
  std::string method;
  std::size_t p = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double contamination = 0.0;
  double xi = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double cer_mean = 0.0;
  double cer_stderr = 0.0;
  double rmse_mean = 0.0;
  double rmse_stderr = 0.0;
};

/// Mean and standard error per (method, p, gamma, delta, contamination, xi),
/// in order of first appearance. NaN values are skipped.
std::vector<Summary> summarize(const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<Summary>& summaries);

/// HSC initialization followed by HLloyd refinement.
HLloydResult cluster_tensor(const DenseTensor& y, const std::vector<int>& ranks, const MethodSettings& settings,
                            std::uint64_t seed);

struct RankCandidate {
  std::vector<int> ranks;
  /// NaN unless status is "ok".
  double bic = 0.0;
  std::string status;
};

struct RankSelection {
  /// Every combination of the per-mode lists, last mode fastest.
  std::vector<RankCandidate> candidates;
  std::optional<std::vector<int>> best;
};

/// Clusters y at every rank choice and scores it by BIC. Choices with a rank
/// above the dimension or a cluster of fewer than two entities are rejected.
RankSelection select_ranks_bic(const DenseTensor& y, const std::vector<std::vector<int>>& grid,
                               const MethodSettings& settings, std::uint64_t seed);

}  // namespace tbm
