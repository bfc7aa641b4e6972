// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--criterion N]

#include "tbm/baselines.hpp"
#include "tbm/block_model.hpp"
#include "tbm/experiments.hpp"
#include "tbm/hlloyd.hpp"
#include "tbm/hsc.hpp"
#include "tbm/labels.hpp"
#include "tbm/linalg.hpp"
#include "tbm/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace tbm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string fmt(double v) { return fmt("%.4g", v); }

DenseTensor random_tensor(const Shape& shape, Random& rng) {
  DenseTensor t(shape);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Random& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

CoreTensor sign_core() { return CoreTensor(Shape{2, 2, 2}, {1, -1, -1, 1, -1, 1, 1, -1}); }

// Mean CER per gamma for a single method.
std::map<double, double> mean_cer_by_gamma(const std::vector<RunRecord>& records, const std::string& method) {
  std::map<double, double> out;
  for (const auto& s : summarize(records)) {
    if (s.method == method) out[s.gamma] = s.cer_mean;
  }
  return out;
}

std::string curve(const std::map<double, double>& m) {
  std::string s;
  for (const auto& [g, v] : m) s += (s.empty() ? "" : " ") + fmt("%g", g) + ":" + fmt("%.3f", v);
  return s;
}

Outcome criterion1() {
  bool ok = true;
  double best = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 5; ++trial) {
    Stopwatch clock;
    const CoreTensor s = sign_core();
    for (std::size_t k = 0; k < 3; ++k) ok = ok && delta_sq(s, k) == 16.0;
    const Matrix m = unfold(s, 0);
    const auto sv = singular_values(m);
    ok = ok && sv.size() == 2 && std::abs(sv[0] - 2.0 * std::sqrt(2.0)) <= 1e-10 && std::abs(sv[1]) <= 1e-10;
    const auto u = top_left_singular_vectors(m, 2);
    ok = ok && u.cols() == 2 && orthonormality_error(u.matrix()) <= 1e-10;
    best = std::min(best, clock.seconds());
  }
  ok = ok && best < 1e-3;
  return {ok, "delta_sq=16 on all modes, sv=(2sqrt2,0), rank-2 basis orthonormal; " + fmt(best * 1e6) + " us"};
}

Outcome criterion2() {
  Random rng(2);
  double worst = 0.0;
  Stopwatch clock;
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 3);
    std::vector<std::size_t> dims(d), ranks(d);
    std::vector<Matrix> u(d);
    for (std::size_t k = 0; k < d; ++k) {
      dims[k] = 1 + rng.index(6);
      ranks[k] = 1 + rng.index(3);
      u[k] = random_matrix(static_cast<Eigen::Index>(dims[k]), static_cast<Eigen::Index>(ranks[k]), rng);
    }
    const DenseTensor s = random_tensor(Shape(ranks), rng);
    std::vector<ModeFactor> f;
    for (std::size_t k = 0; k < d; ++k) f.push_back({k, u[k]});
    const DenseTensor y = multi_product(s, f);
    for (std::size_t k = 0; k < d; ++k) {
      const Matrix rhs = u[k] * unfold(s, k) * kron_chain_except(u, k).transpose();
      worst = std::max(worst, (unfold(y, k) - rhs).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-10, "max |unfold(S x U) - U_k unfold(S) kron^T| = " + fmt(worst) + " over 50 tensors; " +
                              fmt(clock.seconds()) + " s"};
}

Outcome criterion3() {
  Stopwatch clock;
  ExperimentGrid grid;
  grid.d = 2;
  grid.p = {200};
  grid.ranks = {5};
  grid.gamma = {-1.6, -1.4, -1.2, -1.0, -0.8, -0.6, -0.4, -0.2, 0.0};
  grid.sigma = 1.0;
  grid.replications = 20;
  grid.methods = {Method::hsc_hlloyd};
  grid.seed = 3;
  const auto cer = mean_cer_by_gamma(run_phase_transition(grid), "hsc+hlloyd");
  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& [g, v] : cer) {
    monotone = monotone && v <= previous + 0.05;
    previous = v;
  }
  const double secs = clock.seconds();
  const bool ok = cer.at(-0.6) <= 0.05 && cer.at(-1.6) >= 0.5 && monotone && secs < 300.0;
  return {ok, "CER(-0.6)=" + fmt(cer.at(-0.6)) + " (<=0.05), CER(-1.6)=" + fmt(cer.at(-1.6)) +
                  " (>=0.5), monotone=" + (monotone ? "yes" : "no") + "; curve " + curve(cer) + "; " + fmt(secs) + " s"};
}

Outcome criterion4() {
  Stopwatch clock;
  ExperimentGrid grid;
  grid.d = 3;
  grid.p = {80};
  grid.ranks = {5};
  grid.gamma = {-1.8, -1.2};
  grid.sigma = 1.0;
  grid.replications = 20;
  grid.methods = {Method::hsc_hlloyd, Method::oracle};
  grid.seed = 4;
  const auto records = run_phase_transition(grid);
  const auto ours = mean_cer_by_gamma(records, "hsc+hlloyd");
  const auto oracle = mean_cer_by_gamma(records, "oracle");
  const double secs = clock.seconds();
  const bool ok = oracle.at(-1.8) <= 0.05 && ours.at(-1.8) >= 0.3 && oracle.at(-1.2) <= 0.05 && ours.at(-1.2) <= 0.05 &&
                  secs < 900.0;
  return {ok, "gamma=-1.8: oracle " + fmt(oracle.at(-1.8)) + " (<=0.05), hsc+hlloyd " + fmt(ours.at(-1.8)) +
                  " (>=0.3); gamma=-1.2: oracle " + fmt(oracle.at(-1.2)) + ", hsc+hlloyd " + fmt(ours.at(-1.2)) +
                  " (both <=0.05); " + fmt(secs) + " s"};
}

Outcome criterion5() {
  Stopwatch clock;
  int exact = 0;
  const int runs = 100;
  MethodSettings settings;
  settings.hlloyd.max_iters = default_hlloyd_iterations(Shape{50, 50, 50});
  for (int rep = 0; rep < runs; ++rep) {
    const std::uint64_t seed = derive_seed(5, {static_cast<std::uint64_t>(rep)});
    const auto m = random_instance(InstanceSpec{{50, 50, 50}, {2, 2, 2}, 1.0, 2.0, std::nullopt}, derive_seed(seed, {0}));
    const auto y = sample(m, derive_seed(seed, {1}));
    const auto z = cluster_tensor(y, {2, 2, 2}, settings, derive_seed(seed, {2})).labels;
    bool all = true;
    for (std::size_t k = 0; k < 3; ++k) all = all && misclassification_rate(z[k], m.labels[k]).rate == 0.0;
    exact += all ? 1 : 0;
  }
  const double secs = clock.seconds();
  return {exact >= 95 && secs < 300.0, std::to_string(exact) + "/100 runs with h_k=0 on every mode (>=95); T=" +
                                           std::to_string(*settings.hlloyd.max_iters) + "; " + fmt(secs) + " s"};
}

Outcome criterion6() {
  Stopwatch clock;
  EstimationSpec spec;
  spec.d = 3;
  spec.p = {40, 60, 80, 100};
  spec.r = 2;
  spec.delta = 2.0;
  spec.sigma = 1.0;
  spec.replications = 20;
  spec.seed = 6;
  const auto records = run_estimation_comparison(spec);
  std::map<std::string, std::map<std::size_t, double>> rmse;
  std::map<std::size_t, double> hooi_sq;
  std::map<std::size_t, int> hooi_n;
  for (const auto& s : summarize(records)) rmse[s.method][s.p] = s.rmse_mean;
  for (const auto& r : records) {
    if (r.method == "hooi" && std::isfinite(r.rmse)) {
      hooi_sq[r.p] += r.rmse * r.rmse;
      ++hooi_n[r.p];
    }
  }
  bool within = true;
  std::string ratios;
  for (const auto& [p, sum] : hooi_sq) {
    const double predicted = spec.sigma * spec.sigma * (8.0 + 3.0 * static_cast<double>(p) * 2.0);
    const double ratio = sum / hooi_n[p] / predicted;
    within = within && ratio <= 3.0 && ratio >= 1.0 / 3.0;
    ratios += (ratios.empty() ? "" : " ") + std::to_string(p) + ":" + fmt("%.3f", ratio);
  }
  const auto& ours = rmse["hsc+hlloyd"];
  const auto& hooi = rmse["hooi"];
  const double ours_ratio = ours.at(100) / ours.at(40);
  const double hooi_ratio = hooi.at(100) / hooi.at(40);
  const double secs = clock.seconds();
  const bool ok = ours_ratio <= 1.5 && hooi_ratio >= 1.3 && within && secs < 600.0;
  return {ok, "hsc+hlloyd RMSE " + fmt(ours.at(40)) + " -> " + fmt(ours.at(100)) + " (ratio " + fmt(ours_ratio) +
                  " <=1.5); hooi " + fmt(hooi.at(40)) + " -> " + fmt(hooi.at(100)) + " (ratio " + fmt(hooi_ratio) +
                  " >=1.3); hooi RMSE^2/prediction " + ratios + "; " + fmt(secs) + " s"};
}

double brute_force_kmeans(const Matrix& rows, int r) {
  const auto n = static_cast<std::size_t>(rows.rows());
  std::vector<int> z(n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    Matrix c = Matrix::Zero(r, rows.cols());
    std::vector<double> count(static_cast<std::size_t>(r), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      c.row(z[j]) += rows.row(static_cast<Eigen::Index>(j));
      count[static_cast<std::size_t>(z[j])] += 1.0;
    }
    for (int a = 0; a < r; ++a) {
      if (count[static_cast<std::size_t>(a)] > 0) c.row(a) /= count[static_cast<std::size_t>(a)];
    }
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) cost += (rows.row(static_cast<Eigen::Index>(j)) - c.row(z[j])).squaredNorm();
    best = std::min(best, cost);
    std::size_t k = n;
    while (k > 0 && ++z[k - 1] == r) z[--k] = 0;
    if (k == 0) break;
  }
  return best;
}

Outcome criterion7() {
  Stopwatch clock;
  Random rng(7);
  int mle_ok = 0, km_optimal = 0, km_bounded = 0;
  const int runs = 100;
  const double bound = 8.0 * (2.0 + std::log(2.0));
  for (int t = 0; t < runs; ++t) {
    const std::size_t p1 = 2 + rng.index(5), p2 = 2 + rng.index(5);
    const std::uint64_t seed = derive_seed(7, {static_cast<std::uint64_t>(t)});
    const auto m = random_instance(InstanceSpec{{p1, p2}, {2, 2}, 1.0, 1.0, std::nullopt}, derive_seed(seed, {0}));
    const auto y = sample(m, derive_seed(seed, {1}));
    const auto mle = brute_force_mle(y, {2, 2});
    const auto z = cluster_tensor(y, {2, 2}, {}, derive_seed(seed, {2})).labels;
    const double ours = objective(y, block_mean_estimate(y, z).core, z);
    mle_ok += mle.objective <= ours + 1e-10 * (1.0 + ours) ? 1 : 0;

    const Matrix rows = unfold(y, 0);
    const double opt = brute_force_kmeans(rows, 2);
    const double cost = relaxed_kmeans(rows, 2, {}, derive_seed(seed, {3})).cost;
    km_optimal += std::abs(cost - opt) <= 1e-9 * std::max(1.0, opt) ? 1 : 0;
    km_bounded += cost <= bound * opt + 1e-12 ? 1 : 0;
  }
  const double secs = clock.seconds();
  const bool ok = mle_ok == runs && km_optimal >= 95 && km_bounded == runs && secs < 60.0;
  return {ok, "mle <= hlloyd in " + std::to_string(mle_ok) + "/100; k-means optimal in " + std::to_string(km_optimal) +
                  "/100 (>=95), within 8(2+ln2)x in " + std::to_string(km_bounded) + "/100; " + fmt(secs) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion8() {
  const std::string tbmc = TBMC_PATH;
  const std::string fixtures = TBM_FIXTURE_DIR;
  const fs::path root = fs::temp_directory_path() / ("tbm_acceptance_" + std::to_string(derive_seed(8, {static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())})));
  const std::vector<std::pair<std::string, std::string>> commands{
      {"phase", "simulate phase --d 3 --p 12 --r 2 --gamma -0.5,0.5 --reps 2 --seed 7 --out phase.csv --summary phase_summary.csv"},
      {"compare", "simulate compare --d 3 --p 12 --r 2 --gamma 0 --xi 0.3,0.5 --reps 2 --seed 7 --out compare.csv"},
      {"init", "simulate init --p 12 --r 2 --delta 1,2 --eps 0,0.3 --reps 2 --seed 7 --out init.csv"},
      {"estimation", "simulate estimation --p 10,12 --reps 2 --seed 7 --out estimation.csv"},
      {"generate", "generate --dims 12,10,8 --ranks 2,2,2 --sigma 0.5 --delta 2 --seed 7 --out gen.tbm1 --truth truth --model model.json"},
      {"cluster", "cluster gen.tbm1 --ranks 2,2,2 --seed 7 --out fit --truth truth.mode1.csv,truth.mode2.csv,truth.mode3.csv --trace trace.csv"},
      {"bic-select", "bic-select gen.tbm1 --rank-grid 2,3 --seed 7 --out bic.csv"},
      {"ingest edgelist", "ingest edgelist " + fixtures + "/nodes10.tsv --top-nodes 3 --out edges.tbm1 --ids edges.json"},
      {"ingest events", "ingest events " + fixtures + "/events_g1.csv " + fixtures + "/events_g2.csv --buckets 24 --out events.tbm1 --ids events.json"},
  };
  std::string failures;
  for (const char* run : {"a", "b"}) {
    fs::create_directories(root / run);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const std::string tag = std::to_string(i);
      const std::string line = "cd '" + (root / run).string() + "' && '" + tbmc + "' " + commands[i].second + " > " + tag +
                               ".stdout 2> " + tag + ".stderr";
      if (std::system(line.c_str()) != 0) failures += " " + commands[i].first + "(exit)";
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) failures += " " + entry.path().filename().string();
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(root / "b")) ++files_b;
  if (files != files_b) failures += " (file sets differ)";
  fs::remove_all(root);
  return {failures.empty(), std::to_string(commands.size()) + " subcommands run twice, " + std::to_string(files) +
                                " output files compared" + (failures.empty() ? ", all byte-identical" : "; differing:" + failures)};
}

Outcome criterion9() {
  Stopwatch clock;
  int hits = 0;
  std::string picks;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::uint64_t seed = derive_seed(9, {s});
    const auto m = random_instance(InstanceSpec{{30, 30, 30}, {2, 2, 2}, 0.1, 1.0, std::nullopt}, derive_seed(seed, {0}));
    const auto y = sample(m, derive_seed(seed, {1}));
    const auto sel = select_ranks_bic(y, {{2, 3}, {2, 3}, {2, 3}}, {}, derive_seed(seed, {2}));
    const bool hit = sel.best && *sel.best == std::vector<int>{2, 2, 2};
    hits += hit ? 1 : 0;
    if (!hit && sel.best) {
      picks += " " + std::to_string((*sel.best)[0]) + std::to_string((*sel.best)[1]) + std::to_string((*sel.best)[2]);
    }
  }
  const double secs = clock.seconds();
  return {hits >= 18 && secs < 120.0, std::to_string(hits) + "/20 seeds select (2,2,2) from {2,3}^3 (>=18)" +
                                          (picks.empty() ? "" : "; misses:" + picks) + "; " + fmt(secs) + " s"};
}

Labels canonical(const Labels& z) {
  std::vector<int> map(static_cast<std::size_t>(z.clusters()), -1), v(z.size());
  int next = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    int& m = map[static_cast<std::size_t>(z[j])];
    if (m < 0) m = next++;
    v[j] = m;
  }
  return Labels(v, z.clusters());
}

Outcome criterion10() {
  Stopwatch clock;
  std::size_t pairs = 0, violations = 0;
  double max_cer = 0.0;
  for (std::size_t p = 1; p <= 8; ++p) {
    for (int r = 1; r <= 3; ++r) {
      std::vector<Labels> all, canon_of;
      std::vector<std::size_t> canon;
      std::vector<int> v(p, 0);
      for (;;) {
        all.emplace_back(v, r);
        canon_of.push_back(canonical(all.back()));
        if (canon_of.back() == all.back()) canon.push_back(all.size() - 1);
        std::size_t k = p;
        while (k > 0 && ++v[k - 1] == r) v[--k] = 0;
        if (k == 0) break;
      }
      for (std::size_t ia : canon) {
        const Labels& a = all[ia];
        if (misclassification_rate(a, a).rate != 0.0 || clustering_error_rate(a, a) != 0.0) ++violations;
        for (std::size_t ib = 0; ib < all.size(); ++ib) {
          const Labels& b = all[ib];
          ++pairs;
          const double h = misclassification_rate(a, b).rate;
          const double cer = clustering_error_rate(a, b);
          max_cer = std::max(max_cer, cer);
          // Relabelings of b are enumerated as other vectors with the same
          // canonical form, so invariance reduces to agreement with it.
          const bool ok = h >= 0.0 && h <= 1.0 && misclassification_rate(b, a).rate == h &&
                          misclassification_rate(a, canon_of[ib]).rate == h &&
                          misclassification_rate(canon_of[ib], a).rate == h && cer >= -1e-12 && cer <= 1.5 + 1e-12 &&
                          std::abs(clustering_error_rate(b, a) - cer) <= 1e-12 &&
                          std::abs(clustering_error_rate(a, canon_of[ib]) - cer) <= 1e-12 &&
                          std::abs(clustering_error_rate(canon_of[ib], a) - cer) <= 1e-12;
          violations += ok ? 0 : 1;
        }
      }
    }
  }
  return {violations == 0, std::to_string(pairs) + " canonical x all pairs for p<=8, r<=3, " +
                               std::to_string(violations) + " violations; max CER " + fmt(max_cer) + "; " +
                               fmt(clock.seconds()) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::cerr << "criterion must lie in [1, " << criteria.size() << "]\n";
        return 2;
      }
      selected.push_back(n);
    } else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }
  int failed = 0;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
