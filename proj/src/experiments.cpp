#include "tbm/experiments.hpp"

#include "tbm/errors.hpp"
#include "tbm/random.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace tbm {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

const std::pair<Method, const char*> method_names[] = {
    {Method::hsc, "hsc"},
    {Method::hsc_hlloyd, "hsc+hlloyd"},
    {Method::oracle, "oracle"},
    {Method::hosvd_cluster, "hosvd"},
    {Method::hooi, "hooi"},
};

struct Cell {
  std::size_t p = 0;
  std::vector<int> ranks;
  double gamma = 0.0;
  double sigma = 1.0;
  double delta = 0.0;
  std::optional<double> xi;
  double contamination = 0.0;
};

struct Task {
  std::size_t cell = 0;
  int rep = 0;
};

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

// Keyed on the realized cluster sizes rather than xi, so a proportion that
// reproduces the balanced sizes also reproduces the balanced instance.
std::uint64_t instance_seed(std::uint64_t base, const Cell& cell, std::size_t d, int rep) {
  std::uint64_t s = derive_seed(base, {d, cell.p, bits(cell.delta), bits(cell.sigma), static_cast<std::uint64_t>(rep)});
  for (std::size_t k = 0; k < d; ++k) {
    s = derive_seed(s, {static_cast<std::uint64_t>(cell.ranks[k])});
    for (std::size_t n : cluster_sizes(cell.p, cell.ranks[k], cell.xi)) s = derive_seed(s, {n});
  }
  return s;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

class CellRunner {
 public:
  CellRunner(const Cell& cell, std::size_t d, std::uint64_t seed, const MethodSettings& settings)
      : cell_(cell), d_(d), seed_(seed), settings_(settings) {}

  RunRecord run(Method m, int rep) {
    RunRecord rec = blank(m, rep);
    const auto start = std::chrono::steady_clock::now();
    try {
      prepare();
      if (m == Method::hooi) {
        rec.rmse = frobenius(hooi_estimate(*y_, cell_.ranks, settings_.hooi).estimate - *x_);
      } else {
        const std::vector<Labels> labels = estimate(m);
        for (std::size_t k = 0; k < d_; ++k) rec.h[k] = misclassification_rate(labels[k], model_->labels[k]).rate;
        rec.cer = mean_clustering_error_rate(model_->labels, labels);
        rec.rmse = frobenius(estimate_xhat(*y_, labels) - *x_);
      }
    } catch (const std::exception& e) {
      rec.cer = nan;
      rec.rmse = nan;
      rec.h.assign(d_, nan);
      rec.error = e.what();
    }
    rec.ms = elapsed_ms(start) + (m == Method::hsc_hlloyd ? hsc_ms_ : 0.0);
    return rec;
  }

 private:
  RunRecord blank(Method m, int rep) const {
    RunRecord rec;
    rec.method = method_name(m);
    rec.d = d_;
    rec.p = cell_.p;
    rec.ranks = cell_.ranks;
    rec.gamma = cell_.gamma;
    rec.sigma = cell_.sigma;
    rec.rep = rep;
    rec.seed = seed_;
    rec.cer = nan;
    rec.h.assign(d_, nan);
    rec.rmse = nan;
    rec.delta = cell_.delta;
    rec.contamination = m == Method::oracle ? cell_.contamination : nan;
    rec.xi = cell_.xi.value_or(nan);
    return rec;
  }

  void prepare() {
    if (y_) return;
    InstanceSpec spec;
    spec.dims.assign(d_, cell_.p);
    spec.ranks = cell_.ranks;
    spec.sigma = cell_.sigma;
    spec.delta = cell_.delta;
    spec.first_fraction = cell_.xi;
    model_ = random_instance(spec, derive_seed(seed_, {0}));
    x_ = synthesize_signal(*model_);
    y_ = sample(*model_, derive_seed(seed_, {1}));
  }

  const std::vector<Labels>& hsc_labels() {
    if (!hsc_) {
      const auto start = std::chrono::steady_clock::now();
      hsc_ = hsc(*y_, HscConfig{cell_.ranks, settings_.kmeans, derive_seed(seed_, {2})});
      hsc_ms_ = elapsed_ms(start);
    }
    return *hsc_;
  }

  std::vector<Labels> estimate(Method m) {
    switch (m) {
      case Method::hsc:
        return hsc_labels();
      case Method::hsc_hlloyd:
        return hlloyd(*y_, hsc_labels(), settings_.hlloyd).labels;
      case Method::oracle:
        return oracle_estimate(*y_, model_->labels,
                               OracleConfig{cell_.contamination, derive_seed(seed_, {3, bits(cell_.contamination)})},
                               settings_.hlloyd)
            .labels;
      case Method::hosvd_cluster:
        return hosvd_cluster(*y_, cell_.ranks, settings_.kmeans, derive_seed(seed_, {4}));
      case Method::hooi:
        break;
    }
    throw std::logic_error("estimate: not a clustering method");
  }

  Cell cell_;
  std::size_t d_;
  std::uint64_t seed_;
  const MethodSettings& settings_;
  std::optional<BlockModel> model_;
  std::optional<DenseTensor> x_;
  std::optional<DenseTensor> y_;
  std::optional<std::vector<Labels>> hsc_;
  double hsc_ms_ = 0.0;
};

// Runs every (cell, rep) task on up to `workers` threads; output order is the
// task order regardless of scheduling.
std::vector<RunRecord> run_cells(const std::vector<Cell>& cells, std::size_t d, int replications,
                                 const std::vector<Method>& methods, std::uint64_t base, const MethodSettings& settings,
                                 int workers) {
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (methods.empty()) throw std::invalid_argument("at least one method is required");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int rep = 0; rep < replications; ++rep) tasks.push_back({c, rep});
  }
  std::vector<std::vector<RunRecord>> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Cell& cell = cells[tasks[i].cell];
      CellRunner runner(cell, d, instance_seed(base, cell, d, tasks[i].rep), settings);
      for (Method m : methods) out[i].push_back(runner.run(m, tasks[i].rep));
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<RunRecord> records;
  for (auto& v : out) {
    for (auto& r : v) records.push_back(std::move(r));
  }
  return records;
}

double gamma_of(std::size_t p, double delta, double sigma) {
  if (sigma <= 0.0 || delta <= 0.0) return nan;
  return std::log(delta * delta / (sigma * sigma)) / std::log(static_cast<double>(p));
}

// sigma = 0 is measured on the unit noise scale so the core stays nonzero.
double delta_of(std::size_t p, double gamma, double sigma) { return delta_for_gamma(p, gamma, sigma > 0.0 ? sigma : 1.0); }

std::vector<Cell> grid_cells(const ExperimentGrid& grid, bool with_xi) {
  grid.validate();
  std::vector<Cell> cells;
  const auto ranks = grid.mode_ranks();
  std::vector<std::optional<double>> xis;
  if (with_xi && !grid.xi.empty()) {
    for (double x : grid.xi) xis.emplace_back(x);
  } else {
    xis.emplace_back(std::nullopt);
  }
  for (std::size_t p : grid.p) {
    for (double g : grid.gamma) {
      for (const auto& xi : xis) {
        Cell c;
        c.p = p;
        c.ranks = ranks;
        c.gamma = g;
        c.sigma = grid.sigma;
        c.delta = delta_of(p, g, grid.sigma);
        c.xi = xi;
        c.contamination = grid.settings.contamination;
        cells.push_back(std::move(c));
      }
    }
  }
  return cells;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' || c == '\r' ? ' ' : c;
  }
  return out + '"';
}

void mean_stderr(const std::vector<double>& v, double& mean, double& se) {
  mean = nan;
  se = nan;
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  if (v.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& [method, name] : method_names) {
    if (method == m) return name;
  }
  throw std::logic_error("method_name: unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& [method, n] : method_names) {
    if (name == n) return method;
  }
  if (name == "hosvd_cluster") return Method::hosvd_cluster;
  if (name == "hsc_hlloyd") return Method::hsc_hlloyd;
  throw std::invalid_argument("unknown method '" + name + "' (expected hsc, hsc+hlloyd, oracle, hosvd or hooi)");
}

std::vector<int> ExperimentGrid::mode_ranks() const {
  if (ranks.size() == 1) return std::vector<int>(d, ranks.front());
  return ranks;
}

void ExperimentGrid::validate() const {
  if (d < 2) throw std::invalid_argument("grid: order d must be at least 2");
  if (p.empty() || gamma.empty()) throw std::invalid_argument("grid: p and gamma lists must be nonempty");
  if (ranks.size() != 1 && ranks.size() != d) throw std::invalid_argument("grid: need one rank or one per mode");
  if (replications < 1) throw std::invalid_argument("grid: replications must be at least 1");
  if (methods.empty()) throw std::invalid_argument("grid: methods must be nonempty");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("grid: sigma must be finite and >= 0");
  if (!(settings.contamination >= 0.0 && settings.contamination < 1.0)) {
    throw std::invalid_argument("grid: contamination must lie in [0, 1)");
  }
  for (int r : mode_ranks()) {
    for (std::size_t pk : p) {
      if (r < 1 || static_cast<std::size_t>(r) > pk) throw std::invalid_argument("grid: rank exceeds dimension");
    }
  }
  for (double x : xi) {
    if (!(x > 0.0 && x <= 0.5)) throw std::invalid_argument("grid: xi must lie in (0, 0.5]");
  }
}

std::vector<RunRecord> run_phase_transition(const ExperimentGrid& grid) {
  return run_cells(grid_cells(grid, false), grid.d, grid.replications, grid.methods, grid.seed, grid.settings,
                   grid.workers);
}

std::vector<RunRecord> run_method_comparison(const ExperimentGrid& grid) {
  for (Method m : grid.methods) {
    if (m == Method::hooi) throw std::invalid_argument("method comparison: hooi produces no labels");
  }
  return run_cells(grid_cells(grid, true), grid.d, grid.replications, grid.methods, grid.seed, grid.settings,
                   grid.workers);
}

std::vector<RunRecord> run_init_impact(const InitImpactSpec& spec) {
  if (spec.delta.empty() || spec.contamination.empty()) throw std::invalid_argument("init impact: empty grid");
  if (spec.r < 1 || static_cast<std::size_t>(spec.r) > spec.p || spec.d < 2) throw std::invalid_argument("init impact: bad shape");
  std::vector<Cell> cells;
  for (double delta : spec.delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("init impact: delta must be positive");
    for (double eps : spec.contamination) {
      if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("init impact: contamination must lie in [0, 1)");
      Cell c;
      c.p = spec.p;
      c.ranks.assign(spec.d, spec.r);
      c.sigma = spec.sigma;
      c.delta = delta;
      c.gamma = gamma_of(spec.p, delta, spec.sigma);
      c.contamination = eps;
      cells.push_back(std::move(c));
    }
  }
  return run_cells(cells, spec.d, spec.replications, {Method::oracle}, spec.seed, spec.settings, spec.workers);
}

std::vector<RunRecord> run_estimation_comparison(const EstimationSpec& spec) {
  if (spec.p.empty() || spec.d < 2 || !(spec.delta > 0.0)) throw std::invalid_argument("estimation: bad settings");
  std::vector<Cell> cells;
  for (std::size_t p : spec.p) {
    if (spec.r < 1 || static_cast<std::size_t>(spec.r) > p) throw std::invalid_argument("estimation: rank exceeds dimension");
    Cell c;
    c.p = p;
    c.ranks.assign(spec.d, spec.r);
    c.sigma = spec.sigma;
    c.delta = spec.delta;
    c.gamma = gamma_of(p, spec.delta, spec.sigma);
    c.contamination = spec.settings.contamination;
    cells.push_back(std::move(c));
  }
  return run_cells(cells, spec.d, spec.replications, {Method::hsc_hlloyd, Method::hooi}, spec.seed, spec.settings,
                   spec.workers);
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool timing) {
  const std::size_t d = records.empty() ? 0 : records.front().d;
  for (const auto& r : records) {
    if (r.d != d) throw std::invalid_argument("write_records_csv: records of mixed order");
  }
  out << "method,d,p";
  for (std::size_t k = 0; k < d; ++k) out << ",r" << k + 1;
  out << ",gamma,sigma,rep,seed,cer";
  for (std::size_t k = 0; k < d; ++k) out << ",h" << k + 1;
  out << ",rmse,ms,error,delta,contamination,xi\n";
  for (const auto& r : records) {
    out << r.method << ',' << r.d << ',' << r.p;
    for (int rk : r.ranks) out << ',' << rk;
    out << ',' << format_double(r.gamma) << ',' << format_double(r.sigma) << ',' << r.rep << ',' << r.seed << ','
        << format_double(r.cer);
    for (double h : r.h) out << ',' << format_double(h);
    out << ',' << format_double(r.rmse) << ',' << (timing ? format_double(r.ms) : std::string()) << ','
        << csv_escape(r.error) << ',' << format_double(r.delta) << ',' << format_double(r.contamination) << ','
        << format_double(r.xi) << '\n';
  }
}

std::vector<Summary> summarize(const std::vector<RunRecord>& records) {
  // NaN never compares equal, so keys use bit patterns.
  using Key = std::tuple<std::string, std::size_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  std::map<Key, std::size_t> index;
  std::vector<Summary> out;
  std::vector<std::vector<double>> cer, rmse;
  for (const auto& r : records) {
    const Key key{r.method, r.p, bits(r.gamma), bits(r.delta), bits(r.contamination), bits(r.xi)};
    auto [it, fresh] = index.emplace(key, out.size());
    if (fresh) {
      Summary s;
      s.method = r.method;
      s.p = r.p;
      s.gamma = r.gamma;
      s.delta = r.delta;
      s.contamination = r.contamination;
      s.xi = r.xi;
      out.push_back(s);
      cer.emplace_back();
      rmse.emplace_back();
    }
    Summary& s = out[it->second];
    ++s.runs;
    if (!r.error.empty()) ++s.failures;
    if (!std::isnan(r.cer)) cer[it->second].push_back(r.cer);
    if (!std::isnan(r.rmse)) rmse[it->second].push_back(r.rmse);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    mean_stderr(cer[i], out[i].cer_mean, out[i].cer_stderr);
    mean_stderr(rmse[i], out[i].rmse_mean, out[i].rmse_stderr);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<Summary>& summaries) {
  out << "method,p,gamma,delta,contamination,xi,runs,failures,cer_mean,cer_stderr,rmse_mean,rmse_stderr\n";
  for (const auto& s : summaries) {
    out << s.method << ',' << s.p << ',' << format_double(s.gamma) << ',' << format_double(s.delta) << ','
        << format_double(s.contamination) << ',' << format_double(s.xi) << ',' << s.runs << ',' << s.failures << ','
        << format_double(s.cer_mean) << ',' << format_double(s.cer_stderr) << ',' << format_double(s.rmse_mean) << ','
        << format_double(s.rmse_stderr) << '\n';
  }
}

HLloydResult cluster_tensor(const DenseTensor& y, const std::vector<int>& ranks, const MethodSettings& settings,
                            std::uint64_t seed) {
  return hlloyd(y, hsc(y, HscConfig{ranks, settings.kmeans, seed}), settings.hlloyd);
}

RankSelection select_ranks_bic(const DenseTensor& y, const std::vector<std::vector<int>>& grid,
                               const MethodSettings& settings, std::uint64_t seed) {
  if (grid.size() != y.order()) throw std::invalid_argument("select_ranks_bic: need one rank list per mode");
  for (const auto& list : grid) {
    if (list.empty()) throw std::invalid_argument("select_ranks_bic: empty rank list");
  }
  RankSelection out;
  double best_bic = 0.0;
  std::vector<std::size_t> pos(grid.size(), 0);
  for (;;) {
    RankCandidate c;
    for (std::size_t k = 0; k < grid.size(); ++k) c.ranks.push_back(grid[k][pos[k]]);
    c.bic = std::numeric_limits<double>::quiet_NaN();
    c.status = "ok";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (c.ranks[k] < 1 || static_cast<std::size_t>(c.ranks[k]) > y.shape()[k]) c.status = "rank exceeds dimension";
    }
    if (c.status == "ok") {
      try {
        const auto labels = cluster_tensor(y, c.ranks, settings, seed).labels;
        for (const auto& z : labels) {
          for (std::size_t n : z.cluster_sizes()) {
            if (n < 2) c.status = "singleton cluster";
          }
        }
        if (c.status == "ok") c.bic = bic(y, labels);
      } catch (const std::exception& e) {
        c.status = std::string("failed: ") + e.what();
      }
    }
    if (c.status == "ok" && (!out.best || c.bic < best_bic)) {
      out.best = c.ranks;
      best_bic = c.bic;
    }
    out.candidates.push_back(std::move(c));
    std::size_t k = grid.size();
    while (k > 0 && ++pos[k - 1] == grid[k - 1].size()) pos[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

}  // namespace tbm
