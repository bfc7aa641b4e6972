// tbmc: simulations, clustering, rank selection and ingestion for tensor block models.

#include "tbm/baselines.hpp"
#include "tbm/block_model.hpp"
#include "tbm/errors.hpp"
#include "tbm/experiments.hpp"
#include "tbm/hlloyd.hpp"
#include "tbm/hsc.hpp"
#include "tbm/ingest.hpp"
#include "tbm/labels.hpp"
#include "tbm/tensor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_data = 1;
constexpr int exit_usage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Output {
  Output() = default;
  explicit Output(std::string p) : path(std::move(p)) {}

  std::string path = "-";

  std::ostream& stream() {
    if (path == "-") return std::cout;
    file_.open(path, std::ios::binary);
    if (!file_) throw tbm::DataError("cannot write " + path);
    return file_;
  }

 private:
  std::ofstream file_;
};

struct AlgorithmFlags {
  int restarts = 10;
  int kmeans_iters = 100;
  std::optional<int> iters;
  std::string order = "simultaneous";
  double contamination = 0.2;
  int hooi_sweeps = 10;

  void add(CLI::App* app) {
    app->add_option("--restarts", restarts, "k-means++ restarts")->check(CLI::PositiveNumber);
    app->add_option("--kmeans-iters", kmeans_iters, "Lloyd iterations per k-means run")->check(CLI::PositiveNumber);
    app->add_option("--iters", iters, "HLloyd rounds (default ceil(2 ln p))")->check(CLI::PositiveNumber);
    app->add_option("--order", order, "HLloyd update order")->check(CLI::IsMember({"simultaneous", "sequential"}));
    app->add_option("--contamination", contamination, "oracle initialization contamination")
        ->check(CLI::Range(0.0, 0.999999));
    app->add_option("--hooi-sweeps", hooi_sweeps, "HOOI sweeps")->check(CLI::PositiveNumber);
  }

  tbm::MethodSettings settings() const {
    tbm::MethodSettings s;
    s.kmeans = {restarts, kmeans_iters};
    s.hlloyd = hlloyd();
    s.hooi.max_sweeps = hooi_sweeps;
    s.contamination = contamination;
    return s;
  }

  tbm::HLloydConfig hlloyd() const {
    tbm::HLloydConfig c;
    c.max_iters = iters;
    c.order = order == "sequential" ? tbm::UpdateOrder::sequential : tbm::UpdateOrder::simultaneous;
    return c;
  }
};

struct SweepOutput {
  Output records;
  std::string summary;
  bool timing = false;

  void add(CLI::App* app) {
    app->add_option("--out,-o", records.path, "record CSV path (- for stdout)");
    app->add_option("--summary", summary, "also write mean/stderr per cell to this CSV");
    app->add_flag("--timing", timing, "fill the ms column (makes output nondeterministic)");
  }

  void write(const std::vector<tbm::RunRecord>& recs) {
    tbm::write_records_csv(records.stream(), recs, timing);
    if (!summary.empty()) {
      Output s{summary};
      tbm::write_summary_csv(s.stream(), tbm::summarize(recs));
    }
  }
};

std::vector<tbm::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<tbm::Method> out;
  for (const auto& n : names) {
    try {
      out.push_back(tbm::parse_method(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::vector<int>& v) {
  std::vector<std::size_t> out;
  for (int x : v) out.push_back(static_cast<std::size_t>(x));
  return out;
}

// "3,4,5,6" for every mode, or one list per mode separated by ';'. Entries may
// be ranges a-b.
std::vector<std::vector<int>> parse_rank_grid(const std::string& spec, std::size_t d) {
  auto parse_list = [&](const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) throw UsageError("rank grid: empty entry in '" + spec + "'");
      try {
        const auto dash = tok.find('-');
        if (dash == std::string::npos) {
          out.push_back(std::stoi(tok));
        } else {
          const int lo = std::stoi(tok.substr(0, dash)), hi = std::stoi(tok.substr(dash + 1));
          if (lo > hi) throw UsageError("rank grid: empty range " + tok);
          for (int r = lo; r <= hi; ++r) out.push_back(r);
        }
      } catch (const std::logic_error&) {
        throw UsageError("rank grid: bad entry '" + tok + "'");
      }
    }
    for (int r : out) {
      if (r < 1) throw UsageError("rank grid: ranks must be positive");
    }
    if (out.empty()) throw UsageError("rank grid: no ranks given");
    return out;
  };
  std::vector<std::vector<int>> modes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) modes.push_back(parse_list(part));
  if (modes.size() == 1) modes.assign(d, modes.front());
  if (modes.size() != d) throw UsageError("rank grid: need one list or one per mode");
  return modes;
}

std::string join(const std::vector<int>& v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return s;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<tbm::Labels> fit(const tbm::DenseTensor& y, const std::vector<int>& ranks, const AlgorithmFlags& alg,
                             std::uint64_t seed, tbm::HLloydTrace* trace = nullptr) {
  auto result = tbm::cluster_tensor(y, ranks, alg.settings(), seed);
  if (trace) *trace = result.trace;
  return result.labels;
}

int run(int argc, char** argv, bool& json_errors) {
  CLI::App app{"Tensor block model clustering toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tbmc 1.0.0");
  app.add_flag("--json-errors", json_errors, "print errors as JSON on stderr");

  AlgorithmFlags alg;
  SweepOutput sweep_out;
  std::uint64_t seed = 0;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sweeps writing tidy CSV records");
  simulate->require_subcommand(1);

  tbm::ExperimentGrid phase_grid, compare_grid;
  std::vector<std::string> phase_methods{"hsc+hlloyd", "oracle"}, compare_methods{"hsc", "hsc+hlloyd", "hosvd"};
  auto add_grid = [&](CLI::App* sub, tbm::ExperimentGrid& grid, std::vector<std::string>& methods) {
    sub->add_option("--d", grid.d, "tensor order")->check(CLI::Range(2, 8));
    sub->add_option("--p", grid.p, "dimension list")->delimiter(',');
    sub->add_option("--r", grid.ranks, "rank, or one rank per mode")->delimiter(',');
    sub->add_option("--gamma", grid.gamma, "SNR exponents: Delta_min^2 / sigma^2 = p^gamma")->delimiter(',')->required();
    sub->add_option("--sigma", grid.sigma, "noise standard deviation")->check(CLI::NonNegativeNumber);
    sub->add_option("--reps", grid.replications, "replications per cell")->check(CLI::PositiveNumber);
    sub->add_option("--methods", methods, "hsc, hsc+hlloyd, oracle, hosvd")->delimiter(',');
    sub->add_option("--seed", grid.seed, "base seed")->required();
    sub->add_option("--workers", grid.workers, "worker threads")->check(CLI::PositiveNumber);
    alg.add(sub);
    sweep_out.add(sub);
  };

  auto* phase = simulate->add_subcommand("phase", "CER across (p, gamma)");
  add_grid(phase, phase_grid, phase_methods);
  auto* compare = simulate->add_subcommand("compare", "CER of several methods across gamma and xi");
  add_grid(compare, compare_grid, compare_methods);
  compare->add_option("--xi", compare_grid.xi, "proportion of cluster 1")->delimiter(',');

  tbm::InitImpactSpec init_spec;
  auto* init = simulate->add_subcommand("init", "HLloyd CER from contaminated truth over (Delta_min, contamination)");
  init->add_option("--d", init_spec.d)->check(CLI::Range(2, 8));
  init->add_option("--p", init_spec.p)->check(CLI::PositiveNumber);
  init->add_option("--r", init_spec.r)->check(CLI::PositiveNumber);
  init->add_option("--sigma", init_spec.sigma)->check(CLI::NonNegativeNumber);
  init->add_option("--delta", init_spec.delta, "Delta_min list")->delimiter(',');
  init->add_option("--eps", init_spec.contamination, "contamination list")->delimiter(',');
  init->add_option("--reps", init_spec.replications)->check(CLI::PositiveNumber);
  init->add_option("--seed", init_spec.seed)->required();
  init->add_option("--workers", init_spec.workers)->check(CLI::PositiveNumber);
  alg.add(init);
  sweep_out.add(init);

  tbm::EstimationSpec est_spec;
  auto* estimation = simulate->add_subcommand("estimation", "||X^ - X||_F of HSC+HLloyd and HOOI across p");
  estimation->add_option("--d", est_spec.d)->check(CLI::Range(2, 8));
  estimation->add_option("--p", est_spec.p)->delimiter(',');
  estimation->add_option("--r", est_spec.r)->check(CLI::PositiveNumber);
  estimation->add_option("--delta", est_spec.delta)->check(CLI::PositiveNumber);
  estimation->add_option("--sigma", est_spec.sigma)->check(CLI::NonNegativeNumber);
  estimation->add_option("--reps", est_spec.replications)->check(CLI::PositiveNumber);
  estimation->add_option("--seed", est_spec.seed)->required();
  estimation->add_option("--workers", est_spec.workers)->check(CLI::PositiveNumber);
  alg.add(estimation);
  sweep_out.add(estimation);

  // generate
  std::vector<int> gen_dims, gen_ranks;
  double gen_sigma = 1.0, gen_delta = 1.0;
  std::optional<double> gen_xi;
  std::string gen_out, gen_truth, gen_model;
  auto* generate = app.add_subcommand("generate", "Sample a synthetic block-model tensor");
  generate->add_option("--dims", gen_dims, "dimensions")->delimiter(',')->required();
  generate->add_option("--ranks", gen_ranks, "clusters per mode")->delimiter(',')->required();
  generate->add_option("--sigma", gen_sigma)->check(CLI::NonNegativeNumber);
  generate->add_option("--delta", gen_delta, "Delta_min")->check(CLI::PositiveNumber);
  generate->add_option("--xi", gen_xi, "proportion of cluster 1")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--seed", seed)->required();
  generate->add_option("--out,-o", gen_out, "tensor file")->required();
  generate->add_option("--truth", gen_truth, "prefix for true label CSVs (<prefix>.mode<k>.csv)");
  generate->add_option("--model", gen_model, "write the model as JSON");

  // cluster
  std::string tensor_path, out_prefix, trace_path;
  std::vector<int> ranks;
  std::vector<std::string> truth_paths;
  auto* cluster = app.add_subcommand("cluster", "HSC + HLloyd on a TBM1 tensor");
  cluster->add_option("tensor", tensor_path, "TBM1 tensor file")->required();
  cluster->add_option("--ranks", ranks, "clusters per mode")->delimiter(',')->required();
  cluster->add_option("--seed", seed);
  cluster->add_option("--out,-o", out_prefix, "output prefix: <prefix>.mode<k>.csv, <prefix>.core.tbm1")->required();
  cluster->add_option("--truth", truth_paths, "true label CSV per mode, reported as CER")->delimiter(',');
  cluster->add_option("--trace", trace_path, "HLloyd trace CSV");
  alg.add(cluster);

  // bic-select
  std::string grid_spec = "3,4,5,6";
  Output bic_out;
  auto* bic = app.add_subcommand("bic-select", "Choose ranks by BIC over a grid");
  bic->add_option("tensor", tensor_path, "TBM1 tensor file")->required();
  bic->add_option("--rank-grid", grid_spec, "ranks for every mode, or per mode separated by ';'");
  bic->add_option("--seed", seed);
  bic->add_option("--out,-o", bic_out.path, "table CSV (- for stdout)");
  alg.add(bic);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build tensors from text data");
  ingest->require_subcommand(1);
  std::size_t top_a = 0, top_b = 0, buckets = 24;
  std::string ids_path, delimiter;
  bool header = false;
  std::vector<std::size_t> columns;
  std::string edge_path;
  std::vector<std::string> event_paths;
  auto add_ingest = [&](CLI::App* sub) {
    sub->add_option("--out,-o", gen_out, "tensor file")->required();
    sub->add_option("--ids", ids_path, "id-map JSON file")->required();
    sub->add_option("--delimiter", delimiter, "field delimiter (default: detect tab or comma)");
    sub->add_flag("--header", header, "skip the first line");
    sub->add_option("--columns", columns, "0-based column indices of the three fields")->delimiter(',')->expected(3);
  };
  auto* edgelist = ingest->add_subcommand("edgelist", "layer,source,target edges to a binary tensor");
  edgelist->add_option("path", edge_path)->required()->check(CLI::ExistingFile);
  edgelist->add_option("--top-layers", top_a, "keep this many layers (0 = all)");
  edgelist->add_option("--top-nodes", top_b, "keep this many nodes by degree (0 = all)");
  add_ingest(edgelist);
  auto* events = ingest->add_subcommand("events", "a,b,bucket events, one file per group, to an averaged tensor");
  events->add_option("paths", event_paths)->required()->check(CLI::ExistingFile);
  events->add_option("--top-a", top_a, "keep this many a-entities (0 = all)");
  events->add_option("--top-b", top_b, "keep this many b-entities (0 = all)");
  events->add_option("--buckets", buckets, "bucket count")->check(CLI::PositiveNumber);
  add_ingest(events);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (!json_errors) {
      app.exit(e);
      return exit_usage;
    }
    throw UsageError(e.what());
  }

  auto delimiter_char = [&]() -> char {
    if (delimiter.empty()) return 0;
    if (delimiter == "\\t" || delimiter == "tab") return '\t';
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    return delimiter.front();
  };

  if (phase->parsed() || compare->parsed()) {
    tbm::ExperimentGrid& grid = phase->parsed() ? phase_grid : compare_grid;
    grid.methods = parse_methods(phase->parsed() ? phase_methods : compare_methods);
    grid.settings = alg.settings();
    try {
      grid.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    sweep_out.write(phase->parsed() ? tbm::run_phase_transition(grid) : tbm::run_method_comparison(grid));
  } else if (init->parsed()) {
    init_spec.settings = alg.settings();
    sweep_out.write(tbm::run_init_impact(init_spec));
  } else if (estimation->parsed()) {
    est_spec.settings = alg.settings();
    sweep_out.write(tbm::run_estimation_comparison(est_spec));
  } else if (generate->parsed()) {
    tbm::InstanceSpec spec;
    spec.dims = to_sizes(gen_dims);
    spec.ranks = gen_ranks;
    spec.sigma = gen_sigma;
    spec.delta = gen_delta;
    spec.first_fraction = gen_xi;
    const auto model = tbm::random_instance(spec, tbm::derive_seed(seed, {0}));
    tbm::save_tbm1(gen_out, tbm::sample(model, tbm::derive_seed(seed, {1})));
    if (!gen_truth.empty()) {
      for (std::size_t k = 0; k < model.labels.size(); ++k) {
        tbm::save_labels_csv(gen_truth + ".mode" + std::to_string(k + 1) + ".csv", model.labels[k]);
      }
    }
    if (!gen_model.empty()) {
      Output m{gen_model};
      m.stream() << tbm::model_to_json(model) << '\n';
    }
  } else if (cluster->parsed()) {
    const auto y = tbm::load_tbm1(tensor_path);
    if (ranks.size() != y.order()) throw UsageError("--ranks needs one entry per mode (" + std::to_string(y.order()) + ")");
    tbm::HLloydTrace trace;
    const auto labels = fit(y, ranks, alg, seed, &trace);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      tbm::save_labels_csv(out_prefix + ".mode" + std::to_string(k + 1) + ".csv", labels[k]);
    }
    const auto means = tbm::block_mean_estimate(y, labels);
    tbm::save_tbm1(out_prefix + ".core.tbm1", means.core);
    if (!trace_path.empty()) {
      Output t{trace_path};
      tbm::write_trace_csv(t.stream(), trace);
    }
    std::cout << "objective," << fmt(tbm::objective(y, means.core, labels)) << '\n';
    std::cout << "iterations," << trace.iterations() << '\n';
    if (!truth_paths.empty()) {
      if (truth_paths.size() != labels.size()) throw UsageError("--truth needs one file per mode");
      for (std::size_t k = 0; k < labels.size(); ++k) {
        const auto truth = tbm::load_labels_csv(truth_paths[k]);
        if (truth.size() != labels[k].size()) throw tbm::DataError(truth_paths[k] + ": wrong number of labels");
        std::cout << "cer_mode" << k + 1 << ',' << fmt(tbm::clustering_error_rate(truth, labels[k])) << '\n';
      }
    }
  } else if (bic->parsed()) {
    const auto y = tbm::load_tbm1(tensor_path);
    const auto modes = parse_rank_grid(grid_spec, y.order());
    const auto selection = tbm::select_ranks_bic(y, modes, alg.settings(), seed);
    std::ostream& out = bic_out.stream();
    out << "ranks,bic,status\n";
    for (const auto& c : selection.candidates) {
      out << join(c.ranks, 'x') << ',' << (c.status == "ok" ? fmt(c.bic) : "") << ',' << c.status << '\n';
    }
    const auto& best = selection.best;
    if (!best) throw tbm::DataError("bic-select: no admissible rank choice in the grid");
    std::cerr << "selected " << join(*best) << '\n';
    if (bic_out.path != "-") std::cout << join(*best) << '\n';
  } else if (edgelist->parsed() || events->parsed()) {
    tbm::IngestResult result = [&] {
      if (edgelist->parsed()) {
        tbm::EdgeListOptions opt;
        opt.delimiter = delimiter_char();
        opt.header = header;
        if (!columns.empty()) {
          opt.layer_column = columns[0];
          opt.source_column = columns[1];
          opt.target_column = columns[2];
        }
        return tbm::ingest_edgelist(edge_path, top_a, top_b, opt);
      }
      tbm::EventOptions opt;
      opt.delimiter = delimiter_char();
      opt.header = header;
      if (!columns.empty()) {
        opt.a_column = columns[0];
        opt.b_column = columns[1];
        opt.bucket_column = columns[2];
      }
      return tbm::ingest_events(event_paths, top_a, top_b, buckets, opt);
    }();
    tbm::save_tbm1(gen_out, result.tensor);
    Output ids{ids_path};
    tbm::write_id_map_json(ids.stream(), result.axes);
    std::cout << result.tensor.shape().to_string() << '\n';
  }
  return exit_ok;
}

void report(bool json, const char* kind, const std::string& message, int code) {
  if (json) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  } else {
    std::cerr << "tbmc: " << message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool json_errors = false;
  for (int i = 1; i < argc; ++i) json_errors = json_errors || std::string(argv[i]) == "--json-errors";
  try {
    return run(argc, argv, json_errors);
  } catch (const UsageError& e) {
    report(json_errors, "usage", e.what(), exit_usage);
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    report(json_errors, "usage", e.what(), exit_usage);
    return exit_usage;
  } catch (const std::exception& e) {
    report(json_errors, "data", e.what(), exit_data);
    return exit_data;
  }
}
