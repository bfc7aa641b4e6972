#include "tbm/block_model.hpp"

#include "cell_iteration.hpp"
#include "tbm/errors.hpp"
#include "tbm/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tbm {

namespace {

std::vector<std::vector<int>> label_maps(const std::vector<Labels>& labels) {
  std::vector<std::vector<int>> maps;
  maps.reserve(labels.size());
  for (const auto& z : labels) maps.push_back(z.values());
  return maps;
}

Shape rank_shape(const std::vector<Labels>& labels) {
  std::vector<std::size_t> r;
  for (const auto& z : labels) r.push_back(static_cast<std::size_t>(z.clusters()));
  return Shape(std::move(r));
}

void require_conformable(const DenseTensor& y, const std::vector<Labels>& labels) {
  if (labels.size() != y.order()) throw std::invalid_argument("labels/tensor order mismatch");
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k].size() != y.shape()[k]) {
      throw std::invalid_argument("mode " + std::to_string(k) + " labels have length " +
                                  std::to_string(labels[k].size()) + ", tensor extent is " +
                                  std::to_string(y.shape()[k]));
    }
  }
}

}  // namespace

Shape BlockModel::shape() const {
  std::vector<std::size_t> dims;
  for (const auto& z : labels) dims.push_back(z.size());
  return Shape(std::move(dims));
}

std::vector<std::size_t> BlockModel::ranks() const { return rank_shape(labels).dims(); }

void BlockModel::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("BlockModel: sigma must be >= 0");
  if (labels.size() != core.order()) throw std::invalid_argument("BlockModel: need one label vector per mode");
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (static_cast<std::size_t>(labels[k].clusters()) != core.shape()[k]) {
      throw std::invalid_argument("BlockModel: mode " + std::to_string(k) + " cluster count disagrees with core");
    }
    if (!labels[k].all_nonempty()) throw EmptyClusterError("BlockModel: empty cluster on mode " + std::to_string(k));
  }
}

double delta_sq(const CoreTensor& core, std::size_t mode) {
  const Matrix rows = unfold(core, mode);
  if (rows.rows() < 2) throw std::invalid_argument("delta_sq: mode needs at least two clusters");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < rows.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < rows.rows(); ++b) {
      best = std::min(best, (rows.row(a) - rows.row(b)).squaredNorm());
    }
  }
  return best;
}

double delta_min(const CoreTensor& core) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < core.order(); ++k) {
    if (core.shape()[k] >= 2) best = std::min(best, delta_sq(core, k));
  }
  if (!std::isfinite(best)) throw std::invalid_argument("delta_min: no mode has two clusters");
  return best;
}

double snr(const CoreTensor& core, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("snr: sigma must be positive");
  return delta_min(core) / (sigma * sigma);
}

DenseTensor synthesize_signal(const CoreTensor& core, const std::vector<Labels>& labels) {
  if (labels.size() != core.order()) throw std::invalid_argument("synthesize_signal: order mismatch");
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (static_cast<std::size_t>(labels[k].clusters()) != core.shape()[k]) {
      throw std::invalid_argument("synthesize_signal: cluster count disagrees with core");
    }
    dims.push_back(labels[k].size());
  }
  Shape shape(std::move(dims));
  std::vector<double> x(shape.total());
  detail::for_each_mapped(shape, label_maps(labels), core.shape(),
                          [&](std::size_t flat, std::size_t cell) { x[flat] = core[cell]; });
  return DenseTensor(std::move(shape), std::move(x));
}

DenseTensor synthesize_signal(const BlockModel& model) { return synthesize_signal(model.core, model.labels); }

DenseTensor sample(const BlockModel& model, std::uint64_t seed) {
  model.validate();
  DenseTensor y = synthesize_signal(model);
  if (model.sigma == 0.0) return y;
  Random rng(seed);
  for (double& v : y.data()) v += model.sigma * rng.normal();
  return y;
}

std::vector<std::size_t> cluster_sizes(std::size_t p, int r, std::optional<double> first_fraction) {
  if (r < 1) throw std::invalid_argument("cluster_sizes: r must be positive");
  const auto rr = static_cast<std::size_t>(r);
  if (rr > p) throw std::invalid_argument("cluster_sizes: more clusters than entities");
  std::vector<std::size_t> sizes(rr, 0);
  std::size_t rest = p;
  std::size_t first = 0;
  if (first_fraction) {
    const double xi = *first_fraction;
    if (!(xi > 0.0 && xi < 1.0) || r < 2) throw std::invalid_argument("cluster_sizes: need 0 < xi < 1 and r >= 2");
    sizes[0] = static_cast<std::size_t>(std::llround(xi * static_cast<double>(p)));
    rest = p - std::min(sizes[0], p);
    first = 1;
  }
  const std::size_t n = rr - first;
  for (std::size_t a = first; a < rr; ++a) sizes[a] = rest / n + ((a - first) < rest % n ? 1 : 0);
  for (std::size_t a = 0; a < rr; ++a) {
    if (sizes[a] == 0) throw std::invalid_argument("cluster_sizes: cluster proportions leave cluster " + std::to_string(a) + " empty");
  }
  return sizes;
}

Labels labels_from_sizes(const std::vector<std::size_t>& sizes) {
  std::size_t p = 0;
  for (std::size_t s : sizes) p += s;
  std::vector<std::size_t> left = sizes;
  std::vector<int> z;
  z.reserve(p);
  std::size_t a = 0;
  while (z.size() < p) {
    if (left[a] > 0) {
      --left[a];
      z.push_back(static_cast<int>(a));
    }
    a = (a + 1) % sizes.size();
  }
  return Labels(std::move(z), static_cast<int>(sizes.size()));
}

double delta_for_gamma(std::size_t p, double gamma, double sigma) {
  return sigma * std::pow(static_cast<double>(p), gamma / 2.0);
}

BlockModel random_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.dims.size() != spec.ranks.size()) throw std::invalid_argument("random_instance: dims/ranks length mismatch");
  if (!(spec.delta > 0.0)) throw std::invalid_argument("random_instance: delta must be positive");
  BlockModel model;
  model.sigma = spec.sigma;
  std::vector<std::size_t> r;
  for (std::size_t k = 0; k < spec.dims.size(); ++k) {
    model.labels.push_back(labels_from_sizes(cluster_sizes(spec.dims[k], spec.ranks[k], spec.first_fraction)));
    r.push_back(static_cast<std::size_t>(spec.ranks[k]));
  }
  Shape core_shape(std::move(r));
  Random rng(seed);
  for (;;) {
    DenseTensor core(core_shape);
    for (double& v : core.data()) v = rng.normal();
    const double raw = delta_min(core);
    if (std::sqrt(raw) < 1e-8) continue;
    core *= spec.delta / std::sqrt(raw);
    model.core = std::move(core);
    break;
  }
  model.validate();
  return model;
}

BlockModel random_instance(std::size_t d, std::size_t p, int r, double gamma, double sigma,
                           std::optional<double> first_fraction, std::uint64_t seed) {
  InstanceSpec spec;
  spec.dims.assign(d, p);
  spec.ranks.assign(d, r);
  spec.sigma = sigma;
  spec.delta = delta_for_gamma(p, gamma, sigma > 0.0 ? sigma : 1.0);
  spec.first_fraction = first_fraction;
  return random_instance(spec, seed);
}

BlockMeans block_mean_estimate(const DenseTensor& y, const std::vector<Labels>& labels) {
  require_conformable(y, labels);
  const Shape cells = rank_shape(labels);
  std::vector<double> sum(cells.total(), 0.0);
  std::vector<std::size_t> count(cells.total(), 0);
  detail::for_each_mapped(y.shape(), label_maps(labels), cells, [&](std::size_t flat, std::size_t cell) {
    sum[cell] += y[flat];
    ++count[cell];
  });
  BlockMeans out{DenseTensor(cells), 0};
  for (std::size_t c = 0; c < cells.total(); ++c) {
    if (count[c] == 0) {
      ++out.empty_cells;
    } else {
      out.core[c] = sum[c] / static_cast<double>(count[c]);
    }
  }
  return out;
}

DenseTensor estimate_xhat(const DenseTensor& y, const std::vector<Labels>& labels) {
  return synthesize_signal(block_mean_estimate(y, labels).core, labels);
}

double objective(const DenseTensor& y, const CoreTensor& core, const std::vector<Labels>& labels) {
  require_conformable(y, labels);
  if (core.shape() != rank_shape(labels)) throw std::invalid_argument("objective: core shape disagrees with labels");
  double total = 0.0;
  detail::for_each_mapped(y.shape(), label_maps(labels), core.shape(), [&](std::size_t flat, std::size_t cell) {
    const double r = y[flat] - core[cell];
    total += r * r;
  });
  return total;
}

double bic_value(const std::vector<std::size_t>& dims, const std::vector<int>& ranks, double rss) {
  if (dims.size() != ranks.size()) throw std::invalid_argument("bic_value: dims/ranks mismatch");
  if (!(rss > 0.0)) throw std::domain_error("bic: residual sum of squares is zero");
  double p_total = 1.0, r_total = 1.0, membership = 0.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    p_total *= static_cast<double>(dims[k]);
    r_total *= static_cast<double>(ranks[k]);
    membership += static_cast<double>(dims[k]) * std::log(static_cast<double>(ranks[k]));
  }
  return p_total * std::log(rss) + (r_total + membership) * std::log(p_total);
}

double bic(const DenseTensor& y, const std::vector<Labels>& labels) {
  const BlockMeans means = block_mean_estimate(y, labels);
  const double rss = objective(y, means.core, labels);
  std::vector<int> ranks;
  for (const auto& z : labels) ranks.push_back(z.clusters());
  return bic_value(y.shape().dims(), ranks, rss);
}

bool balance_check(const Labels& z, double alpha, double beta) {
  const double ideal = static_cast<double>(z.size()) / static_cast<double>(z.clusters());
  for (std::size_t s : z.cluster_sizes()) {
    const auto n = static_cast<double>(s);
    if (n < alpha * ideal || n > beta * ideal) return false;
  }
  return true;
}

std::string model_to_json(const BlockModel& model) {
  nlohmann::json j;
  j["dims"] = model.shape().dims();
  j["ranks"] = model.ranks();
  j["sigma"] = model.sigma;
  j["core"] = std::vector<double>(model.core.data().begin(), model.core.data().end());
  auto labels = nlohmann::json::array();
  for (const auto& z : model.labels) labels.push_back(z.one_based());
  j["labels"] = labels;
  return j.dump();
}

BlockModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const auto ranks = j.at("ranks").get<std::vector<std::size_t>>();
    const auto labels = j.at("labels").get<std::vector<std::vector<int>>>();
    if (labels.size() != dims.size()) throw DataError("model JSON: labels/dims mismatch");
    BlockModel model;
    model.sigma = j.at("sigma").get<double>();
    model.core = DenseTensor(Shape(ranks), j.at("core").get<std::vector<double>>());
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (labels[k].size() != dims[k]) throw DataError("model JSON: label length disagrees with dims");
      model.labels.push_back(Labels::from_one_based(labels[k], static_cast<int>(ranks[k])));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace tbm
