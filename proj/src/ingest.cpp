#include "tbm/ingest.hpp"

#include "tbm/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace tbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Calls fn(fields, line_number) for every data line of the file.
template <class Fn>
void read_rows(const std::string& path, const DelimitedOptions& options, std::size_t needed, Fn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t number = 0;
  char delim = options.delimiter;
  bool skip_header = options.header;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (delim == 0) delim = t.find('\t') != std::string::npos ? '\t' : ',';
    if (skip_header) {
      skip_header = false;
      continue;
    }
    auto fields = split(t, delim);
    if (fields.size() < needed) {
      throw DataError(path + ":" + std::to_string(number) + ": expected at least " + std::to_string(needed) + " columns");
    }
    fn(fields, number);
  }
  if (in.bad()) throw DataError("error reading " + path);
}

const std::string& field(const std::vector<std::string>& fields, std::size_t col, const std::string& where) {
  const std::string& s = fields.at(col);
  if (s.empty()) throw DataError(where + ": empty id");
  return s;
}

// Keeps the `limit` ids with the highest counts (ties by id); 0 keeps all.
// Returns the survivors in id order.
std::vector<std::string> top_by_count(const std::map<std::string, std::size_t>& counts, std::size_t limit) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (limit > 0 && v.size() > limit) v.resize(limit);
  std::vector<std::string> ids;
  for (auto& [id, n] : v) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::map<std::string, std::size_t> positions(const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], i);
  return pos;
}

std::size_t parse_bucket(const std::string& s, std::size_t buckets, const std::string& where) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(where + ": bucket '" + s + "' is not an integer");
  if (v < 0 || static_cast<unsigned long long>(v) >= buckets) {
    throw DataError(where + ": bucket " + s + " outside [0, " + std::to_string(buckets) + ")");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

IngestResult ingest_edgelist(const std::string& path, std::size_t top_a, std::size_t top_b,
                             const EdgeListOptions& options) {
  using Edge = std::tuple<std::string, std::string, std::string>;
  std::set<Edge> edges;
  const std::size_t needed = std::max({options.layer_column, options.source_column, options.target_column}) + 1;
  read_rows(path, options, needed, [&](const std::vector<std::string>& f, std::size_t line) {
    const std::string where = path + ":" + std::to_string(line);
    edges.emplace(field(f, options.layer_column, where), field(f, options.source_column, where),
                  field(f, options.target_column, where));
  });

  std::map<std::string, std::size_t> degree;
  for (const auto& [layer, s, t] : edges) {
    ++degree[s];
    if (t != s) ++degree[t];
  }
  const auto nodes = top_by_count(degree, top_b);
  const auto node_pos = positions(nodes);

  std::map<std::string, std::size_t> layer_edges;
  for (const auto& [layer, s, t] : edges) {
    if (node_pos.count(s) && node_pos.count(t)) ++layer_edges[layer];
  }
  const auto layers = top_by_count(layer_edges, top_a);
  if (layers.empty() || nodes.empty()) throw DataError(path + ": no edges remain after filtering");
  const auto layer_pos = positions(layers);

  DenseTensor y(Shape{layers.size(), nodes.size(), nodes.size()});
  for (const auto& [layer, s, t] : edges) {
    const auto l = layer_pos.find(layer);
    const auto a = node_pos.find(s);
    const auto b = node_pos.find(t);
    if (l == layer_pos.end() || a == node_pos.end() || b == node_pos.end()) continue;
    y.at({l->second, a->second, b->second}) = 1.0;
  }
  return {std::move(y), {{"layer", layers}, {"source", nodes}, {"target", nodes}}};
}

IngestResult ingest_events(const std::vector<std::string>& paths, std::size_t top_a, std::size_t top_b,
                           std::size_t buckets, const EventOptions& options) {
  if (paths.empty()) throw DataError("ingest_events: no input files");
  if (buckets == 0) throw DataError("ingest_events: bucket count must be positive");
  using Event = std::tuple<std::string, std::string, std::size_t>;
  std::vector<std::set<Event>> groups(paths.size());
  const std::size_t needed = std::max({options.a_column, options.b_column, options.bucket_column}) + 1;
  for (std::size_t g = 0; g < paths.size(); ++g) {
    read_rows(paths[g], options, needed, [&](const std::vector<std::string>& f, std::size_t line) {
      const std::string where = paths[g] + ":" + std::to_string(line);
      groups[g].emplace(field(f, options.a_column, where), field(f, options.b_column, where),
                        parse_bucket(f.at(options.bucket_column), buckets, where));
    });
  }

  std::map<std::string, std::size_t> count_a, count_b;
  for (const auto& events : groups) {
    for (const auto& [a, b, k] : events) {
      ++count_a[a];
      ++count_b[b];
    }
  }
  const auto ids_a = top_by_count(count_a, top_a);
  const auto ids_b = top_by_count(count_b, top_b);
  if (ids_a.empty() || ids_b.empty()) throw DataError("ingest_events: no events remain after filtering");
  const auto pos_a = positions(ids_a);
  const auto pos_b = positions(ids_b);

  DenseTensor y(Shape{ids_a.size(), ids_b.size(), buckets});
  for (const auto& events : groups) {
    for (const auto& [a, b, k] : events) {
      const auto i = pos_a.find(a);
      const auto j = pos_b.find(b);
      if (i == pos_a.end() || j == pos_b.end()) continue;
      y.at({i->second, j->second, k}) += 1.0;
    }
  }
  for (double& v : y.data()) v /= static_cast<double>(groups.size());
  std::vector<std::string> bucket_ids;
  for (std::size_t k = 0; k < buckets; ++k) bucket_ids.push_back(std::to_string(k));
  return {std::move(y), {{"a", ids_a}, {"b", ids_b}, {"bucket", bucket_ids}}};
}

void write_id_map_json(std::ostream& out, const std::vector<IdMap>& axes) {
  auto j = nlohmann::json::array();
  for (const auto& m : axes) j.push_back({{"axis", m.axis}, {"ids", m.ids}});
  out << j.dump(2) << '\n';
}

std::vector<IdMap> read_id_map_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<IdMap> axes;
    for (const auto& e : j) axes.push_back({e.at("axis").get<std::string>(), e.at("ids").get<std::vector<std::string>>()});
    return axes;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("id map: ") + e.what());
  }
}

}  // namespace tbm
