#pragma once

// Builds binary (or group-averaged) order-3 tensors from delimited text files
// of edges and timestamped events.

#include "tbm/tensor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tbm {

struct IdMap {
  std::string axis;
  std::vector<std::string> ids;
};

struct IngestResult {
  DenseTensor tensor;
  std::vector<IdMap> axes;
};

struct DelimitedOptions {
  /// 0 detects tab or comma from the first data line.
  char delimiter = 0;
  /// Skip the first non-comment line.
  bool header = false;
};

struct EdgeListOptions : DelimitedOptions {
  std::size_t layer_column = 0;
  std::size_t source_column = 1;
  std::size_t target_column = 2;
};

/// Y[layer, source, target] = 1 for every listed edge (duplicates collapse).
/// Keeps the top_b nodes by degree (distinct incident edges, ties by id), then
/// the top_a layers by retained edge count among layers with at least one
/// retained edge. A limit of 0 keeps everything. Axes are ordered by id.
IngestResult ingest_edgelist(const std::string& path, std::size_t top_a, std::size_t top_b,
                             const EdgeListOptions& options = {});

struct EventOptions : DelimitedOptions {
  std::size_t a_column = 0;
  std::size_t b_column = 1;
  std::size_t bucket_column = 2;
};

/// One file per group; Y = mean over groups of the binary tensors
/// Y_m[a, b, bucket]. Entities are filtered to the top_a / top_b by number of
/// distinct events across all groups (ties by id). Buckets lie in [0, buckets).
IngestResult ingest_events(const std::vector<std::string>& paths, std::size_t top_a, std::size_t top_b,
                           std::size_t buckets, const EventOptions& options = {});

/// [{"axis": "...", "ids": [...]}, ...]
void write_id_map_json(std::ostream& out, const std::vector<IdMap>& axes);
std::vector<IdMap> read_id_map_json(std::istream& in);

}  // namespace tbm
