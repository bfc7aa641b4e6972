#pragma once

// High-order Lloyd refinement: alternate block-mean updates with per-mode
// nearest-core reassignment in the space aggregated over the other modes.

#include "tbm/block_model.hpp"
#include "tbm/labels.hpp"
#include "tbm/tensor.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace tbm {

enum class UpdateOrder {
  /// Every mode aggregates with the labels from the start of the round.
  simultaneous,
  /// Mode k aggregates with the labels already updated for modes < k this round.
  sequential,
};

struct HLloydConfig {
  /// Rounds T; defaults to ceil(2 ln max_k p_k).
  std::optional<int> max_iters;
  /// Stop after a round in which no label changed.
  bool early_stop = true;
  UpdateOrder order = UpdateOrder::simultaneous;
};

int default_hlloyd_iterations(const Shape& shape);

struct HLloydTrace {
  /// Objective of (S^(t), z^(t)) at the start of each executed round.
  std::vector<double> objectives;
  /// changes[t][k]: entities of mode k relabelled in round t.
  std::vector<std::vector<std::size_t>> changes;
  /// repairs[t][k]: empty clusters refilled on mode k in round t.
  std::vector<std::vector<std::size_t>> repairs;

  std::size_t iterations() const { return objectives.size(); }
};

struct HLloydResult {
  std::vector<Labels> labels;
  HLloydTrace trace;
};

/// Tensor of shape (r_0, ..., p_k, ..., r_{d-1}): averages of y over the
/// clusters of every mode except k. Throws EmptyClusterError if a cluster on a
/// mode other than k is empty.
DenseTensor aggregate_mode(const DenseTensor& y, const std::vector<Labels>& labels, std::size_t mode);

/// Nearest row of unfold(core, k) for every row of unfold(agg, k); ties go to
/// the lowest cluster.
Labels assign_mode(const DenseTensor& agg, const CoreTensor& core, std::size_t mode);

HLloydResult hlloyd(const DenseTensor& y, const std::vector<Labels>& init, const HLloydConfig& config = {});

/// CSV with header iter,objective,changes_mode_1..changes_mode_d.
void write_trace_csv(std::ostream& out, const HLloydTrace& trace);

}  // namespace tbm
