#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fairbayes/data.hpp"

namespace fairbayes {

/// Numerator / denominator of a per-group metric over labeled examples.
/// Accuracy: correct / all. TPR: (yhat=1, y=1) / (y=1). FPR: (yhat=1, y=0) / (y=0).
struct MetricCounts {
  std::size_t successes = 0;
  std::size_t trials = 0;

  std::size_t failures() const noexcept { return trials - successes; }
};

/// Counts for every declared group; unlabeled examples are ignored.
std::vector<MetricCounts> metric_counts(const Dataset& labeled, MetricKind metric);

struct FreqEstimate {
  std::vector<std::optional<double>> per_group;  // indexed by GroupId::index
  std::optional<double> delta;
};

FreqEstimate freq_metric(const Dataset& labeled, MetricKind metric, GroupPair pair);

}  // namespace fairbayes
