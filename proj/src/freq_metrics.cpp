#include "fairbayes/freq_metrics.hpp"

namespace fairbayes {

std::vector<MetricCounts> metric_counts(const Dataset& labeled, MetricKind metric) {
  std::vector<MetricCounts> counts(labeled.group_count());
  for (const auto& ex : labeled.examples()) {
    if (!ex.label) continue;
    auto& c = counts[ex.group.index];
    const bool y = *ex.label == 1;
    const bool yhat = ex.predicted();
    switch (metric) {
      case MetricKind::Accuracy:
        ++c.trials;
        c.successes += (y == yhat);
        break;
      case MetricKind::TPR:
        if (y) {
          ++c.trials;
          c.successes += yhat;
        }
        break;
      case MetricKind::FPR:
        if (!y) {
          ++c.trials;
          c.successes += yhat;
        }
        break;
    }
  }
  return counts;
}

FreqEstimate freq_metric(const Dataset& labeled, MetricKind metric, GroupPair pair) {
  const auto counts = metric_counts(labeled, metric);
  FreqEstimate out;
  out.per_group.reserve(counts.size());
  for (const auto& c : counts) {
    if (c.trials == 0)
      out.per_group.emplace_back(std::nullopt);
    else
      out.per_group.emplace_back(static_cast<double>(c.successes) / static_cast<double>(c.trials));
  }
  const auto& hi = out.per_group.at(pair.unprivileged.index);
  const auto& lo = out.per_group.at(pair.privileged.index);
  if (hi && lo) out.delta = *hi - *lo;
  return out;
}

}  // namespace fairbayes
