#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairbayes/data.hpp"

namespace fairbayes {

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

struct BetaPosterior {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const noexcept { return alpha / (alpha + beta); }
};

/// Posterior draws of a per-group metric and of the pair difference.
struct PosteriorSamples {
  std::vector<std::vector<double>> theta;  // [group][t]
  std::vector<double> delta;               // theta[unprivileged][t] - theta[privileged][t]
  /// Draws dropped because a conditional metric had no posterior mass in its
  /// denominator; `flagged` is set when more than 10% were dropped.
  std::size_t skipped = 0;
  bool flagged = false;

  std::size_t size() const noexcept { return delta.size(); }
};

BetaPosterior bb_posterior(const Dataset& labeled, MetricKind metric, GroupId group,
                           BetaPrior prior = {});

/// T independent draws per group from the conjugate posteriors, differenced.
/// Groups outside the pair carry no draws (their theta rows stay empty).
PosteriorSamples bb_delta_samples(const Dataset& labeled, MetricKind metric, GroupPair pair,
                                  std::size_t draws, std::uint64_t seed, BetaPrior prior = {});

}  // namespace fairbayes
