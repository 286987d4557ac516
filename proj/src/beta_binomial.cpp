#include "fairbayes/beta_binomial.hpp"

#include <cmath>

#include "fairbayes/error.hpp"
#include "fairbayes/freq_metrics.hpp"
#include "fairbayes/random.hpp"

namespace fairbayes {

namespace {

void check_prior(const BetaPrior& prior) {
  if (!(prior.alpha > 0.0) || !(prior.beta > 0.0) || !std::isfinite(prior.alpha) ||
      !std::isfinite(prior.beta))
    throw InvalidPrior("beta prior parameters must be positive and finite");
}

BetaPosterior update(const MetricCounts& c, const BetaPrior& prior) {
  return {prior.alpha + static_cast<double>(c.successes),
          prior.beta + static_cast<double>(c.failures())};
}

}  // namespace

BetaPosterior bb_posterior(const Dataset& labeled, MetricKind metric, GroupId group,
                           BetaPrior prior) {
  check_prior(prior);
  const auto counts = metric_counts(labeled, metric);
  return update(counts.at(group.index), prior);
}

PosteriorSamples bb_delta_samples(const Dataset& labeled, MetricKind metric, GroupPair pair,
                                  std::size_t draws, std::uint64_t seed, BetaPrior prior) {
  check_prior(prior);
  if (draws == 0) throw InvalidConfig("posterior draw count must be at least 1");
  const auto counts = metric_counts(labeled, metric);

  PosteriorSamples out;
  out.theta.resize(labeled.group_count());
  for (GroupId g : {pair.unprivileged, pair.privileged}) {
    const auto post = update(counts.at(g.index), prior);
    Rng rng = make_rng(seed, {0xbb, g.index});
    auto& th = out.theta[g.index];
    th.resize(draws);
    for (auto& v : th) v = sample_beta(rng, post.alpha, post.beta);
  }
  const auto& hi = out.theta[pair.unprivileged.index];
  const auto& lo = out.theta[pair.privileged.index];
  out.delta.resize(draws);
  for (std::size_t t = 0; t < draws; ++t) out.delta[t] = hi[t] - lo[t];
  return out;
}

}  // namespace fairbayes
