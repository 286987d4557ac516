#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairbayes/beta_binomial.hpp"
#include "fairbayes/calibration.hpp"
#include "fairbayes/data.hpp"
#include "fairbayes/mcmc.hpp"
#include "fairbayes/report.hpp"
#include "fairbayes/simulate.hpp"

namespace fairbayes {

struct ExperimentSettings {
  std::vector<Method> methods{Method::Freq, Method::BB, Method::BC};
  std::vector<MetricKind> metrics{MetricKind::Accuracy};
  GroupPair pair;
  std::size_t n_labeled = 10;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  PriorConfig prior;
  SamplerConfig sampler;
  BetaPrior bb_prior;
  std::size_t bb_draws = 800;
};

struct RunEstimate {
  std::optional<double> estimate;
  std::optional<std::pair<double, double>> ci;
};

struct MethodResult {
  Method method = Method::BC;
  std::string label;
  std::vector<RunEstimate> runs;
  /// Absent when any run produced no estimate.
  std::optional<double> mae;
  double mae_stderr = 0.0;
  std::size_t missing = 0;
  /// Fraction of runs whose 95% interval contains the truth; Bayesian methods only.
  std::optional<double> coverage;
};

struct ExperimentResult {
  MetricKind metric = MetricKind::Accuracy;
  std::size_t n_labeled = 0;
  std::size_t runs = 0;
  double truth = 0.0;
  std::vector<MethodResult> methods;

  const MethodResult& method(Method m) const;
};

/// Population value of delta for a metric. Throws InvalidSpec when a group
/// has no examples of the conditioning class.
double population_truth(const Dataset& population, MetricKind metric, GroupPair pair);

/// Repeated labeled subsampling of a fully labeled population. Each run
/// splits once with a stream derived from (seed, run) and evaluates every
/// method and metric on that split; one posterior serves all metrics.
/// Calibration methods share the sampler stream of a run, so changing the
/// prior or method list leaves the other methods' results unchanged.
std::vector<ExperimentResult> run_experiment(const Dataset& population, const ExperimentSettings& settings);

ExperimentResult mae_experiment(const Dataset& population, MetricKind metric, ExperimentSettings settings);
ExperimentResult coverage_experiment(const Dataset& population, MetricKind metric, ExperimentSettings settings);

struct SensitivityRow {
  double alpha = 1.0;
  MethodResult bc;
};

struct SensitivityResult {
  MetricKind metric = MetricKind::Accuracy;
  std::size_t n_labeled = 0;
  double truth = 0.0;
  MethodResult bb;
  std::vector<SensitivityRow> rows;
};

/// BC rerun with prior.alpha set to each entry, alongside BB on the same splits.
SensitivityResult sensitivity_sweep(const Dataset& population, MetricKind metric, const std::vector<double>& alphas,
                                    ExperimentSettings settings);

/// BB, NHBC and BC on identical splits.
std::vector<ExperimentResult> ablation_nhbc(const Dataset& population, ExperimentSettings settings);

struct RequiredNSettings {
  MetricKind metric = MetricKind::TPR;
  GroupPair pair;
  double low = 0.04;
  double high = 0.06;
  double confidence = 0.95;
  std::size_t sims = 1000;
  std::vector<std::size_t> n_grid{1000, 6000, 12000, 24000, 48000, 96000, 192000};
  std::uint64_t seed = 0;
};

struct RequiredNRow {
  std::size_t n_labeled = 0;
  std::size_t hits = 0;
  std::size_t undefined = 0;
  std::size_t sims = 0;
  double fraction = 0.0;
};

struct RequiredNResult {
  double truth = 0.0;
  std::vector<RequiredNRow> rows;
  /// Smallest grid size whose hit fraction reaches the confidence level.
  std::optional<std::size_t> smallest;
};

/// Frequentist delta over labeled samples of size n drawn from the spec's
/// population rates. Counts are simulated directly: group sizes are
/// multinomial, class counts binomial, and prediction counts binomial in the
/// group's TPR / FPR. Simulations with an empty conditioning class miss.
RequiredNResult required_n_experiment(const SyntheticSpec& spec, const RequiredNSettings& settings);

struct LemmaCheck {
  double estimate = 0.0;  // posterior mean of delta accuracy
  double truth = 0.0;
  double l1_unprivileged = 0.0;
  double l1_privileged = 0.0;
  double mc_stderr = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Compares the posterior-mean delta accuracy on one labeled split with the
/// population truth. The allowance is the L1 distance between posterior-mean
/// and true calibration curves, averaged over each group's population scores,
/// plus four standard errors of label noise among the unlabeled examples.
LemmaCheck lemma_bound_check(const SyntheticSpec& spec, const Dataset& population, const ExperimentSettings& settings);

void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
std::string results_json(const std::vector<ExperimentResult>& results);
void write_plot_csv(std::ostream& out, const std::vector<ExperimentResult>& results);

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityResult>& results);
std::string sensitivity_json(const std::vector<SensitivityResult>& results);

void write_required_n_csv(std::ostream& out, const RequiredNResult& result);
std::string required_n_json(const RequiredNResult& result, const RequiredNSettings& settings);

}  // namespace fairbayes
