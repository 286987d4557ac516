#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairbayes/calibration.hpp"
#include "fairbayes/data.hpp"
#include "fairbayes/random.hpp"

namespace fairbayes {

struct SamplerConfig {
  std::size_t chains = 4;
  std::size_t burn_in = 1500;
  std::size_t samples_per_chain = 200;
  std::uint64_t seed = 0;
  double target_accept = 0.3;
  std::size_t adapt_window = 50;
  /// Ignore the labeled data and sample the prior. Required when the labeled
  /// set is empty.
  bool prior_only = false;

  std::size_t total_draws() const noexcept { return chains * samples_per_chain; }
  void validate() const;
};

/// Gaussian random-walk proposal for one parameter block. During burn-in the
/// overall scale is tuned toward a target acceptance rate once per window and
/// the shape follows the empirical covariance of the block; freeze() fixes both.
class AdaptiveProposal {
 public:
  AdaptiveProposal(std::size_t dim, double initial_scale, bool learn_covariance = true);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(chol_.rows()); }
  /// Writes a proposal increment into `step`.
  void draw(Rng& rng, std::span<double> step);
  void record(bool accepted) noexcept;
  /// Feed the current block value for covariance learning.
  void observe(std::span<const double> x);
  void end_window(double target_accept);
  void freeze() noexcept;
  bool frozen() const noexcept { return frozen_; }

  double scale() const noexcept;
  /// Acceptance rate since freeze(), or over all proposals if never frozen.
  double acceptance_rate() const noexcept;

 private:
  Eigen::MatrixXd chol_;
  double log_lambda_ = 0.0;
  bool learn_cov_ = true;
  bool frozen_ = false;
  bool shaped_ = false;
  std::size_t windows_ = 0;
  std::size_t window_accepts_ = 0;
  std::size_t window_proposals_ = 0;
  std::size_t accepts_ = 0;
  std::size_t proposals_ = 0;
  std::size_t obs_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

struct RandomWalkRun {
  std::vector<std::vector<double>> draws;  // [iteration][coordinate]
  double acceptance_rate = 0.0;
};

/// Single-block adaptive random-walk Metropolis on an arbitrary log density.
/// Shares the adaptation machinery with the calibration sampler.
RandomWalkRun random_walk_metropolis(const std::function<double(std::span<const double>)>& log_density,
                                     std::vector<double> initial, std::size_t burn_in,
                                     std::size_t samples, Rng& rng, double target_accept = 0.3,
                                     std::size_t adapt_window = 50);

struct PosteriorDraw {
  std::vector<CalibrationParams> groups;  // indexed by GroupId::index
  HyperParams hyper;
};

struct BlockAcceptance {
  std::string block;
  std::size_t chain = 0;
  double rate = 0.0;
};

struct SamplerDiagnostics {
  std::map<std::string, double> rhat;
  std::vector<BlockAcceptance> acceptance;
};

struct CalibrationPosterior {
  std::vector<PosteriorDraw> draws;      // chain-major: chain 0 first
  std::vector<std::uint32_t> chain_index;
  std::vector<std::uint32_t> iteration;  // post-burn-in index within the chain
  std::size_t chains = 0;
  std::size_t samples_per_chain = 0;
  std::vector<std::string> group_names;
  std::vector<std::string> coordinate_names;
  std::vector<std::vector<double>> coordinates;  // [draw][coordinate], sampler space
  SamplerDiagnostics diagnostics;

  std::size_t size() const noexcept { return draws.size(); }
  /// Per-chain traces of one sampler coordinate.
  std::vector<std::vector<double>> traces(std::size_t coordinate) const;
};

/// Adaptive random-walk Metropolis-within-Gibbs over the hierarchical
/// calibration posterior. Chains run concurrently on independent streams
/// derived from config.seed; the result does not depend on scheduling.
CalibrationPosterior sample_posterior(const Dataset& labeled, const PriorConfig& prior,
                                      const SamplerConfig& config);

/// Split R-hat for every sampler coordinate, keyed by coordinate name.
std::map<std::string, double> gelman_rubin(const CalibrationPosterior& posterior);

/// One row per draw: chain, iteration, then a/b/c per group and the natural hyperparameters.
void write_draws_csv(std::ostream& out, const CalibrationPosterior& posterior);
void write_draws_csv(const std::filesystem::path& path, const CalibrationPosterior& posterior);

}  // namespace fairbayes
