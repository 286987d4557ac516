#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairbayes/beta_binomial.hpp"
#include "fairbayes/calibration.hpp"
#include "fairbayes/data.hpp"
#include "fairbayes/mcmc.hpp"

namespace fairbayes {

/// Draws whose conditional-metric denominator falls below this are skipped.
inline constexpr double kMinDenominator = 1e-9;
/// Fraction of skipped draws above which an estimate is flagged.
inline constexpr double kSkipFlagFraction = 0.10;

/// Combines labeled outcomes with calibrated unlabeled scores, one posterior
/// draw at a time. Construction caches per-group labeled counts and the log
/// scores of unlabeled examples so each draw costs one exp per example.
class BcEvaluator {
 public:
  BcEvaluator(const Dataset& labeled, const Dataset& unlabeled);

  std::size_t group_count() const noexcept { return groups_.size(); }

  /// Posterior-draw value of a group metric; nullopt when a TPR/FPR
  /// denominator is degenerate for this draw.
  std::optional<double> theta(MetricKind metric, GroupId g, const CalibrationParams& params) const;

  /// All three metrics from a single pass over the group's unlabeled scores.
  struct GroupMetrics {
    double accuracy = 0.0;
    std::optional<double> tpr;
    std::optional<double> fpr;
  };
  GroupMetrics all_metrics(GroupId g, const CalibrationParams& params) const;

 private:
  struct Group {
    std::size_t n_labeled = 0;
    std::size_t correct = 0;
    std::size_t positives = 0;       // labeled y = 1
    std::size_t true_positives = 0;  // labeled yhat = 1, y = 1
    std::size_t negatives = 0;
    std::size_t false_positives = 0;
    // Unlabeled log scores, split by predicted class.
    std::vector<double> pos_log_s, pos_log_1ms;
    std::vector<double> neg_log_s, neg_log_1ms;
  };
  struct Sums {
    double p_pred1 = 0.0;  // sum of calibrated P(y=1) over unlabeled with yhat = 1
    double p_pred0 = 0.0;
  };
  Sums sums(const Group& gr, const CalibrationParams& p) const;
  const Group& group(GroupId g) const;

  std::vector<Group> groups_;
};

double bc_theta_accuracy(const Dataset& labeled, const Dataset& unlabeled, const PosteriorDraw& draw,
                         GroupId group);

/// TPR or FPR for one draw, treating calibrate(s) as the draw's P(y=1) for each
/// unlabeled example. Throws DegenerateDenominator when the expected count of
/// the conditioning class is below kMinDenominator.
double bc_theta_conditional(const Dataset& labeled, const Dataset& unlabeled, const PosteriorDraw& draw,
                            GroupId group, MetricKind metric);

PosteriorSamples bc_delta_samples(const Dataset& labeled, const Dataset& unlabeled,
                                  const CalibrationPosterior& posterior, MetricKind metric, GroupPair pair);

/// Per-metric samples from one pass over the posterior; indexed by MetricKind.
std::vector<PosteriorSamples> bc_delta_samples_all(const BcEvaluator& evaluator,
                                                   const CalibrationPosterior& posterior, GroupPair pair);

}  // namespace fairbayes
