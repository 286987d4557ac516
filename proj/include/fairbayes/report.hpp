#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "fairbayes/beta_binomial.hpp"
#include "fairbayes/calibration.hpp"
#include "fairbayes/data.hpp"
#include "fairbayes/mcmc.hpp"

namespace fairbayes {

/// Estimators. NHBC and LLO are BC with the hierarchy frozen or the map
/// restricted to a = b.
enum class Method { Freq, BB, BC, NHBC, LLO };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view text);
bool is_calibration_method(Method m) noexcept;
/// Prior actually used by a calibration method, derived from the base prior.
PriorConfig prior_for(Method m, PriorConfig base);

inline constexpr double kDefaultEpsilon = 0.02;

struct PosteriorSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_positive = 0.0;
  double p_practically_fair = 0.0;
  std::size_t draws = 0;
};

/// Mean, equal-tailed 95% interval, P(delta > 0) and P(|delta| < epsilon).
PosteriorSummary summarize(std::span<const double> delta, double epsilon = kDefaultEpsilon);

struct AssessmentReport {
  MetricKind metric = MetricKind::Accuracy;
  std::string unprivileged;
  std::string privileged;
  Method method = Method::BC;
  std::optional<double> point_estimate;
  std::optional<std::pair<double, double>> ci_95;
  std::optional<double> p_delta_positive;
  std::optional<double> p_practically_fair;
  double epsilon = kDefaultEpsilon;
  std::size_t T = 0;
  std::size_t n_L = 0;
  std::size_t n_U = 0;
  std::size_t skipped_draws = 0;
  bool flagged = false;
};

struct AssessOptions {
  MetricKind metric = MetricKind::Accuracy;
  GroupPair pair;
  Method method = Method::BC;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  BetaPrior bb_prior;
  std::size_t bb_draws = 800;
  PriorConfig prior;
  SamplerConfig sampler;
};

/// Runs one estimator on a dataset whose labeled rows form the labeled set and
/// whose unlabeled rows form the unlabeled pool. The sampler seed is taken from
/// options.seed. When `posterior_out` is given, calibration methods store
/// their draws there.
AssessmentReport assess(const Dataset& data, const AssessOptions& options,
                        CalibrationPosterior* posterior_out = nullptr);

std::string to_json(const AssessmentReport& report);
std::string csv_header();
std::string to_csv_row(const AssessmentReport& report);

}  // namespace fairbayes
