#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbayes/calibration.hpp"
#include "fairbayes/data.hpp"

namespace fairbayes {

/// How honest probabilities are drawn given the class.
///  Beta:  p ~ Beta(pi k + y, (1 - pi) k + 1 - y), i.e. p ~ Beta(pi k, (1 - pi) k)
///         and y ~ Bernoulli(p), so p is calibrated by construction.
///  Rates: the prediction is drawn with the group's TPR / FPR and the score is
///         uniform on the matching half of (0, 1).
enum class ScoreFamily { Beta, Rates };

/// How reported scores are derived from honest probabilities.
///  None: reported = honest.
///  Beta: reported = f^-1(honest; a, b, c) so that calibrate() with the group's
///        params recovers the honest probability.
///  PiecewiseLinear: reported = g^-1(honest) where g is the monotone
///        piecewise-linear curve through (0,0), the knots and (1,1).
enum class Distortion { None, Beta, PiecewiseLinear };

std::string_view to_string(ScoreFamily f) noexcept;
ScoreFamily parse_score_family(std::string_view text);
std::string_view to_string(Distortion d) noexcept;
Distortion parse_distortion(std::string_view text);

struct GroupSpec {
  std::string name;
  double proportion = 1.0;
  double positive_rate = 0.2;
  double concentration = 2.0;
  double tpr = 0.9;
  double fpr = 0.1;
  CalibrationParams calibration = CalibrationParams::identity();
  /// (reported score, true probability) points of the piecewise-linear map.
  std::vector<std::pair<double, double>> knots;
};

struct SyntheticSpec {
  std::vector<GroupSpec> groups;
  ScoreFamily family = ScoreFamily::Beta;
  Distortion distortion = Distortion::Beta;
  std::size_t population = 100000;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<std::string> group_names() const;
};

/// Fully labeled synthetic population.
Dataset generate(const SyntheticSpec& spec);

/// Solves calibrate(s, p) = target for s by bisection in log-odds.
double invert_calibration(double target, const CalibrationParams& params);

/// Reported score for an honest probability in group g (before clamping).
double reported_score(const SyntheticSpec& spec, std::size_t g, double honest);

/// The true calibration map f*_g(s) = P(y = 1 | s, g) of the generative model.
double true_calibration(const SyntheticSpec& spec, std::size_t g, double s);

/// Population-level rates of the thresholded model for group g.
struct ClassRates {
  double tpr = 0.0;
  double fpr = 0.0;
  double accuracy = 0.0;
};
ClassRates population_rates(const SyntheticSpec& spec, std::size_t g);

}  // namespace fairbayes
