#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fairbayes/data.hpp"

namespace fairbayes {

/// Beta calibration map parameters: f(s) = 1 / (1 + exp(-c - a log s + b log(1-s))).
struct CalibrationParams {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;

  static constexpr CalibrationParams identity() noexcept { return {1.0, 1.0, 0.0}; }
  friend bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

/// Shared hyperparameters: log a_g ~ N(mu_a, sigma_a), log b_g ~ N(mu_b, sigma_b),
/// c_g ~ N(mu_c, sigma_c).
struct HyperParams {
  double mu_a = 0.0;
  double mu_b = 0.0;
  double mu_c = 0.0;
  double sigma_a = 1.0;
  double sigma_b = 1.0;
  double sigma_c = 1.0;
};

enum class CalibrationFamily { Beta, LLO };

std::string_view to_string(CalibrationFamily f) noexcept;
CalibrationFamily parse_family(std::string_view text);

struct PriorConfig {
  /// Multiplier applied to every base scale (sensitivity analysis knob).
  double alpha = 1.0;
  /// Standard deviations of mu_a, mu_b, mu_c and half-normal scales of
  /// sigma_a, sigma_b, sigma_c, in that order.
  std::array<double, 6> base_scales{0.4, 0.4, 2.0, 0.15, 0.15, 0.75};
  CalibrationFamily family = CalibrationFamily::Beta;
  /// When false the hyperparameters are frozen at their prior means and the
  /// hyperprior is dropped, so groups are a priori independent.
  bool hierarchical = true;

  double mu_scale(std::size_t k) const { return alpha * base_scales.at(k); }
  double sigma_scale(std::size_t k) const { return alpha * base_scales.at(3 + k); }
  /// mu = 0, sigma = half-normal mean scale * sqrt(2/pi).
  HyperParams frozen_hyper() const;
  void validate() const;
};

inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Log-odds of the calibrated score given precomputed log s and log(1-s).
inline double calibrated_logit(double log_s, double log_1ms, double a, double b, double c) noexcept {
  return c + a * log_s - b * log_1ms;
}

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

double calibrate(double s, const CalibrationParams& p) noexcept;

/// Calibrated probability that the model's prediction at score s is correct.
double latent_accuracy(double s, const CalibrationParams& p) noexcept;

/// Linear-log-odds projection: ties b to a.
CalibrationParams llo_constrain(const CalibrationParams& p) noexcept;

/// Log joint density in the natural parameterization: Bernoulli likelihood of
/// the labeled examples, the group-level priors and (when hierarchical) the
/// hyperpriors. `params` is indexed by GroupId::index and must cover every
/// declared group. Under the LLO family b is tied to a and the b-terms drop.
double log_joint(const Dataset& labeled, std::span<const CalibrationParams> params,
                 const HyperParams& hyper, const PriorConfig& prior);

/// Per-group coordinates the sampler moves in.
struct GroupCoords {
  double log_a = 0.0;
  double log_b = 0.0;
  double c = 0.0;

  double operator[](std::size_t k) const noexcept { return k == 0 ? log_a : k == 1 ? log_b : c; }
  double& operator[](std::size_t k) noexcept { return k == 0 ? log_a : k == 1 ? log_b : c; }
  CalibrationParams natural() const noexcept { return {std::exp(log_a), std::exp(log_b), c}; }
};

/// Hyperparameters with sigma on the log scale; component k in {a, b, c}.
struct HyperCoords {
  std::array<double, 3> mu{0.0, 0.0, 0.0};
  std::array<double, 3> log_sigma{0.0, 0.0, 0.0};

  HyperParams natural() const noexcept;
  static HyperCoords from(const HyperParams& h);
};

struct ChainState {
  std::vector<GroupCoords> groups;
  HyperCoords hyper;
};

/// Posterior target over (log a_g, log b_g, c_g, mu_k, log sigma_k), including
/// the log-sigma Jacobian. Holds per-group precomputed log scores.
class CalibrationTarget {
 public:
  CalibrationTarget(const Dataset& labeled, PriorConfig prior, bool include_likelihood = true);

  const PriorConfig& prior() const noexcept { return prior_; }
  std::size_t group_count() const noexcept { return groups_.size(); }
  std::size_t labeled_in_group(std::size_t g) const noexcept { return groups_[g].log_s.size(); }
  bool uses_b() const noexcept { return prior_.family == CalibrationFamily::Beta; }
  bool hierarchical() const noexcept { return prior_.hierarchical; }
  /// Indices of the calibration components that carry free parameters.
  const std::vector<std::size_t>& components() const noexcept { return components_; }

  double group_log_likelihood(std::size_t g, const GroupCoords& x) const;
  /// Normal log density of one group coordinate around its hyper mean.
  static double component_log_prior(double value, double mu, double log_sigma) noexcept;
  double group_log_prior(const GroupCoords& x, const HyperCoords& h) const;
  /// Hyperprior of component k in (mu, log sigma) coordinates, Jacobian included.
  double hyper_log_prior(std::size_t k, double mu, double log_sigma) const;

  double log_density(const ChainState& state) const;
  std::vector<double> gradient(const ChainState& state) const;

  /// Effective hyperparameters: the state's own when hierarchical, frozen otherwise.
  HyperCoords effective_hyper(const HyperCoords& h) const;

  std::size_t dimension() const;
  std::vector<double> pack(const ChainState& state) const;
  ChainState unpack(std::span<const double> x) const;
  std::vector<std::string> coordinate_names(const std::vector<std::string>& group_names) const;

  /// Ties log_b to log_a under the LLO family.
  void normalize(GroupCoords& x) const noexcept;

 private:
  struct GroupData {
    std::vector<double> log_s;
    std::vector<double> log_1ms;
    std::vector<unsigned char> y;
  };
  PriorConfig prior_;
  HyperCoords frozen_;
  std::vector<GroupData> groups_;
  std::vector<std::size_t> components_;
};

}  // namespace fairbayes
