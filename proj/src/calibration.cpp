#include "fairbayes/calibration.hpp"

#include <numbers>

#include "fairbayes/error.hpp"

namespace fairbayes {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double normal_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -kHalfLog2Pi - std::log(sigma) - 0.5 * z * z;
}

double half_normal_log_pdf(double x, double scale) {
  if (!(x > 0.0)) return -INFINITY;
  return std::numbers::ln2 + normal_log_pdf(x, 0.0, scale);
}

constexpr const char* kComponentName[3] = {"a", "b", "c"};

}  // namespace

std::string_view to_string(CalibrationFamily f) noexcept {
  return f == CalibrationFamily::Beta ? "beta" : "llo";
}

CalibrationFamily parse_family(std::string_view text) {
  if (text == "beta") return CalibrationFamily::Beta;
  if (text == "llo") return CalibrationFamily::LLO;
  throw InvalidConfig("unknown calibration family '" + std::string(text) + "'");
}

HyperParams PriorConfig::frozen_hyper() const {
  const double half_normal_mean = std::sqrt(2.0 / std::numbers::pi);
  return {0.0, 0.0, 0.0, sigma_scale(0) * half_normal_mean, sigma_scale(1) * half_normal_mean,
          sigma_scale(2) * half_normal_mean};
}

void PriorConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidPrior("prior alpha must be positive");
  for (double s : base_scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidPrior("prior base scales must be positive");
}

double calibrate(double s, const CalibrationParams& p) noexcept {
  return sigmoid(calibrated_logit(std::log(s), std::log1p(-s), p.a, p.b, p.c));
}

double latent_accuracy(double s, const CalibrationParams& p) noexcept {
  const double f = calibrate(s, p);
  return predicts_positive(s) ? f : 1.0 - f;
}

CalibrationParams llo_constrain(const CalibrationParams& p) noexcept { return {p.a, p.a, p.c}; }

HyperParams HyperCoords::natural() const noexcept {
  return {mu[0], mu[1], mu[2], std::exp(log_sigma[0]), std::exp(log_sigma[1]), std::exp(log_sigma[2])};
}

HyperCoords HyperCoords::from(const HyperParams& h) {
  HyperCoords out;
  out.mu = {h.mu_a, h.mu_b, h.mu_c};
  out.log_sigma = {std::log(h.sigma_a), std::log(h.sigma_b), std::log(h.sigma_c)};
  return out;
}

double log_joint(const Dataset& labeled, std::span<const CalibrationParams> params,
                 const HyperParams& hyper_in, const PriorConfig& prior) {
  prior.validate();
  if (params.size() != labeled.group_count())
    throw InvalidConfig("need one CalibrationParams per declared group");
  const bool llo = prior.family == CalibrationFamily::LLO;
  const HyperParams hyper = prior.hierarchical ? hyper_in : prior.frozen_hyper();
  if (!(hyper.sigma_a > 0.0) || !(hyper.sigma_c > 0.0) || (!llo && !(hyper.sigma_b > 0.0)))
    return -INFINITY;

  double total = 0.0;
  for (const auto& ex : labeled.examples()) {
    if (!ex.label) continue;
    auto p = params[ex.group.index];
    if (llo) p = llo_constrain(p);
    const double eta = calibrated_logit(std::log(ex.score), std::log1p(-ex.score), p.a, p.b, p.c);
    total += *ex.label ? -softplus(-eta) : -softplus(eta);
  }

  for (auto p : params) {
    if (!(p.a > 0.0) || (!llo && !(p.b > 0.0))) return -INFINITY;
    total += normal_log_pdf(std::log(p.a), hyper.mu_a, hyper.sigma_a);
    if (!llo) total += normal_log_pdf(std::log(p.b), hyper.mu_b, hyper.sigma_b);
    total += normal_log_pdf(p.c, hyper.mu_c, hyper.sigma_c);
  }

  if (prior.hierarchical) {
    total += normal_log_pdf(hyper.mu_a, 0.0, prior.mu_scale(0));
    total += half_normal_log_pdf(hyper.sigma_a, prior.sigma_scale(0));
    if (!llo) {
      total += normal_log_pdf(hyper.mu_b, 0.0, prior.mu_scale(1));
      total += half_normal_log_pdf(hyper.sigma_b, prior.sigma_scale(1));
    }
    total += normal_log_pdf(hyper.mu_c, 0.0, prior.mu_scale(2));
    total += half_normal_log_pdf(hyper.sigma_c, prior.sigma_scale(2));
  }
  return total;
}

CalibrationTarget::CalibrationTarget(const Dataset& labeled, PriorConfig prior,
                                     bool include_likelihood)
    : prior_(prior), frozen_(HyperCoords::from(prior.frozen_hyper())), groups_(labeled.group_count()) {
  prior_.validate();
  components_ = uses_b() ? std::vector<std::size_t>{0, 1, 2} : std::vector<std::size_t>{0, 2};
  if (!include_likelihood) return;
  for (const auto& ex : labeled.examples()) {
    if (!ex.label) continue;
    auto& gd = groups_[ex.group.index];
    gd.log_s.push_back(std::log(ex.score));
    gd.log_1ms.push_back(std::log1p(-ex.score));
    gd.y.push_back(*ex.label);
  }
}

void CalibrationTarget::normalize(GroupCoords& x) const noexcept {
  if (!uses_b()) x.log_b = x.log_a;
}

HyperCoords CalibrationTarget::effective_hyper(const HyperCoords& h) const {
  return hierarchical() ? h : frozen_;
}

double CalibrationTarget::group_log_likelihood(std::size_t g, const GroupCoords& x) const {
  const auto& gd = groups_[g];
  const double a = std::exp(x.log_a);
  const double b = uses_b() ? std::exp(x.log_b) : a;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(x.c)) return -INFINITY;
  double total = 0.0;
  const std::size_t n = gd.y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = calibrated_logit(gd.log_s[i], gd.log_1ms[i], a, b, x.c);
    total -= softplus(gd.y[i] ? -eta : eta);
  }
  // Overflowing products of a huge a or b with log scores leave no mass.
  return std::isnan(total) ? -INFINITY : total;
}

double CalibrationTarget::component_log_prior(double value, double mu, double log_sigma) noexcept {
  const double z = (value - mu) * std::exp(-log_sigma);
  return -kHalfLog2Pi - log_sigma - 0.5 * z * z;
}

double CalibrationTarget::group_log_prior(const GroupCoords& x, const HyperCoords& h_in) const {
  const HyperCoords h = effective_hyper(h_in);
  double total = 0.0;
  for (std::size_t k : components_) total += component_log_prior(x[k], h.mu[k], h.log_sigma[k]);
  return total;
}

double CalibrationTarget::hyper_log_prior(std::size_t k, double mu, double log_sigma) const {
  const double sigma = std::exp(log_sigma);
  return normal_log_pdf(mu, 0.0, prior_.mu_scale(k)) + half_normal_log_pdf(sigma, prior_.sigma_scale(k)) +
         log_sigma;
}

double CalibrationTarget::log_density(const ChainState& state) const {
  double total = 0.0;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    GroupCoords x = state.groups[g];
    normalize(x);
    total += group_log_likelihood(g, x) + group_log_prior(x, state.hyper);
  }
  if (hierarchical())
    for (std::size_t k : components_) total += hyper_log_prior(k, state.hyper.mu[k], state.hyper.log_sigma[k]);
  return total;
}

std::size_t CalibrationTarget::dimension() const {
  const std::size_t per_group = components_.size();
  return per_group * groups_.size() + (hierarchical() ? 2 * per_group : 0);
}

std::vector<double> CalibrationTarget::pack(const ChainState& state) const {
  std::vector<double> out;
  out.reserve(dimension());
  for (const auto& x : state.groups)
    for (std::size_t k : components_) out.push_back(x[k]);
  if (hierarchical())
    for (std::size_t k : components_) {
      out.push_back(state.hyper.mu[k]);
      out.push_back(state.hyper.log_sigma[k]);
    }
  return out;
}

ChainState CalibrationTarget::unpack(std::span<const double> v) const {
  if (v.size() != dimension()) throw Error("coordinate vector has the wrong dimension");
  ChainState s;
  s.groups.resize(groups_.size());
  s.hyper = frozen_;
  std::size_t i = 0;
  for (auto& x : s.groups) {
    for (std::size_t k : components_) x[k] = v[i++];
    normalize(x);
  }
  if (hierarchical())
    for (std::size_t k : components_) {
      s.hyper.mu[k] = v[i++];
      s.hyper.log_sigma[k] = v[i++];
    }
  return s;
}

std::vector<std::string> CalibrationTarget::coordinate_names(
    const std::vector<std::string>& group_names) const {
  static constexpr const char* kCoordName[3] = {"log_a", "log_b", "c"};
  std::vector<std::string> out;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const std::string& gname = g < group_names.size() ? group_names[g] : std::to_string(g);
    for (std::size_t k : components_) out.push_back(std::string(kCoordName[k]) + "[" + gname + "]");
  }
  if (hierarchical())
    for (std::size_t k : components_) {
      out.push_back(std::string("mu_") + kComponentName[k]);
      out.push_back(std::string("log_sigma_") + kComponentName[k]);
    }
  return out;
}

std::vector<double> CalibrationTarget::gradient(const ChainState& state) const {
  const std::size_t per_group = components_.size();
  const HyperCoords h = effective_hyper(state.hyper);
  std::vector<double> grad(dimension(), 0.0);
  // Sums over groups of the standardized residuals feed the hyper gradients.
  std::array<double, 3> sum_r{0, 0, 0}, sum_r2{0, 0, 0};

  for (std::size_t g = 0; g < groups_.size(); ++g) {
    GroupCoords x = state.groups[g];
    normalize(x);
    const auto& gd = groups_[g];
    const double a = std::exp(x.log_a);
    const double b = std::exp(x.log_b);
    double d_la = 0.0, d_lb = 0.0, d_c = 0.0;
    for (std::size_t i = 0; i < gd.y.size(); ++i) {
      const double eta = calibrated_logit(gd.log_s[i], gd.log_1ms[i], a, b, x.c);
      const double resid = static_cast<double>(gd.y[i]) - sigmoid(eta);
      d_la += resid * a * gd.log_s[i];
      d_lb -= resid * b * gd.log_1ms[i];
      d_c += resid;
    }
    if (!uses_b()) d_la += d_lb;  // b = a under LLO

    double* out = grad.data() + g * per_group;
    std::size_t slot = 0;
    for (std::size_t k : components_) {
      const double inv_var = std::exp(-2.0 * h.log_sigma[k]);
      const double r = x[k] - h.mu[k];
      const double lik = k == 0 ? d_la : k == 1 ? d_lb : d_c;
      out[slot++] = lik - r * inv_var;
      sum_r[k] += r * inv_var;
      sum_r2[k] += r * r * inv_var;
    }
  }

  if (hierarchical()) {
    const double groups = static_cast<double>(groups_.size());
    std::size_t i = per_group * groups_.size();
    for (std::size_t k : components_) {
      const double mu_s = prior_.mu_scale(k);
      const double sig_s = prior_.sigma_scale(k);
      const double sigma = std::exp(h.log_sigma[k]);
      grad[i++] = sum_r[k] - h.mu[k] / (mu_s * mu_s);
      grad[i++] = -groups + sum_r2[k] - sigma * sigma / (sig_s * sig_s) + 1.0;
    }
  }
  return grad;
}

}  // namespace fairbayes
