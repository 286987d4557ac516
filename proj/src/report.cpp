#include "fairbayes/report.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "fairbayes/bc_estimator.hpp"
#include "fairbayes/diagnostics.hpp"
#include "fairbayes/error.hpp"
#include "fairbayes/freq_metrics.hpp"

namespace fairbayes {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Freq: return "freq";
    case Method::BB: return "bb";
    case Method::BC: return "bc";
    case Method::NHBC: return "nhbc";
    case Method::LLO: return "llo";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::Freq, Method::BB, Method::BC, Method::NHBC, Method::LLO})
    if (text == to_string(m)) return m;
  throw InvalidConfig("unknown method '" + std::string(text) + "'");
}

bool is_calibration_method(Method m) noexcept {
  return m == Method::BC || m == Method::NHBC || m == Method::LLO;
}

PriorConfig prior_for(Method m, PriorConfig base) {
  if (m == Method::NHBC) base.hierarchical = false;
  if (m == Method::LLO) base.family = CalibrationFamily::LLO;
  return base;
}

PosteriorSummary summarize(std::span<const double> delta, double epsilon) {
  if (delta.empty()) throw Error("cannot summarize an empty sample");
  std::vector<double> sorted(delta.begin(), delta.end());
  std::sort(sorted.begin(), sorted.end());
  PosteriorSummary s;
  s.draws = delta.size();
  double sum = 0.0;
  std::size_t pos = 0, fair = 0;
  for (double d : delta) {
    sum += d;
    pos += d > 0.0;
    fair += std::abs(d) < epsilon;
  }
  const double n = static_cast<double>(delta.size());
  s.mean = sum / n;
  s.ci_low = quantile_sorted(sorted, 0.025);
  s.ci_high = quantile_sorted(sorted, 0.975);
  s.p_positive = static_cast<double>(pos) / n;
  s.p_practically_fair = static_cast<double>(fair) / n;
  return s;
}

namespace {

void fill(AssessmentReport& r, const PosteriorSamples& samples, double epsilon) {
  const auto s = summarize(samples.delta, epsilon);
  r.point_estimate = s.mean;
  r.ci_95 = std::pair{s.ci_low, s.ci_high};
  r.p_delta_positive = s.p_positive;
  r.p_practically_fair = s.p_practically_fair;
  r.T = s.draws;
  r.skipped_draws = samples.skipped;
  r.flagged = samples.flagged;
}

}  // namespace

AssessmentReport assess(const Dataset& data, const AssessOptions& options, CalibrationPosterior* posterior_out) {
  if (data.empty()) throw EmptyDataset("dataset has no rows");
  const Dataset labeled = data.labeled();
  const Dataset unlabeled = data.unlabeled();

  AssessmentReport r;
  r.metric = options.metric;
  r.unprivileged = data.group_name(options.pair.unprivileged);
  r.privileged = data.group_name(options.pair.privileged);
  r.method = options.method;
  r.epsilon = options.epsilon;
  r.n_L = labeled.size();
  r.n_U = unlabeled.size();

  switch (options.method) {
    case Method::Freq: {
      r.point_estimate = freq_metric(labeled, options.metric, options.pair).delta;
      break;
    }
    case Method::BB: {
      const auto samples =
          bb_delta_samples(labeled, options.metric, options.pair, options.bb_draws, options.seed, options.bb_prior);
      fill(r, samples, options.epsilon);
      break;
    }
    case Method::BC:
    case Method::NHBC:
    case Method::LLO: {
      SamplerConfig sampler = options.sampler;
      sampler.seed = options.seed;
      auto posterior = sample_posterior(labeled, prior_for(options.method, options.prior), sampler);
      fill(r, bc_delta_samples(labeled, unlabeled, posterior, options.metric, options.pair), options.epsilon);
      if (posterior_out) *posterior_out = std::move(posterior);
      break;
    }
  }
  return r;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string to_json(const AssessmentReport& r) {
  nlohmann::ordered_json j;
  j["metric"] = std::string(to_string(r.metric));
  j["pair"] = {{"unprivileged", r.unprivileged}, {"privileged", r.privileged}};
  j["method"] = std::string(to_string(r.method));
  j["point_estimate"] = optional_json(r.point_estimate);
  j["ci_95"] = r.ci_95 ? nlohmann::ordered_json::array({r.ci_95->first, r.ci_95->second})
                       : nlohmann::ordered_json(nullptr);
  j["p_delta_positive"] = optional_json(r.p_delta_positive);
  j["p_practically_fair"] = optional_json(r.p_practically_fair);
  j["epsilon"] = r.epsilon;
  j["T"] = r.T;
  j["n_L"] = r.n_L;
  j["n_U"] = r.n_U;
  j["skipped_draws"] = r.skipped_draws;
  j["flagged"] = r.flagged;
  return j.dump(2) + "\n";
}

std::string csv_header() {
  return "metric,unprivileged,privileged,method,point_estimate,ci_low,ci_high,p_delta_positive,"
         "p_practically_fair,epsilon,T,n_L,n_U,skipped_draws,flagged";
}

std::string to_csv_row(const AssessmentReport& r) {
  std::string out;
  out += std::string(to_string(r.metric)) + ',' + r.unprivileged + ',' + r.privileged + ',' +
         std::string(to_string(r.method)) + ',' + optional_csv(r.point_estimate) + ',';
  out += r.ci_95 ? format_double(r.ci_95->first) + ',' + format_double(r.ci_95->second) : std::string(",");
  out += ',' + optional_csv(r.p_delta_positive) + ',' + optional_csv(r.p_practically_fair) + ',' +
         format_double(r.epsilon) + ',' + std::to_string(r.T) + ',' + std::to_string(r.n_L) + ',' +
         std::to_string(r.n_U) + ',' + std::to_string(r.skipped_draws) + ',' + (r.flagged ? "1" : "0");
  return out;
}

}  // namespace fairbayes
