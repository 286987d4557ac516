#include "fairbayes/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <json.hpp>

#include "fairbayes/bc_estimator.hpp"
#include "fairbayes/error.hpp"
#include "fairbayes/freq_metrics.hpp"
#include "fairbayes/parallel.hpp"
#include "fairbayes/random.hpp"

namespace fairbayes {

namespace {

constexpr std::uint64_t kBbStream = 0xbb;
constexpr std::uint64_t kBcStream = 0xbc;
constexpr std::uint64_t kRequiredNStream = 0x4e;

std::size_t metric_index(MetricKind m) { return static_cast<std::size_t>(m); }

RunEstimate from_samples(const PosteriorSamples& s) {
  RunEstimate r;
  if (s.delta.empty()) return r;
  const auto sum = summarize(s.delta);
  r.estimate = sum.mean;
  r.ci = std::pair{sum.ci_low, sum.ci_high};
  return r;
}

void finalize(MethodResult& m, double truth) {
  m.missing = 0;
  std::vector<double> errors;
  std::size_t covered = 0;
  for (const auto& r : m.runs) {
    if (!r.estimate) {
      ++m.missing;
      continue;
    }
    errors.push_back(std::abs(*r.estimate - truth));
    if (r.ci) covered += r.ci->first <= truth && truth <= r.ci->second;
  }
  if (m.missing == 0 && !errors.empty()) {
    const double n = static_cast<double>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    const double mean = sum / n;
    double ss = 0.0;
    for (double e : errors) ss += (e - mean) * (e - mean);
    m.mae = mean;
    m.mae_stderr = errors.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  if (m.method != Method::Freq && !m.runs.empty())
    m.coverage = static_cast<double>(covered) / static_cast<double>(m.runs.size());
}

}  // namespace

const MethodResult& ExperimentResult::method(Method m) const {
  for (const auto& r : methods)
    if (r.method == m) return r;
  throw Error("method '" + std::string(to_string(m)) + "' was not run");
}

double population_truth(const Dataset& population, MetricKind metric, GroupPair pair) {
  const auto est = freq_metric(population, metric, pair);
  if (!est.delta) throw InvalidSpec("population truth for " + std::string(to_string(metric)) + " is undefined");
  return *est.delta;
}

std::vector<ExperimentResult> run_experiment(const Dataset& population, const ExperimentSettings& settings) {
  if (settings.runs == 0) throw InvalidConfig("experiment needs at least one run");
  if (settings.metrics.empty() || settings.methods.empty()) throw InvalidConfig("experiment needs metrics and methods");
  settings.sampler.validate();
  settings.prior.validate();

  const std::size_t n_metrics = settings.metrics.size();
  const std::size_t n_methods = settings.methods.size();
  // [run][method][metric]
  std::vector<std::vector<std::vector<RunEstimate>>> slots(
      settings.runs, std::vector<std::vector<RunEstimate>>(n_methods, std::vector<RunEstimate>(n_metrics)));

  parallel_for(settings.runs, [&](std::size_t run) {
    const Split split = split_labeled(population, settings.n_labeled, derive_seed(settings.seed, {run}));
    std::optional<BcEvaluator> evaluator;
    for (std::size_t m = 0; m < n_methods; ++m) {
      const Method method = settings.methods[m];
      auto& out = slots[run][m];
      if (method == Method::Freq) {
        for (std::size_t k = 0; k < n_metrics; ++k)
          out[k].estimate = freq_metric(split.labeled, settings.metrics[k], settings.pair).delta;
      } else if (method == Method::BB) {
        for (std::size_t k = 0; k < n_metrics; ++k) {
          const auto seed = derive_seed(settings.seed, {run, kBbStream, metric_index(settings.metrics[k])});
          out[k] = from_samples(bb_delta_samples(split.labeled, settings.metrics[k], settings.pair, settings.bb_draws,
                                                 seed, settings.bb_prior));
        }
      } else {
        SamplerConfig sampler = settings.sampler;
        sampler.seed = derive_seed(settings.seed, {run, kBcStream});
        CalibrationPosterior posterior;
        try {
          posterior = sample_posterior(split.labeled, prior_for(method, settings.prior), sampler);
        } catch (const DivergedChain&) {
          continue;  // counted as missing estimates
        }
        if (!evaluator) evaluator.emplace(split.labeled, split.unlabeled);
        const auto all = bc_delta_samples_all(*evaluator, posterior, settings.pair);
        for (std::size_t k = 0; k < n_metrics; ++k) out[k] = from_samples(all[metric_index(settings.metrics[k])]);
      }
    }
  });

  std::vector<ExperimentResult> results;
  for (std::size_t k = 0; k < n_metrics; ++k) {
    ExperimentResult r;
    r.metric = settings.metrics[k];
    r.n_labeled = settings.n_labeled;
    r.runs = settings.runs;
    r.truth = population_truth(population, r.metric, settings.pair);
    for (std::size_t m = 0; m < n_methods; ++m) {
      MethodResult mr;
      mr.method = settings.methods[m];
      mr.label = std::string(to_string(mr.method));
      mr.runs.reserve(settings.runs);
      for (std::size_t run = 0; run < settings.runs; ++run) mr.runs.push_back(slots[run][m][k]);
      finalize(mr, r.truth);
      r.methods.push_back(std::move(mr));
    }
    results.push_back(std::move(r));
  }
  return results;
}

ExperimentResult mae_experiment(const Dataset& population, MetricKind metric, ExperimentSettings settings) {
  settings.metrics = {metric};
  return run_experiment(population, settings).front();
}

ExperimentResult coverage_experiment(const Dataset& population, MetricKind metric, ExperimentSettings settings) {
  settings.metrics = {metric};
  std::erase(settings.methods, Method::Freq);
  if (settings.methods.empty()) throw InvalidConfig("coverage needs a Bayesian method");
  return run_experiment(population, settings).front();
}

SensitivityResult sensitivity_sweep(const Dataset& population, MetricKind metric, const std::vector<double>& alphas,
                                    ExperimentSettings settings) {
  if (alphas.empty()) throw InvalidConfig("sensitivity sweep needs at least one alpha");
  settings.metrics = {metric};
  SensitivityResult out;
  out.metric = metric;
  out.n_labeled = settings.n_labeled;

  settings.methods = {Method::BB};
  const auto bb = run_experiment(population, settings).front();
  out.truth = bb.truth;
  out.bb = bb.methods.front();

  settings.methods = {Method::BC};
  for (double alpha : alphas) {
    ExperimentSettings s = settings;
    s.prior.alpha = alpha;
    auto r = run_experiment(population, s).front();
    SensitivityRow row;
    row.alpha = alpha;
    row.bc = std::move(r.methods.front());
    row.bc.label = "bc(alpha=" + format_double(alpha) + ")";
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<ExperimentResult> ablation_nhbc(const Dataset& population, ExperimentSettings settings) {
  settings.methods = {Method::BB, Method::NHBC, Method::BC};
  return run_experiment(population, settings);
}

namespace {

struct SimCounts {
  std::size_t successes = 0;
  std::size_t trials = 0;
};

}  // namespace

RequiredNResult required_n_experiment(const SyntheticSpec& spec, const RequiredNSettings& settings) {
  spec.validate();
  if (settings.sims == 0) throw InvalidConfig("required-n needs at least one simulation");
  if (!(settings.low <= settings.high)) throw InvalidConfig("interval bounds are reversed");
  const std::size_t hi = settings.pair.unprivileged.index;
  const std::size_t lo = settings.pair.privileged.index;
  if (hi >= spec.groups.size() || lo >= spec.groups.size() || hi == lo)
    throw InvalidConfig("group pair does not name two groups of the spec");

  std::vector<ClassRates> rates;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) rates.push_back(population_rates(spec, g));
  auto theta = [&](std::size_t g) {
    switch (settings.metric) {
      case MetricKind::Accuracy: return rates[g].accuracy;
      case MetricKind::TPR: return rates[g].tpr;
      case MetricKind::FPR: return rates[g].fpr;
    }
    return 0.0;
  };

  RequiredNResult out;
  out.truth = theta(hi) - theta(lo);
  for (std::size_t ni = 0; ni < settings.n_grid.size(); ++ni) {
    const std::size_t n = settings.n_grid[ni];
    RequiredNRow row;
    row.n_labeled = n;
    row.sims = settings.sims;
    for (std::size_t sim = 0; sim < settings.sims; ++sim) {
      Rng rng = make_rng(settings.seed, {kRequiredNStream, n, sim});
      std::vector<SimCounts> counts(spec.groups.size());
      std::size_t left = n;
      double mass = 1.0;
      for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        const auto& gs = spec.groups[g];
        std::size_t size = left;
        if (g + 1 < spec.groups.size()) {
          const double p = mass > 0.0 ? std::clamp(gs.proportion / mass, 0.0, 1.0) : 0.0;
          size = std::binomial_distribution<std::size_t>(left, p)(rng);
        }
        left -= size;
        mass -= gs.proportion;
        const std::size_t pos = std::binomial_distribution<std::size_t>(size, gs.positive_rate)(rng);
        const std::size_t neg = size - pos;
        const std::size_t tp = std::binomial_distribution<std::size_t>(pos, rates[g].tpr)(rng);
        const std::size_t fp = std::binomial_distribution<std::size_t>(neg, rates[g].fpr)(rng);
        switch (settings.metric) {
          case MetricKind::Accuracy: counts[g] = {tp + (neg - fp), size}; break;
          case MetricKind::TPR: counts[g] = {tp, pos}; break;
          case MetricKind::FPR: counts[g] = {fp, neg}; break;
        }
      }
      if (counts[hi].trials == 0 || counts[lo].trials == 0) {
        ++row.undefined;
        continue;
      }
      const double d = static_cast<double>(counts[hi].successes) / static_cast<double>(counts[hi].trials) -
                       static_cast<double>(counts[lo].successes) / static_cast<double>(counts[lo].trials);
      row.hits += settings.low <= d && d <= settings.high;
    }
    row.fraction = static_cast<double>(row.hits) / static_cast<double>(row.sims);
    if (!out.smallest && row.fraction >= settings.confidence) out.smallest = n;
    out.rows.push_back(row);
  }
  return out;
}

LemmaCheck lemma_bound_check(const SyntheticSpec& spec, const Dataset& population,
                             const ExperimentSettings& settings) {
  const Split split = split_labeled(population, settings.n_labeled, derive_seed(settings.seed, {0}));
  SamplerConfig sampler = settings.sampler;
  sampler.seed = derive_seed(settings.seed, {0, kBcStream});
  const auto posterior = sample_posterior(split.labeled, settings.prior, sampler);
  const auto samples =
      bc_delta_samples(split.labeled, split.unlabeled, posterior, MetricKind::Accuracy, settings.pair);

  LemmaCheck out;
  out.estimate = summarize(samples.delta).mean;
  out.truth = population_truth(population, MetricKind::Accuracy, settings.pair);

  const auto sizes = population.group_sizes();
  double variance = 0.0;
  auto l1 = [&](GroupId g) {
    double sum = 0.0;
    for (const auto& ex : population.examples()) {
      if (ex.group != g) continue;
      double fbar = 0.0;
      for (const auto& d : posterior.draws) fbar += calibrate(ex.score, d.groups[g.index]);
      fbar /= static_cast<double>(posterior.size());
      sum += std::abs(fbar - true_calibration(spec, g.index, ex.score));
    }
    return sum / static_cast<double>(sizes[g.index]);
  };
  out.l1_unprivileged = l1(settings.pair.unprivileged);
  out.l1_privileged = l1(settings.pair.privileged);
  for (GroupId g : {settings.pair.unprivileged, settings.pair.privileged}) {
    const double n = static_cast<double>(sizes[g.index]);
    for (const auto& ex : split.unlabeled.examples()) {
      if (ex.group != g) continue;
      const double f = true_calibration(spec, g.index, ex.score);
      variance += f * (1.0 - f) / (n * n);
    }
  }
  out.mc_stderr = std::sqrt(variance);
  out.bound = out.l1_unprivileged + out.l1_privileged + 4.0 * out.mc_stderr;
  out.holds = std::abs(out.estimate - out.truth) <= out.bound;
  return out;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json method_json(const MethodResult& m) {
  nlohmann::ordered_json j;
  j["method"] = m.label;
  j["mae"] = opt_json(m.mae);
  j["mae_stderr"] = m.mae_stderr;
  j["missing"] = m.missing;
  j["coverage"] = opt_json(m.coverage);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : m.runs) {
    nlohmann::ordered_json e;
    e["estimate"] = opt_json(r.estimate);
    e["ci_95"] = r.ci ? nlohmann::ordered_json::array({r.ci->first, r.ci->second}) : nlohmann::ordered_json(nullptr);
    runs.push_back(std::move(e));
  }
  j["runs"] = std::move(runs);
  return j;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "metric,n_labeled,runs,truth,method,mae,mae_stderr,coverage,missing\n";
  for (const auto& r : results)
    for (const auto& m : r.methods)
      out << to_string(r.metric) << ',' << r.n_labeled << ',' << r.runs << ',' << format_double(r.truth) << ','
          << m.label << ',' << opt(m.mae) << ',' << format_double(m.mae_stderr) << ',' << opt(m.coverage) << ','
          << m.missing << '\n';
}

std::string results_json(const std::vector<ExperimentResult>& results) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["metric"] = std::string(to_string(r.metric));
    j["n_labeled"] = r.n_labeled;
    j["runs"] = r.runs;
    j["truth"] = r.truth;
    auto methods = nlohmann::ordered_json::array();
    for (const auto& m : r.methods) methods.push_back(method_json(m));
    j["methods"] = std::move(methods);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_plot_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "metric,n_L,method,MAE,stderr\n";
  for (const auto& r : results)
    for (const auto& m : r.methods)
      if (m.mae)
        out << to_string(r.metric) << ',' << r.n_labeled << ',' << m.label << ',' << format_double(*m.mae) << ','
            << format_double(m.mae_stderr) << '\n';
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityResult>& results) {
  out << "metric,n_labeled,truth,alpha,method,mae,mae_stderr,coverage\n";
  for (const auto& r : results) {
    out << to_string(r.metric) << ',' << r.n_labeled << ',' << format_double(r.truth) << ",," << r.bb.label << ','
        << opt(r.bb.mae) << ',' << format_double(r.bb.mae_stderr) << ',' << opt(r.bb.coverage) << '\n';
    for (const auto& row : r.rows)
      out << to_string(r.metric) << ',' << r.n_labeled << ',' << format_double(r.truth) << ','
          << format_double(row.alpha) << ",bc," << opt(row.bc.mae) << ',' << format_double(row.bc.mae_stderr) << ','
          << opt(row.bc.coverage) << '\n';
  }
}

std::string sensitivity_json(const std::vector<SensitivityResult>& results) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["metric"] = std::string(to_string(r.metric));
    j["n_labeled"] = r.n_labeled;
    j["truth"] = r.truth;
    j["bb"] = method_json(r.bb);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
      nlohmann::ordered_json e;
      e["alpha"] = row.alpha;
      e["bc"] = method_json(row.bc);
      rows.push_back(std::move(e));
    }
    j["alphas"] = std::move(rows);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_required_n_csv(std::ostream& out, const RequiredNResult& result) {
  out << "n_labeled,sims,hits,undefined,fraction\n";
  for (const auto& r : result.rows)
    out << r.n_labeled << ',' << r.sims << ',' << r.hits << ',' << r.undefined << ',' << format_double(r.fraction)
        << '\n';
}

std::string required_n_json(const RequiredNResult& result, const RequiredNSettings& settings) {
  nlohmann::ordered_json j;
  j["metric"] = std::string(to_string(settings.metric));
  j["interval"] = {settings.low, settings.high};
  j["confidence"] = settings.confidence;
  j["sims"] = settings.sims;
  j["truth"] = result.truth;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"n_labeled", r.n_labeled}, {"hits", r.hits}, {"undefined", r.undefined}, {"fraction", r.fraction}});
  j["rows"] = std::move(rows);
  j["smallest_n"] = result.smallest ? nlohmann::ordered_json(*result.smallest) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace fairbayes
