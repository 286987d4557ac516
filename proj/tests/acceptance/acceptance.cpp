// Acceptance checks. Prints one PASS/FAIL line per criterion, preceded by
// indented detail lines, and exits non-zero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fairbayes/bc_estimator.hpp"
#include "fairbayes/beta_binomial.hpp"
#include "fairbayes/calibration.hpp"
#include "fairbayes/config.hpp"
#include "fairbayes/diagnostics.hpp"
#include "fairbayes/experiments.hpp"
#include "fairbayes/freq_metrics.hpp"
#include "fairbayes/mcmc.hpp"
#include "fairbayes/report.hpp"
#include "fairbayes/simulate.hpp"

#ifndef FAIRBAYES_CONFIG_DIR
#define FAIRBAYES_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace fairbayes;

namespace {

struct Context {
  fs::path cli;
  fs::path workdir;
  fs::path configs;
};

struct Outcome {
  bool pass = true;
  std::string summary;
};

void detail(const std::string& line) { std::cout << "    " << line << '\n' << std::flush; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Population {
  SyntheticSpec spec;
  Dataset data;
  GroupPair pair;
};

Population load_population(const Context& ctx, const std::string& name) {
  const auto cfg = KeyValueConfig::load(ctx.configs / name);
  Population p;
  p.spec = spec_from_config(cfg);
  p.data = generate(p.spec);
  const auto parts = split_list(cfg.get_string("experiment.pair", ""));
  p.pair = parts.size() == 2 ? p.data.pair(parts[0], parts[1]) : GroupPair{GroupId{1}, GroupId{0}};
  return p;
}

Dataset random_two_group(Rng& rng, std::size_t n) {
  std::vector<ScoredExample> rows;
  for (std::size_t i = 0; i < n; ++i) {
    ScoredExample e;
    e.score = clamp_score(uniform01(rng));
    e.group = GroupId{static_cast<std::uint32_t>(i < 2 ? i : (uniform01(rng) < 0.5))};
    e.label = static_cast<std::uint8_t>(uniform01(rng) < e.score);
    rows.push_back(e);
  }
  return Dataset(std::move(rows), {"g0", "g1"});
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------

Outcome conjugacy(const Context&) {
  Outcome out;
  Rng rng = make_rng(101);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = random_two_group(rng, 1 + static_cast<std::size_t>(uniform01(rng) * 40));
    const BetaPrior prior{0.5 + 3 * uniform01(rng), 0.5 + 3 * uniform01(rng)};
    for (auto m : {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR})
      for (std::uint32_t g = 0; g < 2; ++g) {
        std::size_t s = 0, f = 0;
        for (const auto& e : d.examples()) {
          if (e.group.index != g) continue;
          const bool y = *e.label == 1;
          if (m == MetricKind::Accuracy) (e.correct() ? s : f) += 1;
          if (m == MetricKind::TPR && y) (e.predicted() ? s : f) += 1;
          if (m == MetricKind::FPR && !y) (e.predicted() ? s : f) += 1;
        }
        const auto post = bb_posterior(d, m, GroupId{g}, prior);
        mismatches += post.alpha != prior.alpha + static_cast<double>(s) || post.beta != prior.beta + static_cast<double>(f);
      }
  }
  detail(fmt("posterior parameters vs hand counts: %zu mismatches over 1200 cases", mismatches));
  out.pass = mismatches == 0;

  struct Case {
    double a1, b1, a0, b0;
  };
  double worst = 0.0;
  for (const auto& c : {Case{4, 2, 2, 4}, Case{10, 3, 7, 6}, Case{1, 1, 2, 1}}) {
    // labeled data giving exactly these posteriors under the uniform prior
    std::vector<ScoredExample> rows;
    auto add = [&](std::uint32_t g, double succ, double fail) {
      for (int i = 0; i < static_cast<int>(succ) - 1; ++i) rows.push_back({0.9, GroupId{g}, std::uint8_t{1}});
      for (int i = 0; i < static_cast<int>(fail) - 1; ++i) rows.push_back({0.9, GroupId{g}, std::uint8_t{0}});
    };
    add(1, c.a1, c.b1);
    add(0, c.a0, c.b0);
    const Dataset d(rows, {"g0", "g1"});
    const auto s = bb_delta_samples(d, MetricKind::Accuracy, {GroupId{1}, GroupId{0}}, 1000000, 7);
    const double mc = summarize(s.delta).p_positive;

    const boost::math::beta_distribution<double> x1(c.a1, c.b1), x0(c.a0, c.b0);
    const int n = 200000;
    double grid = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) / n;
      grid += boost::math::pdf(x1, t) * boost::math::cdf(x0, t);
    }
    grid /= n;
    worst = std::max(worst, std::abs(mc - grid));
    detail(fmt("Beta(%g,%g) vs Beta(%g,%g): P(delta>0) sampled %.5f, grid %.5f", c.a1, c.b1, c.a0, c.b0, mc, grid));
  }
  out.pass = out.pass && worst <= 0.005;
  out.summary = fmt("worst |sampled - grid| = %.5f (tolerance 0.005)", worst);
  return out;
}

Outcome calibration_identity(const Context&) {
  double worst_identity = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double s = i / 10001.0;
    worst_identity = std::max(worst_identity, std::abs(calibrate(s, CalibrationParams::identity()) - s));
  }
  detail(fmt("identity map: max |f(s) - s| = %.3g over 10^4 grid points", worst_identity));

  Rng rng = make_rng(202);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    PriorConfig prior;
    prior.alpha = 0.5 + 1.5 * uniform01(rng);
    prior.hierarchical = rep % 4 != 3;
    if (rep % 5 == 2) prior.family = CalibrationFamily::LLO;
    const auto d = random_two_group(rng, 20 + static_cast<std::size_t>(uniform01(rng) * 60));
    const CalibrationTarget target(d, prior);
    ChainState st;
    st.groups.resize(2);
    for (auto& x : st.groups) {
      x.log_a = 0.5 * standard_normal(rng);
      x.log_b = 0.5 * standard_normal(rng);
      x.c = standard_normal(rng);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      st.hyper.mu[k] = 0.3 * standard_normal(rng);
      st.hyper.log_sigma[k] = -1.0 + 0.5 * standard_normal(rng);
    }
    const auto x = target.pack(st);
    const auto grad = target.gradient(target.unpack(x));
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto up = x, down = x;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (target.log_density(target.unpack(up)) - target.log_density(target.unpack(down))) / 2e-5;
      worst_rel = std::max(worst_rel, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  detail(fmt("gradient vs central differences: worst relative error %.3g over 20 configurations", worst_rel));
  Outcome out;
  out.pass = worst_identity <= 1e-12 && worst_rel <= 1e-4;
  out.summary = fmt("identity %.2g (tol 1e-12), gradient %.2g (tol 1e-4)", worst_identity, worst_rel);
  return out;
}

Outcome prior_recovery(const Context&) {
  const Dataset empty({}, {"g"});
  const PriorConfig prior;
  std::vector<std::vector<double>> pooled;
  std::vector<double> ess;
  std::vector<std::string> names;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    SamplerConfig cfg;
    cfg.prior_only = true;
    cfg.seed = derive_seed(303, {rep});
    const auto post = sample_posterior(empty, prior, cfg);
    if (names.empty()) {
      names = post.coordinate_names;
      pooled.resize(names.size());
      ess.assign(names.size(), 0.0);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto tr = post.traces(i);
      ess[i] += effective_sample_size(tr);
      for (const auto& c : tr) pooled[i].insert(pooled[i].end(), c.begin(), c.end());
    }
  }
  // coordinates: log_a, log_b, c, then (mu, log sigma) per component
  const int comp[9] = {0, 1, 2, 0, 0, 1, 1, 2, 2};
  const int kind[9] = {0, 0, 0, 1, 2, 1, 2, 1, 2};
  Outcome out;
  double worst = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double s = prior.mu_scale(static_cast<std::size_t>(comp[i]));
    const double t = prior.sigma_scale(static_cast<std::size_t>(comp[i]));
    std::function<double(double)> cdf;
    if (kind[i] == 1) {
      cdf = [s](double x) { return phi_cdf(x / s); };
    } else if (kind[i] == 2) {
      cdf = [t](double x) { return 2.0 * phi_cdf(std::exp(x) / t) - 1.0; };
    } else {
      // group coordinate: N(mu, sigma) mixed over mu ~ N(0, s) and sigma ~ half-normal(t)
      cdf = [s, t](double x) {
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double u) {
              return 2.0 * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI) * phi_cdf(x / std::sqrt(s * s + t * t * u * u));
            },
            0.0, 12.0, 5, 1e-12);
      };
    }
    const double ks = ks_statistic(pooled[i], cdf);
    const double crit = ks_critical_value(ess[i], 0.01);
    worst = std::max(worst, ks / crit);
    out.pass = out.pass && ks < crit;
    detail(fmt("%-14s KS %.4f  critical %.4f at ESS %.0f (draws %zu, iid critical %.4f)", names[i].c_str(), ks, crit,
               ess[i], pooled[i].size(), ks_critical_value(static_cast<double>(pooled[i].size()), 0.01)));
  }
  out.summary = fmt("worst KS / critical = %.2f over 9 parameters", worst);
  return out;
}

Outcome parameter_recovery(const Context&) {
  SyntheticSpec spec;
  spec.groups = {{"g", 1.0, 0.5, 2.0, 0.9, 0.1, {1.5, 0.8, 0.4}, {}}};
  spec.population = 5000;
  spec.seed = 404;
  const auto data = generate(spec);
  SamplerConfig cfg;
  cfg.seed = 405;
  const auto post = sample_posterior(data, PriorConfig{}, cfg);
  double a = 0, b = 0, c = 0;
  for (const auto& d : post.draws) {
    a += d.groups[0].a;
    b += d.groups[0].b;
    c += d.groups[0].c;
  }
  const double n = static_cast<double>(post.size());
  a /= n, b /= n, c /= n;
  double max_rhat = 0.0;
  for (const auto& [name, r] : post.diagnostics.rhat) max_rhat = std::max(max_rhat, r);
  detail(fmt("posterior means a=%.3f b=%.3f c=%.3f (truth 1.5, 0.8, 0.4); max R-hat %.3f", a, b, c, max_rhat));
  Outcome out;
  const double err = std::max({std::abs(a - 1.5), std::abs(b - 0.8), std::abs(c - 0.4)});
  out.pass = err <= 0.1 && max_rhat < 1.1;
  out.summary = fmt("max |mean - truth| = %.3f (tol 0.1), max R-hat %.3f (< 1.1)", err, max_rhat);
  return out;
}

Outcome labeled_only(const Context&) {
  Rng rng = make_rng(505);
  const Dataset no_unlabeled({}, {"g0", "g1"});
  std::size_t compared = 0, mismatches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = random_two_group(rng, 4 + static_cast<std::size_t>(uniform01(rng) * 30));
    SamplerConfig cfg;
    cfg.seed = derive_seed(506, {static_cast<std::uint64_t>(rep)});
    cfg.burn_in = 300;
    cfg.samples_per_chain = 50;
    const auto post = sample_posterior(d, PriorConfig{}, cfg);
    const BcEvaluator eval(d, no_unlabeled);
    for (auto m : {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR}) {
      const auto freq = freq_metric(d, m, {GroupId{1}, GroupId{0}});
      for (const auto& draw : post.draws)
        for (std::uint32_t g = 0; g < 2; ++g) {
          const auto v = eval.theta(m, GroupId{g}, draw.groups[g]);
          ++compared;
          mismatches += v != freq.per_group[g];
        }
    }
  }
  Outcome out;
  out.pass = mismatches == 0;
  out.summary = fmt("%zu of %zu per-draw group values differ from the frequentist value", mismatches, compared);
  return out;
}

Outcome required_n(const Context& ctx) {
  const auto cfg = KeyValueConfig::load(ctx.configs / "required_n.conf");
  const auto spec = spec_from_config(cfg);
  RequiredNSettings s;
  s.metric = MetricKind::TPR;
  s.pair = {GroupId{0}, GroupId{1}};
  s.sims = 1000;
  s.seed = cfg.get_u64("seed", 0);
  s.n_grid = {1000, 12000, 48000, 96000};
  const auto r = required_n_experiment(spec, s);
  double f48 = 0, f96 = 0;
  for (const auto& row : r.rows) {
    detail(fmt("n_L=%6zu  hit fraction %.3f", row.n_labeled, row.fraction));
    if (row.n_labeled == 48000) f48 = row.fraction;
    if (row.n_labeled == 96000) f96 = row.fraction;
  }
  Outcome out;
  out.pass = f96 >= 0.95 - 0.02 && f48 < 0.95 + 0.02;
  out.summary = fmt("truth %.3f; fraction %.3f at 96k (need >= 0.93), %.3f at 48k (need < 0.97)", r.truth, f96, f48);
  return out;
}

Outcome mae_dominance(const Context& ctx) {
  Outcome out;
  std::size_t strong = 0;
  const std::vector<std::string> specs{"adult_like.conf", "compas_like.conf", "bank_like.conf", "pwl_distorted.conf"};
  for (const auto& name : specs) {
    const auto pop = load_population(ctx, name);
    ExperimentSettings s;
    s.methods = {Method::BB, Method::BC};
    s.metrics = {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR};
    s.pair = pop.pair;
    s.runs = 100;
    s.seed = 707;
    double acc10_ratio = INFINITY;
    for (std::size_t n : {10, 40, 100, 200}) {
      s.n_labeled = n;
      const auto results = run_experiment(pop.data, s);
      for (const auto& r : results) {
        const bool checked = r.metric == MetricKind::Accuracy ? (n == 10 || n == 100) : (n == 40 || n == 200);
        const auto& bb = r.method(Method::BB);
        const auto& bc = r.method(Method::BC);
        const bool ok = bb.mae && bc.mae && *bc.mae < *bb.mae;
        if (checked) out.pass = out.pass && ok;
        if (r.metric == MetricKind::Accuracy && n == 10 && bb.mae && bc.mae) acc10_ratio = *bc.mae / *bb.mae;
        detail(fmt("%-18s %-8s n_L=%3zu  BB %.4f  BC %.4f%s%s", name.c_str(), std::string(to_string(r.metric)).c_str(),
                   n, bb.mae.value_or(NAN), bc.mae.value_or(NAN), bc.missing ? " (BC runs missing)" : "",
                   checked ? (ok ? "  ok" : "  VIOLATION") : ""));
      }
    }
    strong += acc10_ratio < 0.4;
    detail(fmt("%-18s BC/BB accuracy MAE at n_L=10: %.2f", name.c_str(), acc10_ratio));
  }
  const bool cells = out.pass;
  out.pass = cells && 2 * strong >= specs.size();
  out.summary = fmt("BC < BB in all required cells: %s; BC < 0.4 BB at n_L=10 on %zu of %zu specs (need %zu)",
                    cells ? "yes" : "no", strong, specs.size(), (specs.size() + 1) / 2);
  return out;
}

Outcome coverage(const Context& ctx) {
  SyntheticSpec bern;
  bern.groups = {{"g0", 0.5, 0.3, 2.0}, {"g1", 0.5, 0.4, 2.0}};
  bern.distortion = Distortion::None;
  bern.population = 20000;
  bern.seed = 808;
  const auto bpop = generate(bern);
  ExperimentSettings s;
  s.methods = {Method::BB};
  s.pair = {GroupId{1}, GroupId{0}};
  s.runs = 1000;
  s.n_labeled = 100;
  s.seed = 809;
  const auto bb = coverage_experiment(bpop, MetricKind::Accuracy, s);
  const double bb_cov = *bb.method(Method::BB).coverage;
  detail(fmt("BB, Bernoulli population, n_L=100, 1000 runs: coverage %.3f", bb_cov));

  const auto pop = load_population(ctx, "adult_like.conf");
  s.methods = {Method::BB, Method::BC};
  s.pair = pop.pair;
  s.n_labeled = 10;
  const auto bc = coverage_experiment(pop.data, MetricKind::Accuracy, s);
  const double bc_cov = *bc.method(Method::BC).coverage;
  detail(fmt("adult-like (in-family), n_L=10, 1000 runs: BC coverage %.3f, BB coverage %.3f, BC missing %zu", bc_cov,
             *bc.method(Method::BB).coverage, bc.method(Method::BC).missing));
  Outcome out;
  out.pass = bb_cov >= 0.90 && bb_cov <= 0.99 && bc_cov >= 0.90;
  out.summary = fmt("BB %.3f (need [0.90, 0.99]), BC %.3f (need >= 0.90)", bb_cov, bc_cov);
  return out;
}

Outcome lemma_bound(const Context&) {
  Outcome out;
  Rng rng = make_rng(909);
  std::size_t holds = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    SyntheticSpec spec;
    const double p0 = 0.3 + 0.4 * uniform01(rng);
    auto group = [&](const char* name, double prop) {
      GroupSpec g;
      g.name = name;
      g.proportion = prop;
      g.positive_rate = 0.1 + 0.4 * uniform01(rng);
      g.concentration = 1.0 + 2.0 * uniform01(rng);
      g.calibration = {std::exp(0.35 * standard_normal(rng)), std::exp(0.35 * standard_normal(rng)),
                       0.5 * standard_normal(rng)};
      return g;
    };
    spec.groups = {group("g0", p0), group("g1", 1.0 - p0)};
    spec.population = 5000;
    spec.seed = derive_seed(910, {i});
    const auto pop = generate(spec);
    ExperimentSettings s;
    s.pair = {GroupId{1}, GroupId{0}};
    s.n_labeled = i % 2 == 0 ? 50 : 200;
    s.seed = derive_seed(911, {i});
    const auto c = lemma_bound_check(spec, pop, s);
    holds += c.holds;
    detail(fmt("config %llu n_L=%3zu: |E delta - truth| = %.4f, bound %.4f (L1 %.4f + %.4f, 4 se %.4f)%s",
               static_cast<unsigned long long>(i), s.n_labeled, std::abs(c.estimate - c.truth), c.bound,
               c.l1_unprivileged, c.l1_privileged, 4 * c.mc_stderr, c.holds ? "" : "  VIOLATION"));
  }
  out.pass = holds == 10;
  out.summary = fmt("bound holds in %zu of 10 configurations", holds);
  return out;
}

Outcome sensitivity(const Context& ctx) {
  const auto pop = load_population(ctx, "adult_like.conf");
  ExperimentSettings s;
  s.pair = pop.pair;
  s.runs = 100;
  s.seed = 1010;
  Outcome out;
  std::size_t cells = 0, wins = 0;
  for (std::size_t n : {10, 100}) {
    s.n_labeled = n;
    const auto r = sensitivity_sweep(pop.data, MetricKind::Accuracy, {0.1, 0.5, 1.0, 2.0, 10.0}, s);
    std::string line = fmt("n_L=%3zu  BB %.4f |", n, r.bb.mae.value_or(NAN));
    for (const auto& row : r.rows) {
      const bool ok = r.bb.mae && row.bc.mae && *row.bc.mae < *r.bb.mae;
      ++cells;
      wins += ok;
      line += fmt(" alpha %g: %.4f%s", row.alpha, row.bc.mae.value_or(NAN), ok ? "" : "(!)");
    }
    detail(line);
  }
  out.pass = wins == cells;
  out.summary = fmt("BC MAE below BB MAE in %zu of %zu (alpha, n_L) cells", wins, cells);
  return out;
}

int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome performance(const Context& ctx) {
  const auto pop = load_population(ctx, "adult_like.conf");
  const auto split = split_labeled(pop.data, 100, 1111);
  std::vector<ScoredExample> rows = split.labeled.examples();
  for (std::size_t i = 0; i < 10000; ++i) rows.push_back(split.unlabeled.examples()[i]);
  const Dataset data(rows, pop.data.group_names());
  fs::create_directories(ctx.workdir);
  const auto csv = ctx.workdir / "performance.csv";
  write_csv(csv, data);

  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  if (!ctx.cli.empty()) {
    const auto cmd = quote(ctx.cli) + " assess " + quote(csv) + " --method bc --pair min,maj --seed 1 --out " +
                     quote(ctx.workdir / "performance.json");
    out.pass = run_command(cmd) == 0;
  } else {
    AssessOptions opts;
    opts.pair = data.pair("min", "maj");
    out.pass = assess(data, opts).T == 800;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail(fmt("assess (BC, n_L=100, n_U=10000, T=800) via %s", ctx.cli.empty() ? "library" : "CLI"));
  out.pass = out.pass && secs < 30.0;
  out.summary = fmt("%.2f s (limit 30 s)", secs);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const Context& ctx) {
  Outcome out;
  if (ctx.cli.empty()) {
    out.pass = false;
    out.summary = "no --cli given";
    return out;
  }
  const auto demo = quote(ctx.configs / "demo.conf");
  const auto reqn = quote(ctx.configs / "required_n.conf");
  struct Step {
    std::string name;
    std::function<std::string(const fs::path&)> cmd;
    std::vector<std::string> files;
  };
  const std::string cli = quote(ctx.cli);
  const std::vector<Step> steps{
      {"simulate", [&](const fs::path& d) { return cli + " simulate --config " + demo + " --labeled 200 --out " + quote(d / "sim.csv"); },
       {"sim.csv"}},
      {"assess",
       [&](const fs::path& d) {
         return cli + " assess " + quote(d / "sim.csv") + " --config " + demo + " --metric tpr --out " +
                quote(d / "assess.json") + " --draws-out " + quote(d / "draws.csv") + " && " + cli + " assess " +
                quote(d / "sim.csv") + " --config " + demo + " --method bb --format csv --out " + quote(d / "assess_bb.csv");
       },
       {"assess.json", "draws.csv", "assess_bb.csv"}},
      {"mae-experiment",
       [&](const fs::path& d) {
         return cli + " mae-experiment --config " + demo + " --out " + quote(d / "mae") + " --plot " + quote(d / "mae_plot.csv");
       },
       {"mae.csv", "mae.json", "mae_plot.csv"}},
      {"coverage-experiment",
       [&](const fs::path& d) { return cli + " coverage-experiment --config " + demo + " --out " + quote(d / "cov"); },
       {"cov.csv", "cov.json"}},
      {"ablation", [&](const fs::path& d) { return cli + " ablation --config " + demo + " --out " + quote(d / "abl"); },
       {"abl.csv", "abl.json"}},
      {"sensitivity",
       [&](const fs::path& d) { return cli + " sensitivity --config " + demo + " --out " + quote(d / "sens"); },
       {"sens.csv", "sens.json"}},
      {"required-n", [&](const fs::path& d) { return cli + " required-n --config " + reqn + " --out " + quote(d / "reqn"); },
       {"reqn.csv", "reqn.json"}},
  };
  std::size_t identical = 0;
  for (const auto& step : steps) {
    bool ok = true;
    fs::path dirs[2];
    for (int rep = 0; rep < 2; ++rep) {
      dirs[rep] = ctx.workdir / "determinism" / (step.name + "_" + std::to_string(rep));
      fs::remove_all(dirs[rep]);
      fs::create_directories(dirs[rep]);
      // assess reads the simulated file from its own run directory
      const auto sim = ctx.workdir / "determinism" / "simulate_0" / "sim.csv";
      if (step.name == "assess" && fs::exists(sim)) fs::copy_file(sim, dirs[rep] / "sim.csv");
      if (run_command(step.cmd(dirs[rep])) != 0) ok = false;
    }
    for (const auto& f : step.files) {
      const bool exists = fs::exists(dirs[0] / f) && fs::exists(dirs[1] / f);
      ok = ok && exists && fs::file_size(dirs[0] / f) > 0 && slurp(dirs[0] / f) == slurp(dirs[1] / f);
    }
    identical += ok;
    detail(fmt("%-20s %s", step.name.c_str(), ok ? "identical" : "DIFFERENT or failed"));
  }
  out.pass = identical == steps.size();
  out.summary = fmt("%zu of %zu subcommands byte-identical across two runs", identical, steps.size());
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 when the criterion sets no limit
  Outcome (*run)(const Context&);
};

const Criterion kCriteria[] = {
    {1, "conjugacy oracle", 10, conjugacy},
    {2, "calibration identity and gradient", 10, calibration_identity},
    {3, "MCMC prior recovery", 120, prior_recovery},
    {4, "MCMC parameter recovery", 120, parameter_recovery},
    {5, "labeled-only reduction", 60, labeled_only},
    {6, "required-n reproduction", 300, required_n},
    {7, "MAE dominance", 1800, mae_dominance},
    {8, "coverage sanity", 1800, coverage},
    {9, "error bound on the expected estimate", 600, lemma_bound},
    {10, "sensitivity robustness", 1800, sensitivity},
    {11, "performance", 30, performance},
    {12, "determinism", 0, determinism},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairbayes acceptance checks"};
  std::vector<int> only;
  Context ctx;
  std::string cli, workdir = "acceptance_work", configs = FAIRBAYES_CONFIG_DIR;
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  app.add_option("--cli", cli, "path to the fairbayes executable");
  app.add_option("--workdir", workdir, "scratch directory");
  app.add_option("--configs", configs, "directory of bundled configs");
  CLI11_PARSE(app, argc, argv);
  ctx.cli = cli.empty() ? fs::path() : fs::absolute(cli);
  ctx.workdir = fs::absolute(workdir);
  ctx.configs = fs::absolute(configs);
  fs::create_directories(ctx.workdir);

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::cout << "criterion " << c.id << ": " << c.name << '\n' << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds <= 0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::string timing = fmt("%.1f s", secs);
    if (c.limit_seconds > 0) timing += fmt(" / limit %.0f s", c.limit_seconds);
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.summary << " (" << timing
              << (in_time ? "" : ", over time") << ")\n"
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
