#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fairbayes/bc_estimator.hpp"
#include "fairbayes/diagnostics.hpp"
#include "fairbayes/error.hpp"
#include "fairbayes/freq_metrics.hpp"
#include "fairbayes/simulate.hpp"
#include "helpers.hpp"

using namespace fairbayes;
using fbtest::ex;

namespace {

PosteriorDraw identity_draw(std::size_t groups) {
  PosteriorDraw d;
  d.groups.assign(groups, CalibrationParams::identity());
  return d;
}

CalibrationPosterior random_posterior(Rng& rng, std::size_t draws, std::size_t groups) {
  CalibrationPosterior post;
  for (std::size_t t = 0; t < draws; ++t) {
    PosteriorDraw d;
    for (std::size_t g = 0; g < groups; ++g)
      d.groups.push_back({std::exp(0.5 * standard_normal(rng)), std::exp(0.5 * standard_normal(rng)), standard_normal(rng)});
    post.draws.push_back(d);
  }
  return post;
}

const Dataset kEmpty({}, {"g0", "g1"});

}  // namespace

TEST_SUITE("bc_estimator") {
  TEST_CASE("accuracy from unlabeled only") {
    const auto unl = fbtest::two_groups({ex(0.9, 0, std::nullopt), ex(0.2, 0, std::nullopt), ex(0.5, 1, std::nullopt)});
    CHECK(bc_theta_accuracy(kEmpty, unl, identity_draw(2), GroupId{0}) == doctest::Approx(0.85).epsilon(1e-12));
  }

  TEST_CASE("accuracy mixing labeled and unlabeled") {
    const auto lab = fbtest::two_groups({ex(0.8, 0, 1)});
    const auto unl = fbtest::two_groups({ex(0.5, 0, std::nullopt)});
    CHECK(bc_theta_accuracy(lab, unl, identity_draw(2), GroupId{0}) == doctest::Approx(0.75).epsilon(1e-12));
  }

  TEST_CASE("TPR from unlabeled only") {
    const auto unl =
        fbtest::two_groups({ex(0.9, 0, std::nullopt), ex(0.8, 0, std::nullopt), ex(0.1, 0, std::nullopt)});
    CHECK(bc_theta_conditional(kEmpty, unl, identity_draw(2), GroupId{0}, MetricKind::TPR) ==
          doctest::Approx(17.0 / 18.0).epsilon(1e-12));
    // FPR: (0.1 + 0.2) / (0.1 + 0.2 + 0.9)
    CHECK(bc_theta_conditional(kEmpty, unl, identity_draw(2), GroupId{0}, MetricKind::FPR) ==
          doctest::Approx(0.3 / 1.2).epsilon(1e-12));
    CHECK_THROWS_AS(bc_theta_conditional(kEmpty, unl, identity_draw(2), GroupId{0}, MetricKind::Accuracy),
                    InvalidConfig);
  }

  TEST_CASE("empty group and degenerate denominator") {
    const auto unl = fbtest::two_groups({ex(0.9, 0, std::nullopt)});
    CHECK_THROWS_AS(bc_theta_accuracy(kEmpty, unl, identity_draw(2), GroupId{1}), EmptyGroup);
    // calibrated P(y=1) is essentially zero, so no expected positives
    PosteriorDraw draw = identity_draw(2);
    draw.groups[0] = {1.0, 1.0, -60.0};
    const auto neg_lab = fbtest::two_groups({ex(0.2, 0, 0)});
    CHECK_THROWS_AS(bc_theta_conditional(neg_lab, unl, draw, GroupId{0}, MetricKind::TPR), DegenerateDenominator);

    CalibrationPosterior post;
    post.draws.assign(10, draw);
    const auto both = fbtest::two_groups({ex(0.2, 0, 0), ex(0.9, 1, 1)});
    CHECK_THROWS_AS(bc_delta_samples(both, unl, post, MetricKind::TPR, {GroupId{0}, GroupId{1}}), DegenerateDenominator);
  }

  TEST_CASE("skipped draws are counted and flagged") {
    const auto lab = fbtest::two_groups({ex(0.2, 0, 0), ex(0.9, 1, 1)});
    const auto unl = fbtest::two_groups({ex(0.9, 0, std::nullopt)});
    CalibrationPosterior post;
    PosteriorDraw bad = identity_draw(2);
    bad.groups[0].c = -60.0;
    for (int t = 0; t < 100; ++t) post.draws.push_back(t < 5 ? bad : identity_draw(2));
    const auto few = bc_delta_samples(lab, unl, post, MetricKind::TPR, {GroupId{0}, GroupId{1}});
    CHECK(few.skipped == 5);
    CHECK(few.size() == 95);
    CHECK_FALSE(few.flagged);
    for (int t = 0; t < 20; ++t) post.draws[static_cast<std::size_t>(t)] = bad;
    const auto many = bc_delta_samples(lab, unl, post, MetricKind::TPR, {GroupId{0}, GroupId{1}});
    CHECK(many.skipped == 20);
    CHECK(many.flagged);
  }

  TEST_CASE("labeled-only reduces to the frequentist values") {
    Rng rng = make_rng(61);
    for (int rep = 0; rep < 100; ++rep) {
      const auto lab = fbtest::random_labeled(rng, 2 + static_cast<std::size_t>(uniform01(rng) * 20));
      const BcEvaluator eval(lab, kEmpty);
      const auto post = random_posterior(rng, 5, 2);
      for (auto m : {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR}) {
        const auto freq = freq_metric(lab, m, {GroupId{1}, GroupId{0}});
        for (std::uint32_t g = 0; g < 2; ++g) {
          if (lab.group_sizes()[g] == 0) continue;
          for (const auto& d : post.draws) {
            const auto v = eval.theta(m, GroupId{g}, d.groups[g]);
            REQUIRE(v.has_value() == freq.per_group[g].has_value());
            if (v) CHECK(*v == *freq.per_group[g]);
          }
        }
      }
    }
  }

  TEST_CASE("raising latent accuracies never lowers accuracy") {
    Rng rng = make_rng(62);
    for (int rep = 0; rep < 50; ++rep) {
      const auto lab = fbtest::random_labeled(rng, 10);
      const auto unl = fbtest::random_labeled(rng, 30).masked();
      const BcEvaluator eval(lab, unl);
      // larger a and b sharpen the map, so every z moves toward 1
      const CalibrationParams lo{1.0, 1.0, 0.0};
      const CalibrationParams hi{1.5, 1.5, 0.0};
      for (std::uint32_t g = 0; g < 2; ++g) {
        if (lab.group_sizes()[g] + unl.group_sizes()[g] == 0) continue;
        CHECK(*eval.theta(MetricKind::Accuracy, GroupId{g}, hi) >= *eval.theta(MetricKind::Accuracy, GroupId{g}, lo));
      }
    }
  }

  TEST_CASE("duplicated groups center on zero") {
    Rng rng = make_rng(63);
    const auto base = fbtest::random_labeled(rng, 200);
    std::vector<ScoredExample> rows;
    for (auto e : base.examples()) {
      e.group = GroupId{0};
      rows.push_back(e);
      e.group = GroupId{1};
      rows.push_back(e);
    }
    const auto d = fbtest::two_groups(rows);
    const auto split = split_labeled(d, 60, 3);
    SamplerConfig cfg;
    cfg.seed = 9;
    const auto post = sample_posterior(split.labeled, PriorConfig{}, cfg);
    const auto s = bc_delta_samples(split.labeled, split.unlabeled, post, MetricKind::Accuracy, {GroupId{1}, GroupId{0}});
    CHECK(s.size() == 800);
    double m = 0.0, v = 0.0;
    for (double x : s.delta) m += x;
    m /= static_cast<double>(s.size());
    for (double x : s.delta) v += (x - m) * (x - m);
    v /= static_cast<double>(s.size() - 1);
    // draws are autocorrelated; use the chain ESS for the standard error
    std::vector<std::vector<double>> traces(post.chains);
    for (std::size_t i = 0; i < s.size(); ++i) traces[post.chain_index[i]].push_back(s.delta[i]);
    const double ess = effective_sample_size(traces);
    const double pop = std::abs(*freq_metric(split.labeled, MetricKind::Accuracy, {GroupId{1}, GroupId{0}}).delta);
    // the labeled split itself is asymmetric; allow for that plus MC error
    CHECK(std::abs(m) < 3.0 * std::sqrt(v / ess) + pop);
  }

  TEST_CASE("swapping the pair negates every draw") {
    Rng rng = make_rng(64);
    const auto lab = fbtest::random_labeled(rng, 30);
    const auto unl = fbtest::random_labeled(rng, 100).masked();
    const auto post = random_posterior(rng, 200, 2);
    for (auto m : {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR}) {
      const auto a = bc_delta_samples(lab, unl, post, m, {GroupId{1}, GroupId{0}});
      const auto b = bc_delta_samples(lab, unl, post, m, {GroupId{0}, GroupId{1}});
      REQUIRE(a.size() == b.size());
      for (std::size_t t = 0; t < a.size(); ++t) CHECK(a.delta[t] == -b.delta[t]);
      auto qa = a.delta, qb = b.delta;
      std::sort(qa.begin(), qa.end());
      std::sort(qb.begin(), qb.end());
      CHECK(quantile_sorted(qa, 0.1) == doctest::Approx(-quantile_sorted(qb, 0.9)));
    }
  }

  TEST_CASE("single pass agrees with per-metric evaluation") {
    Rng rng = make_rng(65);
    const auto lab = fbtest::random_labeled(rng, 30);
    const auto unl = fbtest::random_labeled(rng, 100).masked();
    const auto post = random_posterior(rng, 50, 2);
    const BcEvaluator eval(lab, unl);
    const auto all = bc_delta_samples_all(eval, post, {GroupId{1}, GroupId{0}});
    REQUIRE(all.size() == 3);
    for (auto m : {MetricKind::Accuracy, MetricKind::TPR, MetricKind::FPR})
      CHECK(all[static_cast<std::size_t>(m)].delta ==
            bc_delta_samples(lab, unl, post, m, {GroupId{1}, GroupId{0}}).delta);
  }

  TEST_CASE("calibrated scores recover the population TPR") {
    SyntheticSpec spec;
    spec.groups = {{"g0", 0.5, 0.3, 2.0}, {"g1", 0.5, 0.2, 3.0}};
    spec.distortion = Distortion::None;
    spec.population = 400000;
    spec.seed = 66;
    const auto pop = generate(spec);
    const BcEvaluator eval(Dataset({}, pop.group_names()), pop.masked());
    for (std::uint32_t g = 0; g < 2; ++g) {
      const auto truth = population_rates(spec, g);
      CHECK(*eval.theta(MetricKind::TPR, GroupId{g}, CalibrationParams::identity()) ==
            doctest::Approx(truth.tpr).epsilon(0.01));
      CHECK(*eval.theta(MetricKind::FPR, GroupId{g}, CalibrationParams::identity()) ==
            doctest::Approx(truth.fpr).epsilon(0.02));
      CHECK(*eval.theta(MetricKind::Accuracy, GroupId{g}, CalibrationParams::identity()) ==
            doctest::Approx(truth.accuracy).epsilon(0.01));
    }
  }
}
