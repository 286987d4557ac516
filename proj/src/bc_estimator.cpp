#include "fairbayes/bc_estimator.hpp"

#include <cmath>

#include "fairbayes/error.hpp"

namespace fairbayes {

BcEvaluator::BcEvaluator(const Dataset& labeled, const Dataset& unlabeled)
    : groups_(std::max(labeled.group_count(), unlabeled.group_count())) {
  for (const auto& ex : labeled.examples()) {
    if (!ex.label) continue;
    auto& g = groups_[ex.group.index];
    const bool y = *ex.label == 1;
    ++g.n_labeled;
    g.correct += ex.correct();
    if (y) {
      ++g.positives;
      g.true_positives += ex.predicted();
    } else {
      ++g.negatives;
      g.false_positives += ex.predicted();
    }
  }
  for (const auto& ex : unlabeled.examples()) {
    auto& g = groups_[ex.group.index];
    if (ex.predicted()) {
      g.pos_log_s.push_back(std::log(ex.score));
      g.pos_log_1ms.push_back(std::log1p(-ex.score));
    } else {
      g.neg_log_s.push_back(std::log(ex.score));
      g.neg_log_1ms.push_back(std::log1p(-ex.score));
    }
  }
}

const BcEvaluator::Group& BcEvaluator::group(GroupId g) const {
  const auto& gr = groups_.at(g.index);
  if (gr.n_labeled + gr.pos_log_s.size() + gr.neg_log_s.size() == 0)
    throw EmptyGroup("group " + std::to_string(g.index) + " has no examples");
  return gr;
}

BcEvaluator::Sums BcEvaluator::sums(const Group& gr, const CalibrationParams& p) const {
  Sums s;
  for (std::size_t i = 0; i < gr.pos_log_s.size(); ++i)
    s.p_pred1 += sigmoid(calibrated_logit(gr.pos_log_s[i], gr.pos_log_1ms[i], p.a, p.b, p.c));
  for (std::size_t i = 0; i < gr.neg_log_s.size(); ++i)
    s.p_pred0 += sigmoid(calibrated_logit(gr.neg_log_s[i], gr.neg_log_1ms[i], p.a, p.b, p.c));
  return s;
}

BcEvaluator::GroupMetrics BcEvaluator::all_metrics(GroupId g, const CalibrationParams& p) const {
  const Group& gr = group(g);
  const Sums s = sums(gr, p);
  const double n_pred1 = static_cast<double>(gr.pos_log_s.size());
  const double n_pred0 = static_cast<double>(gr.neg_log_s.size());

  GroupMetrics out;
  // Latent accuracy: f(s) where yhat = 1, 1 - f(s) where yhat = 0.
  const double z_sum = s.p_pred1 + (n_pred0 - s.p_pred0);
  out.accuracy = (static_cast<double>(gr.correct) + z_sum) / (static_cast<double>(gr.n_labeled) + n_pred1 + n_pred0);

  const double tpr_den = static_cast<double>(gr.positives) + s.p_pred1 + s.p_pred0;
  if (tpr_den >= kMinDenominator) out.tpr = (static_cast<double>(gr.true_positives) + s.p_pred1) / tpr_den;

  const double fp_unl = n_pred1 - s.p_pred1;
  const double fpr_den = static_cast<double>(gr.negatives) + fp_unl + (n_pred0 - s.p_pred0);
  if (fpr_den >= kMinDenominator) out.fpr = (static_cast<double>(gr.false_positives) + fp_unl) / fpr_den;
  return out;
}

std::optional<double> BcEvaluator::theta(MetricKind metric, GroupId g, const CalibrationParams& params) const {
  const auto m = all_metrics(g, params);
  switch (metric) {
    case MetricKind::Accuracy: return m.accuracy;
    case MetricKind::TPR: return m.tpr;
    case MetricKind::FPR: return m.fpr;
  }
  return std::nullopt;
}

double bc_theta_accuracy(const Dataset& labeled, const Dataset& unlabeled, const PosteriorDraw& draw,
                         GroupId group) {
  return *BcEvaluator(labeled, unlabeled).theta(MetricKind::Accuracy, group, draw.groups.at(group.index));
}

double bc_theta_conditional(const Dataset& labeled, const Dataset& unlabeled, const PosteriorDraw& draw,
                            GroupId group, MetricKind metric) {
  if (metric == MetricKind::Accuracy) throw InvalidConfig("conditional metric must be TPR or FPR");
  const auto v = BcEvaluator(labeled, unlabeled).theta(metric, group, draw.groups.at(group.index));
  if (!v) throw DegenerateDenominator("expected conditioning count is below 1e-9");
  return *v;
}

namespace {

void finish(PosteriorSamples& s, std::size_t total) {
  if (s.delta.empty()) throw DegenerateDenominator("every posterior draw had a degenerate denominator");
  s.flagged = static_cast<double>(s.skipped) > kSkipFlagFraction * static_cast<double>(total);
}

}  // namespace

std::vector<PosteriorSamples> bc_delta_samples_all(const BcEvaluator& evaluator,
                                                   const CalibrationPosterior& posterior, GroupPair pair) {
  std::vector<PosteriorSamples> out(3);
  for (auto& s : out) {
    s.theta.resize(evaluator.group_count());
    s.delta.reserve(posterior.size());
  }
  const auto hi = pair.unprivileged.index;
  const auto lo = pair.privileged.index;
  for (const auto& draw : posterior.draws) {
    const auto a = evaluator.all_metrics(pair.unprivileged, draw.groups.at(hi));
    const auto b = evaluator.all_metrics(pair.privileged, draw.groups.at(lo));
    const std::optional<double> ha[3] = {a.accuracy, a.tpr, a.fpr};
    const std::optional<double> lb[3] = {b.accuracy, b.tpr, b.fpr};
    for (std::size_t m = 0; m < 3; ++m) {
      auto& s = out[m];
      if (!ha[m] || !lb[m]) {
        ++s.skipped;
        continue;
      }
      s.theta[hi].push_back(*ha[m]);
      s.theta[lo].push_back(*lb[m]);
      s.delta.push_back(*ha[m] - *lb[m]);
    }
  }
  for (auto& s : out) {
    if (s.delta.empty()) continue;
    s.flagged = static_cast<double>(s.skipped) > kSkipFlagFraction * static_cast<double>(posterior.size());
  }
  return out;
}

PosteriorSamples bc_delta_samples(const Dataset& labeled, const Dataset& unlabeled,
                                  const CalibrationPosterior& posterior, MetricKind metric, GroupPair pair) {
  const BcEvaluator evaluator(labeled, unlabeled);
  PosteriorSamples s;
  s.theta.resize(evaluator.group_count());
  s.delta.reserve(posterior.size());
  for (const auto& draw : posterior.draws) {
    const auto hi = evaluator.theta(metric, pair.unprivileged, draw.groups.at(pair.unprivileged.index));
    const auto lo = evaluator.theta(metric, pair.privileged, draw.groups.at(pair.privileged.index));
    if (!hi || !lo) {
      ++s.skipped;
      continue;
    }
    s.theta[pair.unprivileged.index].push_back(*hi);
    s.theta[pair.privileged.index].push_back(*lo);
    s.delta.push_back(*hi - *lo);
  }
  finish(s, posterior.size());
  return s;
}

}  // namespace fairbayes
