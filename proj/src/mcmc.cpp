#include "fairbayes/mcmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include "fairbayes/diagnostics.hpp"
#include "fairbayes/error.hpp"
#include "fairbayes/parallel.hpp"

namespace fairbayes {

void SamplerConfig::validate() const {
  if (chains < 1) throw InvalidConfig("sampler needs at least one chain");
  if (samples_per_chain < 1) throw InvalidConfig("sampler needs at least one sample per chain");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw InvalidConfig("target acceptance rate must lie in (0,1)");
  if (adapt_window < 1) throw InvalidConfig("adaptation window must be at least 1");
}

AdaptiveProposal::AdaptiveProposal(std::size_t dim, double initial_scale, bool learn_covariance)
    : chol_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) *
            initial_scale),
      learn_cov_(learn_covariance),
      mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

void AdaptiveProposal::draw(Rng& rng, std::span<double> step) {
  const auto d = chol_.rows();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = standard_normal(rng);
  Eigen::VectorXd s = chol_.triangularView<Eigen::Lower>() * z;
  s *= std::exp(log_lambda_);
  for (Eigen::Index i = 0; i < d; ++i) step[static_cast<std::size_t>(i)] = s[i];
}

void AdaptiveProposal::record(bool accepted) noexcept {
  ++proposals_;
  accepts_ += accepted;
  if (!frozen_) {
    ++window_proposals_;
    window_accepts_ += accepted;
  }
}

void AdaptiveProposal::observe(std::span<const double> x) {
  if (!learn_cov_ || frozen_) return;
  ++obs_;
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd delta = v - mean_;
  mean_ += delta / static_cast<double>(obs_);
  m2_ += delta * (v - mean_).transpose();
}

void AdaptiveProposal::end_window(double target_accept) {
  if (frozen_ || window_proposals_ == 0) return;
  ++windows_;
  const double rate = static_cast<double>(window_accepts_) / static_cast<double>(window_proposals_);
  log_lambda_ += 2.0 * (rate - target_accept) / std::sqrt(static_cast<double>(windows_));
  log_lambda_ = std::clamp(log_lambda_, -20.0, 10.0);
  window_accepts_ = window_proposals_ = 0;

  const auto d = static_cast<std::size_t>(chol_.rows());
  if (learn_cov_ && obs_ >= std::max<std::size_t>(50, 20 * d)) {
    Eigen::MatrixXd cov = m2_ / static_cast<double>(obs_ - 1);
    cov *= 2.38 * 2.38 / static_cast<double>(d);
    cov += Eigen::MatrixXd::Identity(cov.rows(), cov.cols()) * 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      const bool first = !shaped_;
      chol_ = llt.matrixL();
      if (first) log_lambda_ = 0.0;
      shaped_ = true;
    }
  }
}

void AdaptiveProposal::freeze() noexcept {
  frozen_ = true;
  accepts_ = proposals_ = 0;
}

double AdaptiveProposal::scale() const noexcept { return std::exp(log_lambda_); }

double AdaptiveProposal::acceptance_rate() const noexcept {
  return proposals_ == 0 ? 0.0 : static_cast<double>(accepts_) / static_cast<double>(proposals_);
}

RandomWalkRun random_walk_metropolis(const std::function<double(std::span<const double>)>& log_density,
                                     std::vector<double> x, std::size_t burn_in, std::size_t samples,
                                     Rng& rng, double target_accept, std::size_t adapt_window) {
  const std::size_t d = x.size();
  AdaptiveProposal proposal(d, 1.0);
  double current = log_density(x);
  if (std::isnan(current)) throw NonFiniteDensity("log density is NaN at the initial point");
  std::vector<double> step(d), cand(d);
  RandomWalkRun out;
  out.draws.reserve(samples);
  for (std::size_t it = 0; it < burn_in + samples; ++it) {
    if (it == burn_in) proposal.freeze();
    proposal.draw(rng, step);
    for (std::size_t i = 0; i < d; ++i) cand[i] = x[i] + step[i];
    const double next = log_density(cand);
    if (std::isnan(next)) throw NonFiniteDensity("log density is NaN");
    const bool accept = std::log(uniform01(rng)) < next - current;
    if (accept) {
      x.swap(cand);
      current = next;
    }
    proposal.record(accept);
    if (it < burn_in) {
      if (it >= burn_in / 3) proposal.observe(x);
      if ((it + 1) % adapt_window == 0) proposal.end_window(target_accept);
    } else {
      out.draws.push_back(x);
    }
  }
  out.acceptance_rate = proposal.acceptance_rate();
  return out;
}

std::vector<std::vector<double>> CalibrationPosterior::traces(std::size_t coordinate) const {
  std::vector<std::vector<double>> out(chains);
  for (auto& t : out) t.reserve(samples_per_chain);
  for (std::size_t i = 0; i < coordinates.size(); ++i) out[chain_index[i]].push_back(coordinates[i][coordinate]);
  return out;
}

namespace {

struct ChainResult {
  std::vector<std::vector<double>> coords;
  std::vector<BlockAcceptance> acceptance;
};

// Group and hyperparameter blocks are updated several times per sweep; the
// hyper moves touch only prior terms and are cheap.
constexpr int kGroupRepeats = 4;
constexpr int kHyperRepeats = 10;

class ChainRunner {
 public:
  ChainRunner(const CalibrationTarget& target, const SamplerConfig& config, std::size_t chain)
      : target_(target),
        config_(config),
        chain_(chain),
        rng_(make_rng(config.seed, {0xc4a1, chain})),
        comps_(target.components()) {
    const std::size_t groups = target.group_count();
    const std::size_t d = comps_.size();
    for (std::size_t g = 0; g < groups; ++g) {
      group_rw_.emplace_back(d, 0.1);
      group_scaled_.emplace_back(d, 0.5, false);
    }
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      hyper_rw_.emplace_back(2, 0.1);
      hyper_nc_.emplace_back(2, 0.1);
    }
    translate_.emplace_back(d, 0.05);
  }

  ChainResult run() {
    initialize();
    const std::size_t total = config_.burn_in + config_.samples_per_chain;
    ChainResult out;
    out.coords.reserve(config_.samples_per_chain);
    for (std::size_t it = 0; it < total; ++it) {
      if (it == config_.burn_in) freeze_all();
      const bool learning = it < config_.burn_in && it >= config_.burn_in / 3;
      sweep(learning);
      if (it < config_.burn_in) {
        if ((it + 1) % config_.adapt_window == 0) end_window_all();
      } else {
        out.coords.push_back(target_.pack(state_));
      }
    }
    collect_acceptance(out);
    return out;
  }

 private:
  bool use_likelihood() const noexcept { return !config_.prior_only; }

  double likelihood(std::size_t g, const GroupCoords& x) const {
    if (!use_likelihood() || target_.labeled_in_group(g) == 0) return 0.0;
    return target_.group_log_likelihood(g, x);
  }

  static void check(double v) {
    if (std::isnan(v)) throw NonFiniteDensity("calibration log density evaluated to NaN");
  }

  bool accept(double log_ratio) {
    check(log_ratio);
    return std::log(uniform01(rng_)) < log_ratio;
  }

  void initialize() {
    const auto& prior = target_.prior();
    HyperCoords h = target_.effective_hyper({});
    if (target_.hierarchical()) {
      for (std::size_t k : comps_) {
        h.mu[k] = 0.25 * prior.mu_scale(k) * standard_normal(rng_);
        h.log_sigma[k] = std::log(0.8 * prior.sigma_scale(k)) + 0.3 * standard_normal(rng_);
      }
    }
    state_.hyper = h;
    state_.groups.assign(target_.group_count(), GroupCoords{});
    lik_.assign(target_.group_count(), 0.0);
    for (std::size_t g = 0; g < state_.groups.size(); ++g) {
      auto& x = state_.groups[g];
      for (std::size_t k : comps_) x[k] = h.mu[k] + std::exp(h.log_sigma[k]) * standard_normal(rng_);
      target_.normalize(x);
      lik_[g] = likelihood(g, x);
      check(lik_[g]);
    }
  }

  void sweep(bool learning) {
    const HyperCoords h = target_.effective_hyper(state_.hyper);
    std::vector<double> step(comps_.size());
    for (std::size_t g = 0; g < state_.groups.size(); ++g) {
      for (int r = 0; r < kGroupRepeats; ++r) group_move(g, group_rw_[g], step, nullptr);
      if (target_.hierarchical()) {
        std::array<double, 3> sig{};
        for (std::size_t k : comps_) sig[k] = std::exp(h.log_sigma[k]);
        group_move(g, group_scaled_[g], step, &sig);
      }
      if (learning) {
        std::vector<double> v;
        for (std::size_t k : comps_) v.push_back(state_.groups[g][k]);
        group_rw_[g].observe(v);
      }
    }
    if (!target_.hierarchical()) return;
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      for (int r = 0; r < kHyperRepeats; ++r) hyper_centered_move(j);
      hyper_noncentered_move(j);
      if (learning) {
        const std::size_t k = comps_[j];
        const double v[2] = {state_.hyper.mu[k], state_.hyper.log_sigma[k]};
        hyper_rw_[j].observe(v);
        hyper_nc_[j].observe(v);
      }
    }
    translate_move(step);
    if (learning) {
      // The translation shape follows the group average, which the likelihood pins.
      std::vector<double> v(comps_.size(), 0.0);
      for (const auto& x : state_.groups)
        for (std::size_t j = 0; j < comps_.size(); ++j) v[j] += x[comps_[j]] / static_cast<double>(state_.groups.size());
      translate_.front().observe(v);
    }
  }

  void group_move(std::size_t g, AdaptiveProposal& prop, std::vector<double>& step,
                  const std::array<double, 3>* sigma_scale) {
    prop.draw(rng_, step);
    GroupCoords cand = state_.groups[g];
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      const std::size_t k = comps_[j];
      cand[k] += sigma_scale ? step[j] * (*sigma_scale)[k] : step[j];
    }
    target_.normalize(cand);
    const double cand_lik = likelihood(g, cand);
    const double ratio = cand_lik + target_.group_log_prior(cand, state_.hyper) - lik_[g] -
                         target_.group_log_prior(state_.groups[g], state_.hyper);
    const bool ok = accept(ratio);
    if (ok) {
      state_.groups[g] = cand;
      lik_[g] = cand_lik;
    }
    prop.record(ok);
  }

  void hyper_centered_move(std::size_t j) {
    const std::size_t k = comps_[j];
    double step[2];
    hyper_rw_[j].draw(rng_, step);
    const double mu = state_.hyper.mu[k], ls = state_.hyper.log_sigma[k];
    const double mu2 = mu + step[0], ls2 = ls + step[1];
    double ratio = target_.hyper_log_prior(k, mu2, ls2) - target_.hyper_log_prior(k, mu, ls);
    for (const auto& x : state_.groups)
      ratio += CalibrationTarget::component_log_prior(x[k], mu2, ls2) -
               CalibrationTarget::component_log_prior(x[k], mu, ls);
    const bool ok = accept(ratio);
    if (ok) {
      state_.hyper.mu[k] = mu2;
      state_.hyper.log_sigma[k] = ls2;
    }
    hyper_rw_[j].record(ok);
  }

  // Moves (mu_k, log sigma_k) while holding each group's standardized
  // coordinate fixed. The group prior and the Jacobian cancel, leaving the
  // likelihood and hyperprior in the ratio.
  void hyper_noncentered_move(std::size_t j) {
    const std::size_t k = comps_[j];
    double step[2];
    hyper_nc_[j].draw(rng_, step);
    const double mu = state_.hyper.mu[k], ls = state_.hyper.log_sigma[k];
    const double mu2 = mu + step[0], ls2 = ls + step[1];
    const double stretch = std::exp(ls2 - ls);
    cand_groups_ = state_.groups;
    cand_lik_.resize(lik_.size());
    double ratio = target_.hyper_log_prior(k, mu2, ls2) - target_.hyper_log_prior(k, mu, ls);
    for (std::size_t g = 0; g < cand_groups_.size(); ++g) {
      auto& x = cand_groups_[g];
      x[k] = mu2 + stretch * (x[k] - mu);
      target_.normalize(x);
      cand_lik_[g] = likelihood(g, x);
      ratio += cand_lik_[g] - lik_[g];
    }
    const bool ok = accept(ratio);
    if (ok) {
      state_.groups.swap(cand_groups_);
      lik_.swap(cand_lik_);
      state_.hyper.mu[k] = mu2;
      state_.hyper.log_sigma[k] = ls2;
    }
    hyper_nc_[j].record(ok);
  }

  // Shifts every group and the hyper means by a common step, leaving each
  // group's deviation from its mean unchanged. Only the likelihood and the
  // hyperprior on the means change.
  void translate_move(std::vector<double>& step) {
    auto& prop = translate_.front();
    prop.draw(rng_, step);
    cand_groups_ = state_.groups;
    cand_lik_.resize(lik_.size());
    HyperCoords h = state_.hyper;
    double ratio = 0.0;
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      const std::size_t k = comps_[j];
      ratio -= target_.hyper_log_prior(k, h.mu[k], h.log_sigma[k]);
      h.mu[k] += step[j];
      ratio += target_.hyper_log_prior(k, h.mu[k], h.log_sigma[k]);
    }
    for (std::size_t g = 0; g < cand_groups_.size(); ++g) {
      auto& x = cand_groups_[g];
      for (std::size_t j = 0; j < comps_.size(); ++j) x[comps_[j]] += step[j];
      target_.normalize(x);
      cand_lik_[g] = likelihood(g, x);
      ratio += cand_lik_[g] - lik_[g];
    }
    const bool ok = accept(ratio);
    if (ok) {
      state_.groups.swap(cand_groups_);
      lik_.swap(cand_lik_);
      state_.hyper = h;
    }
    prop.record(ok);
  }

  void freeze_all() {
    for (auto* blocks : {&group_rw_, &group_scaled_, &hyper_rw_, &hyper_nc_, &translate_})
      for (auto& p : *blocks) p.freeze();
  }

  void end_window_all() {
    for (auto* blocks : {&group_rw_, &group_scaled_, &hyper_rw_, &hyper_nc_, &translate_})
      for (auto& p : *blocks) p.end_window(config_.target_accept);
  }

  void collect_acceptance(ChainResult& out) const {
    static constexpr const char* kComp[3] = {"a", "b", "c"};
    for (std::size_t g = 0; g < group_rw_.size(); ++g) {
      out.acceptance.push_back({"group" + std::to_string(g), chain_, group_rw_[g].acceptance_rate()});
      if (target_.hierarchical())
        out.acceptance.push_back(
            {"group" + std::to_string(g) + "_scaled", chain_, group_scaled_[g].acceptance_rate()});
    }
    if (target_.hierarchical()) {
      for (std::size_t j = 0; j < comps_.size(); ++j) {
        out.acceptance.push_back({std::string("hyper_") + kComp[comps_[j]], chain_, hyper_rw_[j].acceptance_rate()});
        out.acceptance.push_back(
            {std::string("hyper_") + kComp[comps_[j]] + "_noncentered", chain_, hyper_nc_[j].acceptance_rate()});
      }
      out.acceptance.push_back({"translate", chain_, translate_.front().acceptance_rate()});
    }
    // The primary random-walk blocks must keep moving after adaptation.
    if (config_.samples_per_chain >= 100) {
      for (const auto& p : group_rw_)
        if (p.acceptance_rate() < 0.01)
          throw DivergedChain("chain " + std::to_string(chain_) + ": group block acceptance below 1%");
      for (const auto& p : hyper_rw_)
        if (target_.hierarchical() && p.acceptance_rate() < 0.01)
          throw DivergedChain("chain " + std::to_string(chain_) + ": hyper block acceptance below 1%");
    }
  }

  const CalibrationTarget& target_;
  const SamplerConfig& config_;
  std::size_t chain_;
  Rng rng_;
  const std::vector<std::size_t>& comps_;
  ChainState state_;
  std::vector<double> lik_;
  std::vector<GroupCoords> cand_groups_;
  std::vector<double> cand_lik_;
  std::vector<AdaptiveProposal> group_rw_, group_scaled_, hyper_rw_, hyper_nc_, translate_;
};

}  // namespace

CalibrationPosterior sample_posterior(const Dataset& labeled, const PriorConfig& prior,
                                      const SamplerConfig& config) {
  config.validate();
  prior.validate();
  if (labeled.group_count() == 0) throw EmptyDataset("no groups declared");
  if (labeled.labeled_count() == 0 && !config.prior_only)
    throw EmptyDataset("no labeled examples; request prior-only sampling explicitly");

  const CalibrationTarget target(labeled, prior, !config.prior_only);
  std::vector<ChainResult> results(config.chains);
  parallel_for(config.chains, [&](std::size_t c) { results[c] = ChainRunner(target, config, c).run(); });

  CalibrationPosterior post;
  post.chains = config.chains;
  post.samples_per_chain = config.samples_per_chain;
  post.group_names = labeled.group_names();
  post.coordinate_names = target.coordinate_names(labeled.group_names());
  post.draws.reserve(config.total_draws());
  for (std::size_t c = 0; c < config.chains; ++c) {
    for (std::size_t i = 0; i < results[c].coords.size(); ++i) {
      const ChainState s = target.unpack(results[c].coords[i]);
      PosteriorDraw d;
      d.groups.reserve(s.groups.size());
      for (const auto& x : s.groups) d.groups.push_back(x.natural());
      d.hyper = target.effective_hyper(s.hyper).natural();
      if (prior.family == CalibrationFamily::LLO) {
        d.hyper.mu_b = d.hyper.mu_a;
        d.hyper.sigma_b = d.hyper.sigma_a;
      }
      post.draws.push_back(std::move(d));
      post.chain_index.push_back(static_cast<std::uint32_t>(c));
      post.iteration.push_back(static_cast<std::uint32_t>(i));
      post.coordinates.push_back(std::move(results[c].coords[i]));
    }
    for (auto& a : results[c].acceptance) post.diagnostics.acceptance.push_back(std::move(a));
  }
  if (config.samples_per_chain >= 4) post.diagnostics.rhat = gelman_rubin(post);
  return post;
}

std::map<std::string, double> gelman_rubin(const CalibrationPosterior& posterior) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < posterior.coordinate_names.size(); ++i)
    out[posterior.coordinate_names[i]] = split_rhat(posterior.traces(i));
  return out;
}

void write_draws_csv(std::ostream& out, const CalibrationPosterior& posterior) {
  out << "chain,iteration";
  for (const auto& g : posterior.group_names) out << ",a[" << g << "],b[" << g << "],c[" << g << "]";
  out << ",mu_a,mu_b,mu_c,sigma_a,sigma_b,sigma_c\n";
  for (std::size_t i = 0; i < posterior.draws.size(); ++i) {
    const auto& d = posterior.draws[i];
    out << posterior.chain_index[i] << ',' << posterior.iteration[i];
    for (const auto& p : d.groups)
      out << ',' << format_double(p.a) << ',' << format_double(p.b) << ',' << format_double(p.c);
    const auto& h = d.hyper;
    for (double v : {h.mu_a, h.mu_b, h.mu_c, h.sigma_a, h.sigma_b, h.sigma_c}) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_draws_csv(const std::filesystem::path& path, const CalibrationPosterior& posterior) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_draws_csv(out, posterior);
}

}  // namespace fairbayes
