#include "fairbayes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairbayes/error.hpp"

namespace fairbayes {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // n - 1 denominator
};

Moments moments(std::span<const double> x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  return m;
}

// Pooled within-chain variance W and the (n-1)/n W + B/n estimate.
std::pair<double, double> variance_components(std::span<const std::span<const double>> parts) {
  const std::size_t m = parts.size();
  const double n = static_cast<double>(parts.front().size());
  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto mo = moments(parts[j]);
    means[j] = mo.mean;
    w += mo.var;
  }
  w /= static_cast<double>(m);
  const auto between = moments(means);
  const double b_over_n = m > 1 ? between.var : 0.0;
  return {w, (n - 1.0) / n * w + b_over_n};
}

}  // namespace

double split_rhat(std::span<const std::vector<double>> chains) {
  if (chains.empty()) throw TooFewChains("no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw Error("chains must have equal length");
  const std::size_t half = n / 2;
  if (half < 2) throw TooFewChains("each chain needs at least 4 draws to split");

  std::vector<std::span<const double>> parts;
  for (const auto& c : chains) {
    // Odd lengths drop the middle draw.
    parts.emplace_back(c.data(), half);
    parts.emplace_back(c.data() + (n - half), half);
  }
  if (parts.size() < 2) throw TooFewChains("need at least two split half-chains");
  const auto [w, var_plus] = variance_components(parts);
  if (w <= 0.0) return var_plus <= 0.0 ? 1.0 : INFINITY;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(std::span<const std::vector<double>> chains) {
  if (chains.empty()) return 0.0;
  const std::size_t n = chains.front().size();
  const std::size_t m = chains.size();
  if (n < 4) return static_cast<double>(n * m);
  std::vector<std::span<const double>> parts(chains.begin(), chains.end());
  const auto [w, var_plus] = variance_components(parts);
  if (var_plus <= 0.0) return static_cast<double>(n * m);

  std::vector<double> chain_mean(m);
  for (std::size_t j = 0; j < m; ++j) chain_mean[j] = moments(chains[j]).mean;
  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& c = chains[j];
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += (c[i] - chain_mean[j]) * (c[i + lag] - chain_mean[j]);
      acov += s / static_cast<double>(n);
    }
    acov /= static_cast<double>(m);
    // lag-0 acov uses 1/n, W uses 1/(n-1); rescale W to match.
    return 1.0 - (w * (n - 1.0) / n - acov) / var_plus;
  };

  double tau = -1.0;
  double prev_pair = INFINITY;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n * m)));
  return static_cast<double>(n * m) / tau;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw Error("KS statistic of empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("KS statistic of empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(double n, double level) {
  return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(n);
}

double ks_two_sample_critical_value(double n, double m, double level) {
  return std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((n + m) / (n * m));
}

}  // namespace fairbayes
