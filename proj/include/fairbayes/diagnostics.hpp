#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fairbayes {

/// Split-chain potential scale reduction. Each chain is cut in half, so one
/// chain of at least four draws is enough. Zero pooled variance reports 1.
double split_rhat(std::span<const std::vector<double>> chains);

/// Multi-chain effective sample size with Geyer's initial monotone sequence.
double effective_sample_size(std::span<const std::vector<double>> chains);

/// Sample quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// sup |F_n(x) - F(x)| of a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// sup |F_n(x) - G_m(x)| between two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value of the one-sample KS statistic at level `level`
/// for an effective sample size n: sqrt(-log(level/2)/2) / sqrt(n).
double ks_critical_value(double n, double level = 0.01);

/// Two-sample analogue with effective sizes n and m.
double ks_two_sample_critical_value(double n, double m, double level = 0.01);

}  // namespace fairbayes
