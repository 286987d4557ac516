#include "fairbayes/simulate.hpp"

#include <cmath>
#include <set>

#include <boost/math/special_functions/beta.hpp>

#include "fairbayes/error.hpp"
#include "fairbayes/random.hpp"

namespace fairbayes {

std::string_view to_string(ScoreFamily f) noexcept { return f == ScoreFamily::Beta ? "beta" : "rates"; }

ScoreFamily parse_score_family(std::string_view text) {
  if (text == "beta") return ScoreFamily::Beta;
  if (text == "rates") return ScoreFamily::Rates;
  throw InvalidSpec("unknown score family '" + std::string(text) + "'");
}

std::string_view to_string(Distortion d) noexcept {
  switch (d) {
    case Distortion::None: return "none";
    case Distortion::Beta: return "beta";
    case Distortion::PiecewiseLinear: return "pwl";
  }
  return "?";
}

Distortion parse_distortion(std::string_view text) {
  if (text == "none") return Distortion::None;
  if (text == "beta") return Distortion::Beta;
  if (text == "pwl") return Distortion::PiecewiseLinear;
  throw InvalidSpec("unknown distortion '" + std::string(text) + "'");
}

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// Linear interpolation through (0,0), pts..., (1,1); `flip` swaps the axes.
double interpolate(const std::vector<std::pair<double, double>>& knots, double x, bool flip) {
  double x0 = 0.0, y0 = 0.0;
  for (std::size_t i = 0; i <= knots.size(); ++i) {
    double x1 = 1.0, y1 = 1.0;
    if (i < knots.size()) {
      x1 = flip ? knots[i].second : knots[i].first;
      y1 = flip ? knots[i].first : knots[i].second;
    }
    if (x <= x1) return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    x0 = x1;
    y0 = y1;
  }
  return 1.0;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (groups.empty()) throw InvalidSpec("spec declares no groups");
  if (population == 0) throw InvalidSpec("population size must be positive");
  double total = 0.0;
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (g.name.empty()) throw InvalidSpec("group names must be non-empty");
    if (!names.insert(g.name).second) throw InvalidSpec("duplicate group name '" + g.name + "'");
    if (!in_unit(g.proportion)) throw InvalidSpec("group proportion outside [0,1]");
    if (!in_unit(g.positive_rate)) throw InvalidSpec("positive rate outside [0,1]");
    if (!in_unit(g.tpr) || !in_unit(g.fpr)) throw InvalidSpec("TPR/FPR outside [0,1]");
    if (family == ScoreFamily::Beta) {
      if (!(g.positive_rate > 0.0 && g.positive_rate < 1.0))
        throw InvalidSpec("beta score family needs a positive rate strictly inside (0,1)");
      if (!(g.concentration > 0.0 && std::isfinite(g.concentration)))
        throw InvalidSpec("concentration must be positive");
    }
    if (!(g.calibration.a > 0.0 && g.calibration.b > 0.0 && std::isfinite(g.calibration.c)))
      throw InvalidSpec("calibration params need a, b > 0 and finite c");
    if (distortion == Distortion::PiecewiseLinear) {
      double px = 0.0, py = 0.0;
      for (const auto& [x, y] : g.knots) {
        if (!(x > px && y > py && x < 1.0 && y < 1.0))
          throw InvalidSpec("piecewise-linear knots must increase strictly inside (0,1)");
        px = x;
        py = y;
      }
    }
    total += g.proportion;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidSpec("group proportions must sum to 1");
}

std::vector<std::string> SyntheticSpec::group_names() const {
  std::vector<std::string> out;
  for (const auto& g : groups) out.push_back(g.name);
  return out;
}

double invert_calibration(double target, const CalibrationParams& params) {
  if (target <= 0.0) return 0.0;
  if (target >= 1.0) return 1.0;
  double lo = -60.0, hi = 60.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double s = sigmoid(mid);
    if (calibrate(s, params) < target)
      lo = mid;
    else
      hi = mid;
  }
  return sigmoid(0.5 * (lo + hi));
}

double reported_score(const SyntheticSpec& spec, std::size_t g, double honest) {
  const auto& gs = spec.groups.at(g);
  switch (spec.distortion) {
    case Distortion::None: return honest;
    case Distortion::Beta: return invert_calibration(honest, gs.calibration);
    case Distortion::PiecewiseLinear: return interpolate(gs.knots, honest, true);
  }
  return honest;
}

double true_calibration(const SyntheticSpec& spec, std::size_t g, double s) {
  const auto& gs = spec.groups.at(g);
  if (spec.family == ScoreFamily::Rates) {
    const double pi = gs.positive_rate;
    const double num = predicts_positive(s) ? pi * gs.tpr : pi * (1.0 - gs.tpr);
    const double den = num + (predicts_positive(s) ? (1.0 - pi) * gs.fpr : (1.0 - pi) * (1.0 - gs.fpr));
    return den > 0.0 ? num / den : pi;
  }
  switch (spec.distortion) {
    case Distortion::None: return s;
    case Distortion::Beta: return calibrate(s, gs.calibration);
    case Distortion::PiecewiseLinear: return interpolate(gs.knots, s, false);
  }
  return s;
}

ClassRates population_rates(const SyntheticSpec& spec, std::size_t g) {
  const auto& gs = spec.groups.at(g);
  ClassRates r;
  if (spec.family == ScoreFamily::Rates) {
    r.tpr = gs.tpr;
    r.fpr = gs.fpr;
  } else {
    // yhat = 1 iff the honest probability clears the true calibration of s = 0.5.
    const double t = true_calibration(spec, g, 0.5);
    const double a = gs.positive_rate * gs.concentration;
    const double b = (1.0 - gs.positive_rate) * gs.concentration;
    r.tpr = boost::math::ibetac(a + 1.0, b, t);
    r.fpr = boost::math::ibetac(a, b + 1.0, t);
  }
  r.accuracy = gs.positive_rate * r.tpr + (1.0 - gs.positive_rate) * (1.0 - r.fpr);
  return r;
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, {0x9e4e7a7e});
  std::vector<ScoredExample> out;
  out.reserve(spec.population);
  for (std::size_t i = 0; i < spec.population; ++i) {
    std::size_t g = 0;
    const double u = uniform01(rng);
    double cum = 0.0;
    for (; g + 1 < spec.groups.size(); ++g) {
      cum += spec.groups[g].proportion;
      if (u < cum) break;
    }
    const auto& gs = spec.groups[g];
    const bool y = uniform01(rng) < gs.positive_rate;
    double score = 0.0;
    if (spec.family == ScoreFamily::Rates) {
      const bool yhat = uniform01(rng) < (y ? gs.tpr : gs.fpr);
      score = 0.5 * uniform01(rng) + (yhat ? 0.5 : 0.0);
    } else {
      const double a = gs.positive_rate * gs.concentration;
      const double b = (1.0 - gs.positive_rate) * gs.concentration;
      const double honest = sample_beta(rng, a + (y ? 1.0 : 0.0), b + (y ? 0.0 : 1.0));
      score = reported_score(spec, g, honest);
    }
    out.push_back({clamp_score(score), GroupId{static_cast<std::uint32_t>(g)}, static_cast<std::uint8_t>(y)});
  }
  return Dataset(std::move(out), spec.group_names());
}

}  // namespace fairbayes
