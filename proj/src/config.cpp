#include "fairbayes/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include "fairbayes/error.hpp"

namespace fairbayes {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

const std::set<std::string, std::less<>> kKnownKeys = {
    // synthetic population
    "population", "seed", "groups", "proportions", "positive_rate", "concentration", "score_family", "tpr", "fpr",
    "distortion", "calib_a", "calib_b", "calib_c",
    // prior
    "prior.family", "prior.alpha", "prior.hierarchical", "prior.scales",
    // sampler
    "sampler.chains", "sampler.burn_in", "sampler.samples", "sampler.target_accept", "sampler.window",
    // beta-binomial
    "bb.prior", "bb.draws",
    // experiments
    "experiment.runs", "experiment.n_labeled", "experiment.metrics", "experiment.pair", "experiment.methods",
    "experiment.alphas", "experiment.sims", "experiment.n_grid", "experiment.interval", "experiment.confidence",
    "epsilon"};

constexpr std::string_view kKnotPrefix = "pwl_knots.";

}  // namespace

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidConfig("expected a number, got '" + t + "'");
  return v;
}

std::size_t parse_size(std::string_view text) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidConfig("expected a non-negative integer, got '" + t + "'");
  return v;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(source + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw InvalidConfig(source + ":" + std::to_string(number) + ": empty key");
    if (cfg.has(key)) throw InvalidConfig(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v) : fallback;
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
  auto v = get(key);
  return v ? parse_size(*v) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? static_cast<std::uint64_t>(parse_size(*v)) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw InvalidConfig("expected a boolean for '" + key + "', got '" + *v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  auto v = get(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(parse_double(item));
  return out;
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : get_list(key)) out.push_back(parse_size(item));
  return out;
}

void check_known_keys(const KeyValueConfig& config) {
  for (const auto& [key, value] : config.values()) {
    if (kKnownKeys.count(key) != 0) continue;
    if (key.starts_with(kKnotPrefix) && key.size() > kKnotPrefix.size()) continue;
    throw InvalidConfig("unknown config key '" + key + "'");
  }
}

namespace {

// A per-group list: one value broadcast to every group, or one per group.
std::vector<double> per_group(const KeyValueConfig& cfg, const std::string& key, std::size_t groups,
                              double fallback) {
  auto values = cfg.get_doubles(key);
  if (values.empty()) return std::vector<double>(groups, fallback);
  if (values.size() == 1) return std::vector<double>(groups, values[0]);
  if (values.size() != groups)
    throw InvalidConfig("'" + key + "' needs 1 or " + std::to_string(groups) + " values");
  return values;
}

}  // namespace

SyntheticSpec spec_from_config(const KeyValueConfig& cfg) {
  SyntheticSpec spec;
  const auto names = cfg.get_list("groups");
  if (names.empty()) throw InvalidConfig("config must list 'groups'");
  const std::size_t n = names.size();
  spec.population = cfg.get_size("population", spec.population);
  spec.seed = cfg.get_u64("seed", spec.seed);
  spec.family = parse_score_family(cfg.get_string("score_family", "beta"));
  spec.distortion = parse_distortion(cfg.get_string("distortion", "beta"));

  const auto prop = per_group(cfg, "proportions", n, 1.0 / static_cast<double>(n));
  const auto pos = per_group(cfg, "positive_rate", n, 0.2);
  const auto conc = per_group(cfg, "concentration", n, 2.0);
  const auto tpr = per_group(cfg, "tpr", n, 0.9);
  const auto fpr = per_group(cfg, "fpr", n, 0.1);
  const auto ca = per_group(cfg, "calib_a", n, 1.0);
  const auto cb = per_group(cfg, "calib_b", n, 1.0);
  const auto cc = per_group(cfg, "calib_c", n, 0.0);
  for (std::size_t g = 0; g < n; ++g) {
    GroupSpec gs;
    gs.name = names[g];
    gs.proportion = prop[g];
    gs.positive_rate = pos[g];
    gs.concentration = conc[g];
    gs.tpr = tpr[g];
    gs.fpr = fpr[g];
    gs.calibration = {ca[g], cb[g], cc[g]};
    for (const auto& item : cfg.get_list(std::string(kKnotPrefix) + names[g])) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw InvalidConfig("knot '" + item + "' must be score:probability");
      gs.knots.emplace_back(parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1)));
    }
    spec.groups.push_back(std::move(gs));
  }
  for (const auto& [key, value] : cfg.values()) {
    if (!key.starts_with(kKnotPrefix)) continue;
    const auto name = key.substr(kKnotPrefix.size());
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw InvalidConfig("knots given for undeclared group '" + name + "'");
  }
  spec.validate();
  return spec;
}

PriorConfig prior_from_config(const KeyValueConfig& cfg) {
  PriorConfig prior;
  prior.family = parse_family(cfg.get_string("prior.family", "beta"));
  prior.alpha = cfg.get_double("prior.alpha", prior.alpha);
  prior.hierarchical = cfg.get_bool("prior.hierarchical", prior.hierarchical);
  const auto scales = cfg.get_doubles("prior.scales");
  if (!scales.empty()) {
    if (scales.size() != prior.base_scales.size()) throw InvalidConfig("'prior.scales' needs 6 values");
    std::copy(scales.begin(), scales.end(), prior.base_scales.begin());
  }
  prior.validate();
  return prior;
}

SamplerConfig sampler_from_config(const KeyValueConfig& cfg) {
  SamplerConfig s;
  s.chains = cfg.get_size("sampler.chains", s.chains);
  s.burn_in = cfg.get_size("sampler.burn_in", s.burn_in);
  s.samples_per_chain = cfg.get_size("sampler.samples", s.samples_per_chain);
  s.target_accept = cfg.get_double("sampler.target_accept", s.target_accept);
  s.adapt_window = cfg.get_size("sampler.window", s.adapt_window);
  s.seed = cfg.get_u64("seed", s.seed);
  s.validate();
  return s;
}

BetaPrior bb_prior_from_config(const KeyValueConfig& cfg) {
  BetaPrior p;
  const auto v = cfg.get_doubles("bb.prior");
  if (!v.empty()) {
    if (v.size() != 2) throw InvalidConfig("'bb.prior' needs two values");
    p = {v[0], v[1]};
  }
  if (!(p.alpha > 0.0 && p.beta > 0.0)) throw InvalidPrior("beta prior parameters must be positive");
  return p;
}

}  // namespace fairbayes
