#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairbayes/config.hpp"
#include "fairbayes/data.hpp"
#include "fairbayes/error.hpp"
#include "fairbayes/experiments.hpp"
#include "fairbayes/report.hpp"
#include "fairbayes/simulate.hpp"

using namespace fairbayes;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

KeyValueConfig load_config(const Common& c) {
  KeyValueConfig cfg;
  if (!c.config.empty()) cfg = KeyValueConfig::load(c.config);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  check_known_keys(cfg);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

template <class Writer>
std::string capture(Writer&& w) {
  std::ostringstream s;
  w(s);
  return s.str();
}

// PREFIX.csv and PREFIX.json, or the CSV on stdout without a prefix.
void emit(const std::string& prefix, const std::string& csv, const std::string& json) {
  if (prefix.empty()) {
    std::cout << csv;
    return;
  }
  write_text(prefix + ".csv", csv);
  write_text(prefix + ".json", json);
}

Dataset population_for(const KeyValueConfig& cfg, const std::string& data_path) {
  if (!data_path.empty()) return ingest_csv(data_path);
  return generate(spec_from_config(cfg));
}

GroupPair pair_from(const Dataset& data, const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw InvalidConfig("pair must be two group names: UNPRIVILEGED,PRIVILEGED");
  return data.pair(parts[0], parts[1]);
}

GroupPair default_pair(const Dataset& data, const KeyValueConfig& cfg) {
  if (auto p = cfg.get("experiment.pair")) return pair_from(data, *p);
  if (data.group_count() < 2) throw InvalidConfig("experiments need two groups");
  return {GroupId{1}, GroupId{0}};
}

ExperimentSettings settings_from(const KeyValueConfig& cfg, const Dataset& population, std::size_t default_runs) {
  ExperimentSettings s;
  s.pair = default_pair(population, cfg);
  s.runs = cfg.get_size("experiment.runs", default_runs);
  s.seed = cfg.get_u64("seed", 0);
  s.prior = prior_from_config(cfg);
  s.sampler = sampler_from_config(cfg);
  s.bb_prior = bb_prior_from_config(cfg);
  s.bb_draws = cfg.get_size("bb.draws", s.bb_draws);
  if (cfg.has("experiment.methods")) {
    s.methods.clear();
    for (const auto& m : cfg.get_list("experiment.methods")) s.methods.push_back(parse_method(m));
  }
  if (cfg.has("experiment.metrics")) {
    s.metrics.clear();
    for (const auto& m : cfg.get_list("experiment.metrics")) s.metrics.push_back(parse_metric(m));
  }
  return s;
}

std::vector<std::size_t> labeled_sizes(const KeyValueConfig& cfg) {
  auto sizes = cfg.get_sizes("experiment.n_labeled");
  if (sizes.empty()) sizes = {10};
  return sizes;
}

int run_simulate(const Common& c, std::optional<std::size_t> labeled) {
  const auto cfg = load_config(c);
  Dataset data = generate(spec_from_config(cfg));
  if (labeled) {
    const auto split = split_labeled(data, *labeled, derive_seed(cfg.get_u64("seed", 0), {0x5117}));
    auto rows = split.labeled.examples();
    rows.insert(rows.end(), split.unlabeled.examples().begin(), split.unlabeled.examples().end());
    data = Dataset(std::move(rows), data.group_names());
  }
  if (c.out.empty())
    write_csv(std::cout, data);
  else
    write_csv(std::filesystem::path(c.out), data);
  return 0;
}

struct AssessArgs {
  std::string data;
  std::string metric = "accuracy";
  std::string method = "bc";
  std::string pair;
  std::optional<double> epsilon;
  std::string format = "json";
  std::string draws_out;
  CsvSchema schema;
  std::string groups;
};

int run_assess(const Common& c, AssessArgs a) {
  const auto cfg = load_config(c);
  if (!a.groups.empty()) a.schema.groups = split_list(a.groups);
  const Dataset data = ingest_csv(a.data, a.schema);

  AssessOptions opt;
  opt.metric = parse_metric(a.metric);
  opt.method = parse_method(a.method);
  opt.pair = a.pair.empty() ? default_pair(data, cfg) : pair_from(data, a.pair);
  opt.epsilon = a.epsilon.value_or(cfg.get_double("epsilon", kDefaultEpsilon));
  opt.seed = cfg.get_u64("seed", 0);
  opt.prior = prior_from_config(cfg);
  opt.sampler = sampler_from_config(cfg);
  opt.bb_prior = bb_prior_from_config(cfg);
  opt.bb_draws = cfg.get_size("bb.draws", opt.bb_draws);

  CalibrationPosterior posterior;
  const auto report = assess(data, opt, a.draws_out.empty() ? nullptr : &posterior);
  if (!a.draws_out.empty()) {
    if (!is_calibration_method(opt.method)) throw InvalidConfig("--draws-out needs a calibration method");
    write_draws_csv(std::filesystem::path(a.draws_out), posterior);
  }

  std::string text;
  if (a.format == "json")
    text = to_json(report);
  else if (a.format == "csv")
    text = csv_header() + "\n" + to_csv_row(report) + "\n";
  else
    throw InvalidConfig("format must be json or csv");
  if (c.out.empty())
    std::cout << text;
  else
    write_text(c.out, text);
  if (report.flagged) std::cerr << "warning: more than 10% of posterior draws were skipped\n";
  return 0;
}

enum class ExperimentKind { Mae, Coverage, Ablation };

int run_experiment_cmd(const Common& c, const std::string& data_path, const std::string& plot, ExperimentKind kind) {
  const auto cfg = load_config(c);
  const Dataset population = population_for(cfg, data_path);
  ExperimentSettings base = settings_from(cfg, population, kind == ExperimentKind::Coverage ? 1000 : 100);
  if (kind == ExperimentKind::Coverage) std::erase(base.methods, Method::Freq);
  if (kind == ExperimentKind::Ablation && !cfg.has("experiment.methods"))
    base.methods = {Method::BB, Method::NHBC, Method::BC};

  std::vector<ExperimentResult> all;
  for (std::size_t n : labeled_sizes(cfg)) {
    ExperimentSettings s = base;
    s.n_labeled = n;
    for (auto& r : run_experiment(population, s)) all.push_back(std::move(r));
  }
  emit(c.out, capture([&](std::ostream& o) { write_results_csv(o, all); }), results_json(all));
  if (!plot.empty()) write_text(plot, capture([&](std::ostream& o) { write_plot_csv(o, all); }));
  return 0;
}

int run_sensitivity(const Common& c, const std::string& data_path) {
  const auto cfg = load_config(c);
  const Dataset population = population_for(cfg, data_path);
  const ExperimentSettings base = settings_from(cfg, population, 100);
  auto alphas = cfg.get_doubles("experiment.alphas");
  if (alphas.empty()) alphas = {0.1, 0.5, 1.0, 2.0, 10.0};
  std::vector<SensitivityResult> all;
  for (MetricKind metric : base.metrics) {
    for (std::size_t n : labeled_sizes(cfg)) {
      ExperimentSettings s = base;
      s.n_labeled = n;
      all.push_back(sensitivity_sweep(population, metric, alphas, s));
    }
  }
  emit(c.out, capture([&](std::ostream& o) { write_sensitivity_csv(o, all); }), sensitivity_json(all));
  return 0;
}

int run_required_n(const Common& c) {
  const auto cfg = load_config(c);
  const SyntheticSpec spec = spec_from_config(cfg);
  RequiredNSettings s;
  s.seed = cfg.get_u64("seed", 0);
  s.sims = cfg.get_size("experiment.sims", s.sims);
  s.confidence = cfg.get_double("experiment.confidence", s.confidence);
  if (cfg.has("experiment.metrics")) {
    const auto m = cfg.get_list("experiment.metrics");
    if (m.size() != 1) throw InvalidConfig("required-n takes a single metric");
    s.metric = parse_metric(m[0]);
  }
  if (auto grid = cfg.get_sizes("experiment.n_grid"); !grid.empty()) s.n_grid = grid;
  if (auto iv = cfg.get_doubles("experiment.interval"); !iv.empty()) {
    if (iv.size() != 2) throw InvalidConfig("'experiment.interval' needs two values");
    s.low = iv[0];
    s.high = iv[1];
  }
  const auto names = spec.group_names();
  if (auto p = cfg.get("experiment.pair")) {
    const auto parts = split_list(*p);
    if (parts.size() != 2) throw InvalidConfig("pair must be two group names");
    auto index = [&](const std::string& name) {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return GroupId{static_cast<std::uint32_t>(i)};
      throw UnknownGroupLabel("unknown group '" + name + "'");
    };
    s.pair = {index(parts[0]), index(parts[1])};
  } else {
    s.pair = {GroupId{0}, GroupId{1}};
  }
  const auto result = required_n_experiment(spec, s);
  emit(c.out, capture([&](std::ostream& o) { write_required_n_csv(o, result); }), required_n_json(result, s));
  return 0;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "key = value configuration file");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-fairness estimation from scored, partially labeled data"};
  app.require_subcommand(1);

  Common sim_c;
  std::optional<std::size_t> sim_labeled;
  auto* sim = app.add_subcommand("simulate", "write a synthetic population as CSV");
  add_common(sim, sim_c, true);
  sim->add_option("--out", sim_c.out, "output CSV (stdout if omitted)");
  sim->add_option("--labeled", sim_labeled, "keep labels on a random subset of this size only");

  Common as_c;
  AssessArgs as_a;
  auto* as = app.add_subcommand("assess", "estimate a group difference with one method");
  add_common(as, as_c, false);
  as->add_option("data", as_a.data, "CSV with score, group and label columns")->required()->check(CLI::ExistingFile);
  as->add_option("--metric", as_a.metric, "accuracy | tpr | fpr");
  as->add_option("--method", as_a.method, "freq | bb | bc | nhbc | llo");
  as->add_option("--pair", as_a.pair, "UNPRIVILEGED,PRIVILEGED group names");
  as->add_option("--epsilon", as_a.epsilon, "practical-fairness tolerance");
  as->add_option("--format", as_a.format, "json | csv");
  as->add_option("--out", as_c.out, "output file (stdout if omitted)");
  as->add_option("--draws-out", as_a.draws_out, "write calibration posterior draws to this CSV");
  as->add_option("--score-col", as_a.schema.score_column, "score column name");
  as->add_option("--group-col", as_a.schema.group_column, "group column name");
  as->add_option("--label-col", as_a.schema.label_column, "label column name");
  as->add_option("--groups", as_a.groups, "comma-separated group names fixing the id order");

  struct ExpCmd {
    Common c;
    std::string data;
    std::string plot;
  };
  ExpCmd mae_x, cov_x, abl_x, sens_x;
  auto add_exp = [&](const char* name, const char* help, ExpCmd& x, bool plot) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, x.c, true);
    cmd->add_option("--data", x.data, "fully labeled population CSV instead of the config's synthetic spec")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", x.c.out, "output prefix for .csv and .json (CSV on stdout if omitted)");
    if (plot) cmd->add_option("--plot", x.plot, "long-format CSV: metric, n_L, method, MAE, stderr");
    return cmd;
  };
  auto* mae = add_exp("mae-experiment", "MAE of each method over repeated labeled subsamples", mae_x, true);
  auto* cov = add_exp("coverage-experiment", "95% interval coverage over repeated labeled subsamples", cov_x, true);
  auto* abl = add_exp("ablation", "BB, non-hierarchical BC and BC on identical splits", abl_x, true);
  auto* sens = add_exp("sensitivity", "BC MAE as the prior scales are multiplied by alpha", sens_x, false);

  Common rn_c;
  auto* rn = app.add_subcommand("required-n", "labeled sample size needed for a frequentist estimate");
  add_common(rn, rn_c, true);
  rn->add_option("--out", rn_c.out, "output prefix for .csv and .json (CSV on stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_c, sim_labeled);
    if (*as) return run_assess(as_c, as_a);
    if (*mae) return run_experiment_cmd(mae_x.c, mae_x.data, mae_x.plot, ExperimentKind::Mae);
    if (*cov) return run_experiment_cmd(cov_x.c, cov_x.data, cov_x.plot, ExperimentKind::Coverage);
    if (*abl) return run_experiment_cmd(abl_x.c, abl_x.data, abl_x.plot, ExperimentKind::Ablation);
    if (*sens) return run_sensitivity(sens_x.c, sens_x.data);
    if (*rn) return run_required_n(rn_c);
  } catch (const MalformedRow& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
