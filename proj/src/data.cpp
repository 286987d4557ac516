#include "fairbayes/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "fairbayes/error.hpp"
#include "fairbayes/random.hpp"

namespace fairbayes {

double clamp_score(double s) noexcept { return std::clamp(s, kScoreFloor, kScoreCeil); }

std::string_view to_string(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::Accuracy: return "accuracy";
    case MetricKind::TPR: return "tpr";
    case MetricKind::FPR: return "fpr";
  }
  return "?";
}

MetricKind parse_metric(std::string_view text) {
  if (text == "accuracy" || text == "acc") return MetricKind::Accuracy;
  if (text == "tpr") return MetricKind::TPR;
  if (text == "fpr") return MetricKind::FPR;
  throw InvalidConfig("unknown metric '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<ScoredExample> examples, std::vector<std::string> group_names)
    : examples_(std::move(examples)), group_names_(std::move(group_names)) {
  for (const auto& ex : examples_) {
    if (ex.group.index >= group_names_.size())
      throw UnknownGroupLabel("group id " + std::to_string(ex.group.index) + " is not declared");
    if (!(ex.score >= 0.0 && ex.score <= 1.0)) throw Error("score outside [0,1]");
    if (ex.label && *ex.label > 1) throw Error("label must be 0 or 1");
    if (ex.label) ++n_labeled_;
  }
}

std::vector<std::size_t> Dataset::group_sizes() const {
  std::vector<std::size_t> sizes(group_names_.size(), 0);
  for (const auto& ex : examples_) ++sizes[ex.group.index];
  return sizes;
}

GroupId Dataset::group_id(std::string_view name) const {
  auto it = std::find(group_names_.begin(), group_names_.end(), name);
  if (it == group_names_.end()) throw UnknownGroupLabel("unknown group '" + std::string(name) + "'");
  return GroupId{static_cast<std::uint32_t>(it - group_names_.begin())};
}

GroupPair Dataset::pair(std::string_view unprivileged, std::string_view privileged) const {
  GroupPair p{group_id(unprivileged), group_id(privileged)};
  if (p.unprivileged == p.privileged) throw InvalidConfig("group pair must name two different groups");
  return p;
}

Dataset Dataset::labeled() const {
  std::vector<ScoredExample> out;
  out.reserve(n_labeled_);
  std::copy_if(examples_.begin(), examples_.end(), std::back_inserter(out),
               [](const ScoredExample& e) { return e.labeled(); });
  return Dataset(std::move(out), group_names_);
}

Dataset Dataset::unlabeled() const {
  std::vector<ScoredExample> out;
  out.reserve(unlabeled_count());
  std::copy_if(examples_.begin(), examples_.end(), std::back_inserter(out),
               [](const ScoredExample& e) { return !e.labeled(); });
  return Dataset(std::move(out), group_names_);
}

Dataset Dataset::masked() const {
  auto out = examples_;
  for (auto& e : out) e.label.reset();
  return Dataset(std::move(out), group_names_);
}

namespace {

constexpr std::uint64_t kSplitStream = 0x5b1175ULL;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC-4180 style field split for a single physical line.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw MalformedRow(line_no, "unterminated quote");
  fields.push_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw EmptyDataset("missing header row");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line, line_no);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto score_col = column(schema.score_column);
  const auto group_col = column(schema.group_column);
  const auto label_col = column(schema.label_column);
  if (!score_col) throw MalformedRow(1, "missing score column '" + schema.score_column + "'");
  if (!group_col) throw MalformedRow(1, "missing group column '" + schema.group_column + "'");

  std::vector<std::string> names = schema.groups;
  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::uint32_t i = 0; i < names.size(); ++i) ids.emplace(names[i], i);
  const bool fixed_groups = !names.empty();

  std::vector<ScoredExample> examples;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    const auto need = std::max(*score_col, *group_col);
    if (fields.size() <= need) throw MalformedRow(line_no, "too few fields");

    const auto score = parse_real(fields[*score_col]);
    if (!score) throw MalformedRow(line_no, "missing or non-numeric score");
    if (!(*score >= 0.0 && *score <= 1.0)) throw MalformedRow(line_no, "score outside [0,1]");

    const std::string& gname = fields[*group_col];
    if (gname.empty()) throw MalformedRow(line_no, "missing group");
    auto it = ids.find(gname);
    if (it == ids.end()) {
      if (fixed_groups)
        throw UnknownGroupLabel("line " + std::to_string(line_no) + ": unknown group '" + gname + "'");
      it = ids.emplace(gname, static_cast<std::uint32_t>(names.size())).first;
      names.push_back(gname);
    }

    ScoredExample ex;
    ex.score = clamp_score(*score);
    ex.group = GroupId{it->second};
    if (label_col && *label_col < fields.size()) {
      const auto text = trim(fields[*label_col]);
      if (text == "0") {
        ex.label = 0;
      } else if (text == "1") {
        ex.label = 1;
      } else if (!text.empty()) {
        throw MalformedRow(line_no, "label must be 0, 1 or empty");
      }
    }
    examples.push_back(ex);
  }
  if (examples.empty()) throw EmptyDataset("no data rows");

  Dataset out(std::move(examples), std::move(names));
  const auto sizes = out.group_sizes();
  for (std::size_t g = 0; g < sizes.size(); ++g)
    if (sizes[g] == 0) throw EmptyDataset("declared group '" + out.group_names()[g] + "' has no rows");
  return out;
}

Dataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in, schema);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& data, const CsvSchema& schema) {
  out << schema.score_column << ',' << schema.group_column << ',' << schema.label_column << '\n';
  for (const auto& ex : data.examples()) {
    out << format_double(ex.score) << ',' << quote_if_needed(data.group_name(ex.group)) << ',';
    if (ex.label) out << static_cast<int>(*ex.label);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, data, schema);
}

Split split_labeled(const Dataset& data, std::size_t n, std::uint64_t seed) {
  if (data.unlabeled_count() != 0) throw Error("split_labeled requires a fully labeled dataset");
  if (n == 0) throw NTooLarge("labeled sample size must be at least 1");
  if (n > data.size())
    throw NTooLarge("requested " + std::to_string(n) + " labeled examples from " +
                    std::to_string(data.size()));

  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, {kSplitStream});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<char> chosen(data.size(), 0);
  for (std::size_t i = 0; i < n; ++i) chosen[idx[i]] = 1;

  std::vector<ScoredExample> lab, unl;
  lab.reserve(n);
  unl.reserve(data.size() - n);
  const auto& ex = data.examples();
  for (std::size_t i = 0; i < ex.size(); ++i) {
    if (chosen[i]) {
      lab.push_back(ex[i]);
    } else {
      unl.push_back(ex[i]);
      unl.back().label.reset();
    }
  }
  return {Dataset(std::move(lab), data.group_names()), Dataset(std::move(unl), data.group_names())};
}

}  // namespace fairbayes
