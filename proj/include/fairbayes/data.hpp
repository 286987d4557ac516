#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fairbayes {

/// Scores are clamped into [kScoreFloor, kScoreCeil] on ingestion so that
/// log(s) and log(1 - s) stay finite in the calibration density.
inline constexpr double kScoreFloor = 1e-6;
inline constexpr double kScoreCeil = 1.0 - 1e-6;

double clamp_score(double s) noexcept;

/// Dense group identifier; index into Dataset::group_names().
struct GroupId {
  std::uint32_t index = 0;
  friend auto operator<=>(const GroupId&, const GroupId&) = default;
};

/// Model prediction rule: class 1 iff the score is at least one half.
constexpr bool predicts_positive(double score) noexcept { return score >= 0.5; }

struct ScoredExample {
  double score = 0.5;
  GroupId group;
  std::optional<std::uint8_t> label;

  bool predicted() const noexcept { return predicts_positive(score); }
  bool labeled() const noexcept { return label.has_value(); }
  bool correct() const noexcept { return label && (*label == 1) == predicted(); }
};

enum class MetricKind { Accuracy, TPR, FPR };

std::string_view to_string(MetricKind m) noexcept;
MetricKind parse_metric(std::string_view text);

/// The two sides of a group difference: delta = theta[unprivileged] - theta[privileged].
struct GroupPair {
  GroupId unprivileged;
  GroupId privileged;

  GroupPair swapped() const noexcept { return {privileged, unprivileged}; }
};

/// Immutable collection of scored examples over a declared set of groups.
/// Labeled and unlabeled views are themselves Datasets sharing the group table.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ScoredExample> examples, std::vector<std::string> group_names);

  const std::vector<ScoredExample>& examples() const noexcept { return examples_; }
  const std::vector<std::string>& group_names() const noexcept { return group_names_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t group_count() const noexcept { return group_names_.size(); }
  std::size_t labeled_count() const noexcept { return n_labeled_; }
  std::size_t unlabeled_count() const noexcept { return examples_.size() - n_labeled_; }

  /// Per-group example counts, indexed by GroupId::index.
  std::vector<std::size_t> group_sizes() const;

  GroupId group_id(std::string_view name) const;
  const std::string& group_name(GroupId g) const { return group_names_.at(g.index); }
  GroupPair pair(std::string_view unprivileged, std::string_view privileged) const;

  Dataset labeled() const;
  Dataset unlabeled() const;
  /// Same examples with all labels removed.
  Dataset masked() const;

 private:
  std::vector<ScoredExample> examples_;
  std::vector<std::string> group_names_;
  std::size_t n_labeled_ = 0;
};

struct CsvSchema {
  std::string score_column = "score";
  std::string group_column = "group";
  std::string label_column = "label";
  /// When non-empty, fixes the group id order and rejects any other label.
  std::vector<std::string> groups;
};

Dataset read_csv(std::istream& in, const CsvSchema& schema = {});
Dataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

void write_csv(std::ostream& out, const Dataset& data, const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const Dataset& data, const CsvSchema& schema = {});

struct Split {
  Dataset labeled;
  Dataset unlabeled;
};

/// Uniform without-replacement sample of n examples that keep their labels;
/// the rest form the unlabeled pool with labels masked. Deterministic in seed.
Split split_labeled(const Dataset& data, std::size_t n, std::uint64_t seed);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

}  // namespace fairbayes
