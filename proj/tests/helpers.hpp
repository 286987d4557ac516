#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairbayes/data.hpp"
#include "fairbayes/random.hpp"

namespace fbtest {

using fairbayes::Dataset;
using fairbayes::GroupId;
using fairbayes::ScoredExample;

inline ScoredExample ex(double score, std::uint32_t group, std::optional<int> label) {
  ScoredExample e;
  e.score = score;
  e.group = GroupId{group};
  if (label) e.label = static_cast<std::uint8_t>(*label);
  return e;
}

inline Dataset two_groups(std::vector<ScoredExample> rows) { return Dataset(std::move(rows), {"g0", "g1"}); }

// Random small dataset over two groups; every row labeled.
inline Dataset random_labeled(fairbayes::Rng& rng, std::size_t n) {
  std::vector<ScoredExample> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = fairbayes::clamp_score(fairbayes::uniform01(rng));
    const auto g = static_cast<std::uint32_t>(fairbayes::uniform01(rng) < 0.5);
    rows.push_back(ex(s, g, fairbayes::uniform01(rng) < s ? 1 : 0));
  }
  return two_groups(std::move(rows));
}

}  // namespace fbtest
