#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairbayes/beta_binomial.hpp"
#include "fairbayes/calibration.hpp"
#include "fairbayes/mcmc.hpp"
#include "fairbayes/simulate.hpp"

namespace fairbayes {

/// Flat `key = value` configuration. Blank lines and text after `#` are
/// ignored; list values are comma-separated. Unknown keys are rejected.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Throws InvalidConfig for any key the tool does not understand.
void check_known_keys(const KeyValueConfig& config);

SyntheticSpec spec_from_config(const KeyValueConfig& config);
PriorConfig prior_from_config(const KeyValueConfig& config);
SamplerConfig sampler_from_config(const KeyValueConfig& config);
BetaPrior bb_prior_from_config(const KeyValueConfig& config);

double parse_double(std::string_view text);
std::size_t parse_size(std::string_view text);
std::vector<std::string> split_list(std::string_view text);

}  // namespace fairbayes
