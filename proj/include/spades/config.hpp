#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spades/experiments.hpp"

namespace spades {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value configuration ('#' starts a comment, keys are dotted,
/// list values are comma- or space-separated).
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<long> get_longs(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Builds the dictionary described under the "dictionary." keys. Gaussian
/// dictionaries take explicit means or a (spacing, count) generator; Haar
/// dictionaries take l_max (or derive it from sample_size) and an optional
/// atom_count cap.
Dictionary dictionary_from_config(const Config& config,
                                  std::optional<long> sample_size = std::nullopt);

SolverSettings solver_from_config(const Config& config);

StudyConfig study_from_config(const Config& config);

CircleConfig circle_from_config(const Config& config);

}  // namespace spades
