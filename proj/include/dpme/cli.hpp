#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dpme/entropy.hpp"
#include "dpme/markov_chain.hpp"
#include "dpme/weights.hpp"

namespace dpme {

inline constexpr const char* kVersion = "0.1.0";

/// Validated key/value configuration for one command. Every key the command
/// accepts has a schema entry; keys without a default are required.
class RunConfig {
 public:
  /// `text` holds `key = value` lines ('#' starts a comment); `overrides` are
  /// `key=value` strings applied on top. Unknown or duplicate keys and missing
  /// required keys raise ConfigError.
  static RunConfig parse(const std::string& command, const std::string& text,
                         const std::vector<std::string>& overrides = {});

  const std::string& command() const noexcept { return command_; }
  /// Resolved (key, value) pairs in schema order, defaults included.
  const std::vector<std::pair<std::string, std::string>>& resolved() const noexcept {
    return values_;
  }

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> values_;
};

std::vector<std::string> command_names();

/// Usage text listing commands and their keys.
std::string usage();

double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

/// `two-point:p,q`, `cycle:N,q`, `torus:N,d`, inline JSON rate matrix
/// `[[...],...]`, or `file:<path>` holding {"n": .., "Q": [[..]], "pi": [..]}.
MarkovChain parse_chain(const std::string& spec);

/// `heat`, `renyi:<m>`, `hilbertian:identity`, `hilbertian:power:<m>`.
EntropyPair parse_entropy(const std::string& spec);

/// `log`, `power:<m>`, `harmonic`, `one`, `pair` (quotient of the entropy
/// pair) or `matched` (closed form matching the entropy pair).
WeightFunction parse_weight(const std::string& spec, const std::optional<EntropyPair>& pair);

/// `uniform` or a comma-separated list of values with unit pi-mass.
Density parse_density(const MarkovChain& chain, const std::string& spec);

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_number(double v);

/// Runs the command and writes the '#' header block followed by CSV.
void run_command(const RunConfig& config, std::ostream& out);

}  // namespace dpme
