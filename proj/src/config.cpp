#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dpme/cli.hpp"
#include "dpme/convexity.hpp"
#include "dpme/torus.hpp"

namespace dpme {

namespace {

struct KeySpec {
  std::string name;
  std::optional<std::string> fallback;  // nullopt: required
  std::string help;
};

const std::map<std::string, std::vector<KeySpec>>& schemas() {
  static const std::map<std::string, std::vector<KeySpec>> table = {
      {"distance",
       {{"chain", std::nullopt, "chain spec"},
        {"weight", "log", "weight spec"},
        {"entropy", "heat", "entropy pair (only read for weight = pair | matched)"},
        {"rho0", std::nullopt, "start density"},
        {"rho1", std::nullopt, "end density"},
        {"steps", "32", "time intervals K"},
        {"max_iterations", "2000", "Newton iteration cap"},
        {"path_file", "", "if set, write the optimal path as CSV here"}}},
      {"geodesic",
       {{"chain", std::nullopt, "chain spec"},
        {"weight", "log", "weight spec"},
        {"entropy", "heat", "entropy pair (only read for weight = pair | matched)"},
        {"rho0", std::nullopt, "interior start density"},
        {"psi0", std::nullopt, "initial potential"},
        {"t_end", "0.1", "final time"},
        {"n_out", "11", "output samples"}}},
      {"solve-pme",
       {{"chain", std::nullopt, "chain spec"},
        {"entropy", "heat", "entropy pair"},
        {"rho0", std::nullopt, "initial density"},
        {"t_end", "1", "final time"},
        {"n_out", "11", "output samples"},
        {"rtol", "1e-8", "relative tolerance"},
        {"atol", "1e-10", "absolute tolerance"}}},
      {"kappa",
       {{"chain", std::nullopt, "chain spec"},
        {"entropy", "heat", "entropy pair"},
        {"weight", "matched", "weight spec"},
        {"starts", "64", "multistart count"},
        {"seed", std::nullopt, "seed for the random starts"},
        {"floor", "1e-8", "lower bound on rho during the search"},
        {"max_evaluations", "4000", "Nelder-Mead evaluations per start"}}},
      {"two-point-kappa",
       {{"chain", std::nullopt, "two-point:p,q"},
        {"entropy", "heat", "entropy pair"},
        {"weight", "matched", "weight spec"}}},
      {"counterexample",
       {{"sizes", "6,8,10", "cycle lengths N"},
        {"q", "1", "neighbour rate"},
        {"eps", "1e-2,1e-3,1e-4", "epsilon values"}}},
      {"check-inequalities",
       {{"chain", std::nullopt, "chain spec"},
        {"entropy", "heat", "entropy pair"},
        {"weight", "matched", "weight spec"},
        {"kappa", std::nullopt, "FWI constant"},
        {"lambda", std::nullopt, "EDI constant"},
        {"grid", "20", "densities on the segment between rho_a and rho_b"},
        {"rho_a", "", "segment start (default: all mass on the first state)"},
        {"rho_b", "", "segment end (default: all mass on the last state)"},
        {"steps", "128", "time intervals K for W"}}},
      {"contraction",
       {{"chain", std::nullopt, "chain spec"},
        {"entropy", "heat", "entropy pair"},
        {"weight", "matched", "weight spec"},
        {"rho0", std::nullopt, "first initial density"},
        {"sigma0", std::nullopt, "second initial density"},
        {"kappa", std::nullopt, "contraction rate"},
        {"times", "0.1,0.5,1", "sample times"},
        {"steps", "128", "time intervals K for W"}}},
      {"gh-study",
       {{"m", "1", "power exponent of the weight"},
        {"sizes", "8,16,32", "torus sizes N"},
        {"cos0", "0.5", "cosine coefficients of rho0"},
        {"sin0", "", "sine coefficients of rho0"},
        {"cos1", "", "cosine coefficients of rho1 (empty: translate rho0)"},
        {"sin1", "", "sine coefficients of rho1"},
        {"shift", "0.25", "translation of rho0 used when cos1 and sin1 are empty"},
        {"steps_per_site", "2", "K = max(32, steps_per_site * N)"},
        {"resolution", "4096", "quantile nodes of the continuous oracle"}}},
      {"validate-theta",
       {{"m", "0.25,0.5,1,1.5,2", "power exponents"},
        {"lo", "1e-3", "grid lower end"},
        {"hi", "1e3", "grid upper end"},
        {"points", "41", "grid points per axis"},
        {"quad_points", "64", "Gauss-Legendre nodes for the integral representation"}}},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::ConfigError, detail);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

}  // namespace

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    config_error("'" + text + "' is not a finite number (" + what + ")");
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item, what));
  return out;
}

RunConfig RunConfig::parse(const std::string& command, const std::string& text,
                           const std::vector<std::string>& overrides) {
  const auto it = schemas().find(command);
  if (it == schemas().end()) config_error("unknown command '" + command + "'");
  const auto& schema = it->second;
  auto known = [&](const std::string& key) {
    return std::any_of(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.name == key; });
  };

  std::map<std::string, std::string> given;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known(key)) config_error("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (given.count(key)) config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    given[key] = trim(line.substr(eq + 1));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) config_error("override '" + o + "' is not key=value");
    const std::string key = trim(o.substr(0, eq));
    if (!known(key)) config_error("unknown key '" + key + "' in override");
    given[key] = trim(o.substr(eq + 1));
  }

  RunConfig cfg;
  cfg.command_ = command;
  for (const KeySpec& k : schema) {
    const auto g = given.find(k.name);
    if (g != given.end()) {
      cfg.values_.emplace_back(k.name, g->second);
    } else if (k.fallback) {
      cfg.values_.emplace_back(k.name, *k.fallback);
    } else {
      config_error("missing required key '" + k.name + "' for " + command);
    }
  }
  return cfg;
}

const std::string& RunConfig::get(const std::string& key) const {
  for (const auto& [k, v] : values_) {
    if (k == key) return v;
  }
  config_error("key '" + key + "' is not defined for " + command_);
}

double RunConfig::number(const std::string& key) const { return parse_number(get(key), key); }

int RunConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) config_error("'" + key + "' must be an integer");
  return static_cast<int>(v);
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error("'" + key + "' must be true or false");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  return parse_number_list(get(key), key);
}

std::vector<int> RunConfig::integers(const std::string& key) const {
  std::vector<int> out;
  for (double v : numbers(key)) {
    if (v != std::floor(v) || std::abs(v) > 1e9) config_error("'" + key + "' must hold integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [name, keys] : schemas()) out.push_back(name);
  return out;
}

std::string usage() {
  std::ostringstream os;
  os << "usage: dpme <command> [--config FILE] [--out FILE] [--set key=value ...]\n\ncommands:\n";
  for (const auto& [name, keys] : schemas()) {
    os << "  " << name << "\n";
    for (const auto& k : keys) {
      os << "      " << k.name;
      if (k.fallback) os << " = " << (k.fallback->empty() ? "\"\"" : *k.fallback);
      else os << " (required)";
      os << "  " << k.help << "\n";
    }
  }
  return os.str();
}

namespace {

MarkovChain chain_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd q;
  std::optional<Eigen::VectorXd> pi;
  const nlohmann::json* rows = &j;
  if (j.is_object()) {
    if (!j.contains("Q")) config_error("chain object needs a 'Q' field");
    rows = &j.at("Q");
  }
  if (!rows->is_array() || rows->empty()) config_error("rate matrix must be a non-empty array");
  const std::size_t n = rows->size();
  q.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = (*rows)[i];
    if (!row.is_array() || row.size() != n) config_error("rate matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      if (!row[k].is_number()) config_error("rate matrix entries must be numbers");
      q(i, k) = row[k].get<double>();
    }
  }
  if (j.is_object()) {
    if (j.contains("n") && j.at("n").get<std::size_t>() != n) {
      throw Error(ErrorCode::DimensionMismatch, "field 'n' does not match the size of Q");
    }
    if (j.contains("pi")) {
      const auto& p = j.at("pi");
      Eigen::VectorXd v(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) v(i) = p[i].get<double>();
      pi = v;
    }
  }
  return MarkovChain::build(q, pi);
}

}  // namespace

MarkovChain parse_chain(const std::string& raw) {
  const std::string spec = trim(raw);
  auto args = [&](std::size_t prefix) { return parse_number_list(spec.substr(prefix), "chain"); };
  if (spec.rfind("two-point:", 0) == 0) {
    const auto a = args(10);
    if (a.size() != 2) config_error("two-point chain takes p,q");
    return two_point_chain(a[0], a[1]);
  }
  if (spec.rfind("cycle:", 0) == 0) {
    const auto a = args(6);
    if (a.size() != 2 || a[0] != std::floor(a[0])) config_error("cycle chain takes N,q");
    return cycle_chain(static_cast<int>(a[0]), a[1]);
  }
  if (spec.rfind("torus:", 0) == 0) {
    const auto a = args(6);
    if (a.size() != 2 || a[0] != std::floor(a[0]) || a[1] != std::floor(a[1])) {
      config_error("torus chain takes N,d");
    }
    return build_torus(static_cast<int>(a[0]), static_cast<int>(a[1])).chain;
  }
  try {
    if (spec.rfind("file:", 0) == 0) {
      std::ifstream in(spec.substr(5));
      if (!in) config_error("cannot open chain file '" + spec.substr(5) + "'");
      return chain_from_json(nlohmann::json::parse(in));
    }
    if (!spec.empty() && spec.front() == '[') return chain_from_json(nlohmann::json::parse(spec));
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed chain JSON: ") + e.what());
  }
  config_error("unrecognized chain spec '" + spec + "'");
}

EntropyPair parse_entropy(const std::string& raw) {
  const std::string spec = trim(raw);
  if (spec == "heat") return EntropyPair::heat();
  if (spec.rfind("renyi:", 0) == 0) return EntropyPair::renyi(parse_number(spec.substr(6), "renyi"));
  if (spec == "hilbertian:identity") return EntropyPair::hilbertian_identity();
  if (spec.rfind("hilbertian:power:", 0) == 0) {
    return EntropyPair::hilbertian_power(parse_number(spec.substr(17), "hilbertian power"));
  }
  config_error("unrecognized entropy spec '" + spec + "'");
}

WeightFunction parse_weight(const std::string& raw, const std::optional<EntropyPair>& pair) {
  const std::string spec = trim(raw);
  if (spec == "log") return WeightFunction::logarithmic();
  if (spec.rfind("power:", 0) == 0) return WeightFunction::power(parse_number(spec.substr(6), "power"));
  if (spec == "harmonic") return WeightFunction::harmonic();
  if (spec == "one") return WeightFunction::constant();
  if (spec == "pair" || spec == "matched") {
    if (!pair) config_error("weight '" + spec + "' needs an entropy pair");
    return spec == "pair" ? WeightFunction::from_pair(*pair) : matched_weight(*pair);
  }
  config_error("unrecognized weight spec '" + spec + "'");
}

Density parse_density(const MarkovChain& chain, const std::string& raw) {
  const std::string spec = trim(raw);
  if (spec == "uniform") return Density::uniform(chain);
  const auto v = parse_number_list(spec, "density");
  Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return Density::make(chain, values);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace dpme
