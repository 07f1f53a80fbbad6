#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpme/cli.hpp"
#include "dpme/convexity.hpp"
#include "dpme/flow.hpp"
#include "dpme/torus.hpp"

namespace dpme {

namespace {

class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(out) {}

  Csv& header(const std::vector<std::string>& cols) {
    if (tables_++ > 0) out_ << "\n";
    write(cols);
    return *this;
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> v;
    (v.push_back(cell(cells)), ...);
    write(v);
  }

  void row(const std::vector<std::string>& cells) { write(cells); }

  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

 private:
  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  std::ostream& out_;
  int tables_ = 0;
};

std::vector<std::string> indexed(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::string> cells(const Eigen::VectorXd& v) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(format_number(v(i)));
  return out;
}

template <class T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

EntropyPair entropy_of(const RunConfig& c) { return parse_entropy(c.get("entropy")); }

WeightFunction weight_of(const RunConfig& c) {
  return parse_weight(c.get("weight"), entropy_of(c));
}

void cmd_distance(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  const WeightFunction theta = weight_of(c);
  DistanceOptions o;
  o.steps = c.integer("steps");
  o.max_iterations = c.integer("max_iterations");
  const DistanceResult r =
      distance(chain, theta, parse_density(chain, c.get("rho0")), parse_density(chain, c.get("rho1")), o);
  csv.header({"value", "iterations", "feasibility_residual", "min_curvature"});
  csv.row(r.value, r.iterations, r.feasibility_residual, r.min_curvature);

  const std::string& path_file = c.get("path_file");
  if (path_file.empty()) return;
  std::ofstream pf(path_file);
  if (!pf) throw Error(ErrorCode::ConfigError, "cannot write path file '" + path_file + "'");
  Csv path(pf);
  const int n = chain.size();
  path.header(concat(concat({std::string("k"), std::string("t")}, indexed("rho_", n)),
                     indexed("psi_", n)));
  for (int k = 0; k <= r.path.steps; ++k) {
    // Potentials live on intervals; node k reports the interval starting there.
    const int iv = std::min(k, r.path.steps - 1);
    const VertexFunction psi = iv < static_cast<int>(r.path.potentials.size())
                                   ? r.path.potentials[iv]
                                   : VertexFunction::Zero(n);
    path.row(concat(concat({std::to_string(k), format_number(static_cast<double>(k) / r.path.steps)},
                           cells(r.path.densities[k])),
                    cells(psi)));
  }
}

void cmd_geodesic(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  const WeightFunction theta = weight_of(c);
  const auto psi = parse_number_list(c.get("psi0"), "psi0");
  check_dimension(chain, static_cast<Eigen::Index>(psi.size()), "psi0");
  GeodesicOptions o;
  o.n_out = c.integer("n_out");
  const auto samples = geodesic_shoot(chain, theta, parse_density(chain, c.get("rho0")),
                                      Eigen::Map<const Eigen::VectorXd>(psi.data(), chain.size()),
                                      c.number("t_end"), o);
  const int n = chain.size();
  csv.header(concat(concat(concat({std::string("t")}, indexed("rho_", n)), indexed("psi_", n)),
                    {std::string("action")}));
  for (const auto& s : samples) {
    csv.row(concat(concat(concat({format_number(s.t)}, cells(s.rho)), cells(s.psi)),
                   {format_number(s.action)}));
  }
}

void cmd_solve_pme(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  PmeOptions o;
  o.n_out = c.integer("n_out");
  o.rtol = c.number("rtol");
  o.atol = c.number("atol");
  const Trajectory tr =
      solve_pme(chain, entropy_of(c), parse_density(chain, c.get("rho0")), c.number("t_end"), o);
  const int n = chain.size();
  csv.header(concat(concat({std::string("t")}, indexed("rho_", n)),
                    {std::string("mass_defect"), std::string("F"), std::string("I")}));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    csv.row(concat(concat({format_number(tr.times[i])}, cells(tr.states[i].values())),
                   {format_number(tr.mass_defect[i]), format_number(tr.entropy[i]),
                    format_number(tr.dissipation[i])}));
  }
}

void cmd_kappa(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  KappaOptions o;
  o.starts = c.integer("starts");
  const double seed = c.number("seed");
  if (seed < 0 || seed != std::floor(seed)) throw Error(ErrorCode::ConfigError, "seed must be a nonnegative integer");
  o.seed = static_cast<std::uint64_t>(seed);
  o.seeded = true;
  o.floor = c.number("floor");
  o.max_evaluations = c.integer("max_evaluations");
  const KappaEstimate k = kappa_estimate(chain, entropy_of(c), weight_of(c), o);
  const int n = chain.size();
  csv.header({"estimate", "converged"});
  csv.row(k.upper, k.converged);
  csv.header({"state", "rho", "psi"});
  for (int x = 0; x < n; ++x) csv.row(x, k.best.rho(x), k.best.psi(x));
  csv.header({"start", "initial_lambda", "final_lambda", "evaluations", "converged"});
  for (const auto& s : k.starts) {
    csv.row(s.index, s.initial_lambda, s.final_lambda, s.evaluations, s.converged);
  }
}

void cmd_two_point_kappa(const RunConfig& c, Csv& csv) {
  const std::string spec = c.get("chain");
  if (spec.rfind("two-point:", 0) != 0) {
    throw Error(ErrorCode::ConfigError, "two-point-kappa needs chain = two-point:p,q");
  }
  const auto pq = parse_number_list(spec.substr(10), "chain");
  if (pq.size() != 2) throw Error(ErrorCode::ConfigError, "two-point chain takes p,q");
  const TwoPointKappa k = two_point_kappa(pq[0], pq[1], entropy_of(c), weight_of(c));
  csv.header({"kappa", "alpha", "at_boundary"});
  csv.row(k.value, k.alpha, k.at_boundary);
}

void cmd_counterexample(const RunConfig& c, Csv& csv) {
  csv.header({"N", "q", "eps", "A", "B", "ratio"});
  const double q = c.number("q");
  for (int n : c.integers("sizes")) {
    for (double eps : c.numbers("eps")) {
      const CounterexampleRow r = circle_counterexample(n, q, eps);
      csv.row(r.n, r.q, r.eps, r.a, r.b, r.ratio);
    }
  }
}

void cmd_check_inequalities(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  const EntropyPair pair = entropy_of(c);
  const WeightFunction theta = weight_of(c);
  const int n = chain.size();
  auto end_point = [&](const std::string& key, int state) {
    if (!c.get(key).empty()) return parse_density(chain, c.get(key)).values();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(state) = 1.0 / chain.pi()(state);
    return v;
  };
  const Eigen::VectorXd a = end_point("rho_a", 0);
  const Eigen::VectorXd b = end_point("rho_b", n - 1);
  const int grid = c.integer("grid");
  if (grid < 1) throw Error(ErrorCode::ConfigError, "grid must be positive");
  DistanceOptions o;
  o.steps = c.integer("steps");
  const double kappa = c.number("kappa");
  const double lambda = c.number("lambda");
  csv.header(concat(concat({std::string("index")}, indexed("rho_", n)),
                    {"entropy_gap", "distance", "dissipation", "fwi_residual", "edi_residual"}));
  for (int i = 0; i < grid; ++i) {
    const double s = (i + 0.5) / grid;
    const Density rho = Density::normalized(chain, (1.0 - s) * a + s * b);
    const FwiResidual f = check_fwi(chain, pair, theta, rho, kappa, o);
    const double e = check_edi(chain, pair, rho, lambda);
    csv.row(concat(concat({std::to_string(i)}, cells(rho.values())),
                   {format_number(f.entropy_gap), format_number(f.distance),
                    format_number(f.dissipation), format_number(f.residual), format_number(e)}));
  }
}

void cmd_contraction(const RunConfig& c, Csv& csv) {
  const MarkovChain chain = parse_chain(c.get("chain"));
  DistanceOptions o;
  o.steps = c.integer("steps");
  const auto rows = contraction_check(chain, entropy_of(c), weight_of(c),
                                      parse_density(chain, c.get("rho0")),
                                      parse_density(chain, c.get("sigma0")), c.number("kappa"),
                                      c.numbers("times"), o);
  csv.header({"t", "distance", "bound", "residual"});
  for (const auto& r : rows) csv.row(r.t, r.distance, r.bound, r.residual);
}

void cmd_gh_study(const RunConfig& c, Csv& csv) {
  const CircleDensity rho0(c.numbers("cos0"), c.numbers("sin0"));
  const bool translate = c.get("cos1").empty() && c.get("sin1").empty();
  const CircleDensity rho1 =
      translate ? rho0.translated(c.number("shift")) : CircleDensity(c.numbers("cos1"), c.numbers("sin1"));
  GhOptions o;
  o.steps_per_site = c.integer("steps_per_site");
  o.resolution = c.integer("resolution");
  const auto rows = gh_table(c.number("m"), c.integers("sizes"), rho0, rho1, o);
  csv.header({"N", "W_N", "W2", "gap"});
  for (const auto& r : rows) csv.row(r.n, r.w_n, r.w2, r.gap);
}

void cmd_validate_theta(const RunConfig& c, Csv& csv) {
  const double lo = c.number("lo");
  const double hi = c.number("hi");
  const int points = c.integer("points");
  const int quad = c.integer("quad_points");
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw Error(ErrorCode::ConfigError, "validate-theta needs 0 < lo < hi and points >= 2");
  }
  csv.header({"m", "symmetry_gap", "min_value", "monotonicity_violation", "max_hessian_eigenvalue",
              "doubling_violation", "derivative_mismatch", "c_theta", "homogeneity_error",
              "boundary_value", "integral_error", "diagonal_error", "property3_violation"});
  for (double m : c.numbers("m")) {
    const WeightFunction theta = WeightFunction::power(m);
    const WeightPropertyReport rep = check_weight_properties(theta, lo, hi, points);
    const ThetaGhReport gh = theta_gh_properties(m, lo, hi, points);
    double homogeneity = 0.0;
    double integral = 0.0;
    for (int i = 0; i < points; ++i) {
      const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
      for (int j = 0; j < points; ++j) {
        const double s = lo * std::pow(hi / lo, static_cast<double>(j) / (points - 1));
        const double v = theta(r, s);
        homogeneity = std::max(homogeneity, std::abs(theta(3.0 * r, 3.0 * s) - 3.0 * v) / (3.0 * v));
        if (m != 1.0 && r / s <= 10.0 && s / r <= 10.0) {
          integral = std::max(integral, std::abs(theta_power_integral(m, r, s, quad) - v) / v);
        }
      }
    }
    csv.row(m, rep.symmetry_gap, rep.min_interior_value, rep.monotonicity_violation,
            rep.max_hessian_eigenvalue, rep.doubling_violation, rep.derivative_mismatch, rep.c_theta,
            homogeneity, theta(0.0, 1.0), integral, gh.diagonal_error, gh.property3_violation);
  }
}

}  // namespace

void run_command(const RunConfig& config, std::ostream& out) {
  std::ostringstream body;
  Csv csv(body);
  const std::string& cmd = config.command();
  if (cmd == "distance") cmd_distance(config, csv);
  else if (cmd == "geodesic") cmd_geodesic(config, csv);
  else if (cmd == "solve-pme") cmd_solve_pme(config, csv);
  else if (cmd == "kappa") cmd_kappa(config, csv);
  else if (cmd == "two-point-kappa") cmd_two_point_kappa(config, csv);
  else if (cmd == "counterexample") cmd_counterexample(config, csv);
  else if (cmd == "check-inequalities") cmd_check_inequalities(config, csv);
  else if (cmd == "contraction") cmd_contraction(config, csv);
  else if (cmd == "gh-study") cmd_gh_study(config, csv);
  else if (cmd == "validate-theta") cmd_validate_theta(config, csv);
  else throw Error(ErrorCode::ConfigError, "unknown command '" + cmd + "'");

  out << "# dpme " << kVersion << "\n";
  out << "# command = " << cmd << "\n";
  for (const auto& [k, v] : config.resolved()) out << "# " << k << " = " << v << "\n";
  out << "# timestamp = " << timestamp() << "\n";
  out << body.str();
}

}  // namespace dpme
