#include "dpme/flow.hpp"

#include <cmath>
#include <sstream>

#include "ode.hpp"

namespace dpme {

VertexFunction pme_rhs(const MarkovChain& chain, const EntropyPair& pair, const VertexFunction& rho) {
  return laplacian(chain, apply_phi(pair, rho));
}

Trajectory solve_pme(const MarkovChain& chain, const EntropyPair& pair, const Density& rho0,
                     double t_end, const PmeOptions& opts) {
  if (rho0.size() != chain.size()) {
    throw Error(ErrorCode::InvalidInitial, "initial density has the wrong length");
  }
  if (!(rho0.min() >= 0.0) || std::abs(rho0.values().dot(chain.pi()) - 1.0) > 1e-10) {
    throw Error(ErrorCode::InvalidInitial, "initial density is not a probability density");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidInitial, "t_end must be positive and finite");
  }
  std::vector<double> outputs = opts.output_times;
  if (outputs.empty()) {
    if (opts.n_out < 2) throw Error(ErrorCode::ConfigError, "n_out must be at least 2");
    outputs.resize(opts.n_out);
    for (int i = 0; i < opts.n_out; ++i) outputs[i] = t_end * i / (opts.n_out - 1);
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] < 0.0 || outputs[i] > t_end || (i > 0 && outputs[i] <= outputs[i - 1])) {
      throw Error(ErrorCode::ConfigError, "output times must be increasing within [0, t_end]");
    }
  }

  const int n = chain.size();
  Eigen::VectorXd phi(n);
  auto rhs = [&](const detail::State& s, detail::State& ds, double) {
    for (int x = 0; x < n; ++x) phi(x) = pair.phi(std::max(s[x], 0.0));
    const auto& q = chain.rates();
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int y = 0; y < n; ++y) {
        if (y != x) acc += q(x, y) * (phi(y) - phi(x));
      }
      ds[x] = acc;
    }
  };
  auto check = [](detail::State& s) {
    for (double v : s) {
      if (v < -1e-12) return detail::StepVerdict::Retry;
    }
    for (double& v : s) v = std::max(v, 0.0);
    return detail::StepVerdict::Accept;
  };

  Trajectory traj;
  auto observe = [&](double t, const detail::State& s) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.data(), n);
    const double mass = v.dot(chain.pi());
    Density d = Density::make(chain, v, 1e-8);
    traj.times.push_back(t);
    traj.mass_defect.push_back(std::abs(mass - 1.0));
    traj.min_density.push_back(d.min());
    traj.entropy.push_back(entropy_value(chain, pair, d));
    traj.dissipation.push_back(dissipation(chain, pair, d));
    traj.states.push_back(std::move(d));
  };

  detail::OdeSettings settings;
  settings.rtol = opts.rtol;
  settings.atol = opts.atol;
  settings.initial_step = std::min(opts.initial_step, t_end);
  detail::State x0(rho0.values().data(), rho0.values().data() + n);
  detail::integrate_to_outputs(rhs, std::move(x0), 0.0, outputs, settings, check, observe);
  return traj;
}

std::vector<EviSample> evi_residual(const MarkovChain& chain, const EntropyPair& pair,
                                    const MetricHandle& metric, const Trajectory& traj,
                                    const Density& sigma, double kappa) {
  const std::size_t count = traj.size();
  std::vector<double> d(count);
  for (std::size_t i = 0; i < count; ++i) d[i] = metric(chain, traj.states[i], sigma);
  const double f_sigma = entropy_value(chain, pair, sigma);

  std::vector<EviSample> out;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double h1 = traj.times[i] - traj.times[i - 1];
    const double h2 = traj.times[i + 1] - traj.times[i];
    const double g0 = 0.5 * d[i - 1] * d[i - 1];
    const double g1 = 0.5 * d[i] * d[i];
    const double g2 = 0.5 * d[i + 1] * d[i + 1];
    const double deriv = -h2 / (h1 * (h1 + h2)) * g0 + (h2 - h1) / (h1 * h2) * g1 +
                         h1 / (h2 * (h1 + h2)) * g2;
    const double r = deriv + kappa * g1 - f_sigma + traj.entropy[i];
    out.push_back({traj.times[i], d[i], r});
  }
  return out;
}

}  // namespace dpme
