#pragma once

// Adaptive Dormand-Prince 4(5) driver over Boost.Odeint's controlled stepper,
// with a per-step acceptance hook and exact landing on requested output times.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpme/error.hpp"

namespace dpme::detail {

using State = std::vector<double>;

enum class StepVerdict { Accept, Retry };

struct OdeSettings {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-4;
  double min_step = 1e-14;
  long max_steps = 10'000'000;
};

/// Integrates x' = rhs(x, t) from t0 through every time in `outputs`
/// (ascending, >= t0), calling observe(t, x) at each. `check(x_new)` may edit
/// the proposed state in place or ask for a retry at half the step.
template <class Rhs, class Check, class Observe>
void integrate_to_outputs(Rhs&& rhs, State x, double t0, const std::vector<double>& outputs,
                          const OdeSettings& settings, Check&& check, Observe&& observe) {
  namespace odeint = boost::numeric::odeint;
  using Stepper = odeint::runge_kutta_dopri5<State>;
  auto stepper = odeint::make_controlled<Stepper>(settings.atol, settings.rtol);
  auto system = [&](const State& s, State& ds, double t) { rhs(s, ds, t); };

  double t = t0;
  double dt = settings.initial_step;
  State dxdt(x.size()), x_new(x.size()), dxdt_new(x.size());
  long steps = 0;
  rhs(x, dxdt, t);
  for (double target : outputs) {
    while (t < target) {
      if (++steps > settings.max_steps) {
        throw Error(ErrorCode::StepFailure, "ODE step budget exhausted");
      }
      const double remaining = target - t;
      const bool lands = dt >= remaining;
      double h = lands ? remaining : dt;
      double t_try = t;
      const auto res = stepper.try_step(system, x, dxdt, t_try, x_new, dxdt_new, h);
      if (res == odeint::fail) {
        dt = h;
        if (dt < settings.min_step) throw Error(ErrorCode::StepFailure, "step size underflow");
        continue;
      }
      if (check(x_new) == StepVerdict::Retry) {
        dt = 0.5 * (t_try - t);
        if (dt < settings.min_step) throw Error(ErrorCode::StepFailure, "step size underflow");
        continue;
      }
      t = lands ? target : t_try;
      x.swap(x_new);
      rhs(x, dxdt, t);
      // Keep the controller's suggestion unless the step was shortened only to
      // land on an output time.
      dt = lands ? std::max(dt, h) : h;
    }
    observe(target, x);
  }
}

}  // namespace dpme::detail
