#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "kanai_cavity/core/friction.hpp"
#include "kanai_cavity/error.hpp"

namespace kanai_cavity {

/// Damped oscillator x'' + g'(n) x' + omega^2 x = 0.
struct OscillatorParams {
  double omega = 1.0;
  FrictionProfile friction = FrictionProfile::constant(0.0);

  /// Damped frequency sqrt(omega^2 - gamma^2/4); constant friction only.
  double damped_frequency() const {
    const double gamma = friction.gamma();
    const double disc = omega * omega - 0.25 * gamma * gamma;
    if (!(disc > 0.0)) {
      throw UnsupportedRegime("damped frequency is not real for gamma >= 2 omega");
    }
    return std::sqrt(disc);
  }
};

/// u1, u2 and their derivatives at one n.
struct ClassicalState {
  double u1 = 0.0;
  double du1 = 1.0;
  double u2 = 1.0;
  double du2 = 0.0;

  double wronskian() const { return du1 * u2 - du2 * u1; }
};

struct SolutionOptions {
  enum class Branch { automatic, closed_form, numerical };
  Branch branch = Branch::automatic;
  /// Integration horizon for the numerical branch. Defaults to the end of a
  /// tabulated friction table; required for constant friction.
  std::optional<double> n_max;
  double rtol = 1e-12;
  double atol = 1e-14;
  double checkpoint_spacing = 1.0;
};

/// Fundamental solutions u1 (u1(0)=0, u1'(0)=1) and u2 (u2(0)=1, u2'(0)=0).
class ClassicalSolution {
 public:
  using OdeState = std::array<double, 4>;

  const OscillatorParams& params() const { return params_; }
  double omega() const { return params_.omega; }
  const FrictionProfile& friction() const { return params_.friction; }
  bool is_closed_form() const { return numeric_ == nullptr; }

  double n_max() const {
    return numeric_ ? numeric_->n_max : std::numeric_limits<double>::infinity();
  }

  ClassicalState operator()(double n) const {
    if (!(n >= 0.0) || n > n_max()) {
      throw DomainError("classical solution evaluated outside [0, n_max] at n = " +
                        std::to_string(n));
    }
    return numeric_ ? numeric_eval(n) : closed_eval(n);
  }

  double u1(double n) const { return (*this)(n).u1; }
  double u2(double n) const { return (*this)(n).u2; }

  static ClassicalSolution closed_form(OscillatorParams params) {
    if (!params.friction.is_constant()) {
      throw UnsupportedRegime("closed-form solutions need constant friction");
    }
    const double gamma = params.friction.gamma();
    if (!(gamma < 2.0 * params.omega)) {
      throw UnsupportedRegime(
          "closed-form solutions need gamma < 2 omega; use the numerical branch");
    }
    ClassicalSolution s(std::move(params));
    s.damped_ = s.params_.damped_frequency();
    return s;
  }

  static ClassicalSolution numerical(OscillatorParams params, const SolutionOptions& opts) {
    double horizon = params.friction.n_max();
    if (opts.n_max) horizon = std::min(horizon, *opts.n_max);
    if (!std::isfinite(horizon) || horizon < 0.0) {
      throw ValidationError("numerical classical solution needs a finite n_max");
    }
    if (!(opts.checkpoint_spacing > 0.0) || !(opts.rtol > 0.0) || !(opts.atol > 0.0)) {
      throw ValidationError("numerical classical solution: bad tolerance settings");
    }
    ClassicalSolution s(std::move(params));
    auto data = std::make_shared<NumericData>();
    data->n_max = horizon;
    data->spacing = opts.checkpoint_spacing;
    data->rtol = opts.rtol;
    data->atol = opts.atol;

    OdeState x{0.0, 1.0, 1.0, 0.0};
    data->checkpoints.push_back(x);
    double t = 0.0;
    while (t < horizon) {
      const double t1 = std::min(horizon, t + data->spacing);
      s.integrate(*data, x, t, t1);
      data->checkpoints.push_back(x);
      t = t1;
    }
    s.numeric_ = std::move(data);
    return s;
  }

 private:
  struct NumericData {
    double n_max = 0.0;
    double spacing = 1.0;
    double rtol = 1e-10;
    double atol = 1e-12;
    std::vector<OdeState> checkpoints;
  };

  explicit ClassicalSolution(OscillatorParams p) : params_(std::move(p)) {}

  ClassicalState closed_eval(double n) const {
    const double gamma = params_.friction.gamma();
    const double om = damped_;
    const double env = std::exp(-0.5 * gamma * n);
    const double s = std::sin(om * n);
    const double c = std::cos(om * n);
    const double ratio = gamma / (2.0 * om);
    ClassicalState st;
    st.u1 = env * s / om;
    st.du1 = env * (c - ratio * s);
    st.u2 = env * (c + ratio * s);
    st.du2 = -env * (params_.omega * params_.omega / om) * s;
    return st;
  }

  void integrate(const NumericData& d, OdeState& x, double t0, double t1) const {
    namespace ode = boost::numeric::odeint;
    const double w2 = params_.omega * params_.omega;
    const FrictionProfile& fr = params_.friction;
    auto rhs = [&](const OdeState& s, OdeState& ds, double t) {
      const double gdot = fr(std::max(0.0, std::min(t, fr.n_max()))).gdot;
      ds[0] = s[1];
      ds[1] = -gdot * s[1] - w2 * s[0];
      ds[2] = s[3];
      ds[3] = -gdot * s[3] - w2 * s[2];
    };
    if (t1 <= t0) return;
    auto stepper = ode::make_controlled(d.atol, d.rtol, ode::runge_kutta_dopri5<OdeState>());
    // gdot of a table is only C0 in its derivative at the nodes; stepping
    // across them costs several orders of accuracy, so stop at each one.
    double a = t0;
    if (const TabulatedFriction* tab = fr.table()) {
      const auto& nodes = tab->nodes();
      for (auto it = std::upper_bound(nodes.begin(), nodes.end(), t0);
           it != nodes.end() && *it < t1; ++it) {
        ode::integrate_adaptive(stepper, rhs, x, a, *it, std::min(0.1, *it - a));
        a = *it;
      }
    }
    ode::integrate_adaptive(stepper, rhs, x, a, t1, std::min(0.1, t1 - a));
  }

  ClassicalState numeric_eval(double n) const {
    const NumericData& d = *numeric_;
    std::size_t k = static_cast<std::size_t>(std::floor(n / d.spacing));
    if (k >= d.checkpoints.size()) k = d.checkpoints.size() - 1;
    OdeState x = d.checkpoints[k];
    const double t0 = static_cast<double>(k) * d.spacing;
    if (n > t0) integrate(d, x, t0, n);
    return {x[0], x[1], x[2], x[3]};
  }

  OscillatorParams params_;
  double damped_ = 0.0;
  std::shared_ptr<const NumericData> numeric_;
};

/// Builds the fundamental solutions, choosing the closed form whenever it
/// exists unless the options force a branch.
inline ClassicalSolution fundamental_solutions(const OscillatorParams& params,
                                               const SolutionOptions& opts = {}) {
  using Branch = SolutionOptions::Branch;
  switch (opts.branch) {
    case Branch::closed_form:
      return ClassicalSolution::closed_form(params);
    case Branch::numerical:
      return ClassicalSolution::numerical(params, opts);
    case Branch::automatic:
      break;
  }
  if (params.friction.is_constant() && params.friction.gamma() < 2.0 * params.omega) {
    return ClassicalSolution::closed_form(params);
  }
  return ClassicalSolution::numerical(params, opts);
}

inline double wronskian(const ClassicalSolution& sol, double n) { return sol(n).wronskian(); }

}  // namespace kanai_cavity
