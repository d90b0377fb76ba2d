#pragma once

#include <stdexcept>
#include <vector>

#include "increpr/objective.hpp"

namespace increpr {

enum class Method { GradientDescent, ConjugateGradient };

// thrown when a backtracking step underflows without finding decrease
struct StagnationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  Method method = Method::ConjugateGradient;
  int max_iters = 1000;
  // stationarity threshold on ||grad||_F relative to max(1, |f|)
  double grad_tol = 1e-9;
  // Wolfe constants, 0 < c1 < c2 < 1
  double c1 = 1e-4;
  double c2 = 0.9;
  double backtrack_shrink = 0.5;
  double alpha0 = 1.0;  // scaled by 1/||g|| on the first iteration
  // Polak-Ribiere+ already falls back to steepest descent on its own
  // (beta clamps at zero, descent is rechecked); periodic forcing is off
  // by default because it cripples progress along curved valleys.
  int cg_restart_interval = 1000000;
  bool record_values = false;
};

struct SolveTrace {
  int iterations = 0;  // accepted steps
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  std::vector<double> values;  // recorded objective sequence, non-increasing
};

// First-order minimization of the factorized objective at fixed column
// count, to a stationary point. ConjugateGradient uses Polak-Ribiere+
// with restart to steepest descent every cg_restart_interval iterations
// or whenever the direction loses descent. The least-squares fidelity
// takes exact steps from the quartic restriction of the objective; the
// Poisson fidelity uses Wolfe backtracking. Accepted steps never
// increase the objective.
std::pair<CMat, SolveTrace> minimize_stationary(const ObjectiveSpec& spec,
                                                const MeasurementEnsemble& ens,
                                                const CMat& Y0,
                                                const SolverConfig& cfg);

// The objective restricted to a ray, phi(a) = f(Y + a d). Both fidelities
// reduce to scalar functions of the precomputed intensity coefficients
//   t_i(a) = t_i + a u_i + a^2 w_i,
// so line searches evaluate phi and phi' without further operator
// applications.
class StepProfile {
 public:
  StepProfile(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
              const CMat& Y, const CMat& d);
  // variant reusing an already transformed factor
  StepProfile(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
              const CMat& Y, const CMat& d, const CMat& TY, const Vec& t);

  double value(double a) const;
  double slope(double a) const;

  // quartic coefficients of phi for the least-squares fidelity:
  // phi(a) = c0 + c1 a + c2 a^2 + c3 a^3 + c4 a^4
  std::array<double, 5> quartic_coeffs() const;

  const ObjectiveSpec& spec() const { return spec_; }

 private:
  void init(const MeasurementEnsemble& ens, const CMat& Y, const CMat& d,
            const CMat& TY, const Vec& t);
  ObjectiveSpec spec_;
  Vec t_, u_, w_, b_;
  double yy_ = 0, yd_ = 0, dd_ = 0;
};

// Exact step for the least-squares fidelity: the restriction of the
// objective to the ray is a quartic polynomial, so its derivative is a
// cubic solved in closed form; the positive real root with the smallest
// objective is returned. Falls back to Wolfe backtracking if no
// positive root exists. d must be a descent direction.
double exact_cubic_step(const ObjectiveSpec& spec,
                        const MeasurementEnsemble& ens, const CMat& Y,
                        const CMat& d);
double exact_cubic_step(const StepProfile& profile, const SolverConfig& cfg);

// Step satisfying the sufficient-decrease condition
//   phi(a) <= phi(0) + c1 a phi'(0)
// always, and the curvature condition phi'(a) >= c2 phi'(0) when a
// bracketing search finds it within 40 trial steps; otherwise the best
// sufficient-decrease step is returned. Throws on step underflow below
// 1e-16 * alpha0.
double wolfe_backtrack(const ObjectiveSpec& spec,
                       const MeasurementEnsemble& ens, const CMat& Y,
                       const CMat& d, const SolverConfig& cfg);
double wolfe_backtrack(const StepProfile& profile, double alpha_init,
                       const SolverConfig& cfg);

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, degenerate degrees handled;
// returns the number of roots written.
int solve_cubic_real(double c3, double c2, double c1, double c0,
                     double roots[3]);

}  // namespace increpr
