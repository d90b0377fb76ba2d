#include "increpr/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace increpr {

// ---------------------------------------------------------------------
// cubic roots

int solve_cubic_real(double c3, double c2, double c1, double c0,
                     double roots[3]) {
  const double scale =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return 0;
  const double tiny = 1e-14 * scale;

  auto polish = [&](double x) {
    for (int it = 0; it < 2; ++it) {
      const double f = ((c3 * x + c2) * x + c1) * x + c0;
      const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
      if (df != 0.0 && std::isfinite(df)) x -= f / df;
    }
    return x;
  };

  if (std::abs(c3) <= tiny) {
    if (std::abs(c2) <= tiny) {
      if (std::abs(c1) <= tiny) return 0;
      roots[0] = -c0 / c1;
      return 1;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
    int k = 0;
    roots[k++] = q / c2;
    if (q != 0.0) roots[k++] = c0 / q;
    return k;
  }

  // depressed cubic y^3 + p y + q with x = y - c2/(3 c3)
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * q + sq);
    const double v = std::cbrt(-0.5 * q - sq);
    roots[0] = polish(u + v + shift);
    return 1;
  }
  if (p >= 0.0) {
    // disc <= 0 and p >= 0 only at the triple-root degeneracy
    roots[0] = polish(shift + std::cbrt(-q));
    return 1;
  }
  const double r = 2.0 * std::sqrt(-p / 3.0);
  double arg = 3.0 * q / (p * r);
  arg = std::clamp(arg, -1.0, 1.0);
  const double phi = std::acos(arg);
  for (int k = 0; k < 3; ++k)
    roots[k] =
        polish(r * std::cos((phi - 2.0 * M_PI * k) / 3.0) + shift);
  return 3;
}

// ---------------------------------------------------------------------
// StepProfile

StepProfile::StepProfile(const ObjectiveSpec& spec,
                         const MeasurementEnsemble& ens, const CMat& Y,
                         const CMat& d)
    : spec_(spec) {
  const CMat TY = ens.transform(Y);
  const Vec t = TY.cwiseAbs2().rowwise().sum();
  init(ens, Y, d, TY, t);
}

StepProfile::StepProfile(const ObjectiveSpec& spec,
                         const MeasurementEnsemble& ens, const CMat& Y,
                         const CMat& d, const CMat& TY, const Vec& t)
    : spec_(spec) {
  init(ens, Y, d, TY, t);
}

void StepProfile::init(const MeasurementEnsemble& ens, const CMat& Y,
                       const CMat& d, const CMat& TY, const Vec& t) {
  const CMat Td = ens.transform(d);
  t_ = t;
  u_ = MeasurementEnsemble::polarized_intensity(TY, Td);
  w_ = Td.cwiseAbs2().rowwise().sum();
  b_ = ens.intensities();
  yy_ = Y.squaredNorm();
  yd_ = rdot(Y, d);
  dd_ = d.squaredNorm();
}

double StepProfile::value(double a) const {
  const Vec t = t_ + a * u_ + (a * a) * w_;
  return fidelity_value(spec_, t, b_) +
         spec_.lambda * (yy_ + 2.0 * a * yd_ + a * a * dd_);
}

double StepProfile::slope(double a) const {
  const Vec t = t_ + a * u_ + (a * a) * w_;
  const Vec dt = u_ + (2.0 * a) * w_;
  return fidelity_weights(spec_, t, b_).dot(dt) +
         2.0 * spec_.lambda * (yd_ + a * dd_);
}

std::array<double, 5> StepProfile::quartic_coeffs() const {
  const Vec r = t_ - b_;
  const double m = static_cast<double>(t_.size());
  std::array<double, 5> c;
  c[0] = r.squaredNorm() / (2.0 * m) + spec_.lambda * yy_;
  c[1] = r.dot(u_) / m + 2.0 * spec_.lambda * yd_;
  c[2] = (u_.squaredNorm() + 2.0 * r.dot(w_)) / (2.0 * m) +
         spec_.lambda * dd_;
  c[3] = u_.dot(w_) / m;
  c[4] = w_.squaredNorm() / (2.0 * m);
  return c;
}

// ---------------------------------------------------------------------
// line searches

double exact_cubic_step(const StepProfile& profile, const SolverConfig& cfg) {
  if (profile.spec().fidelity != Fidelity::LeastSquares)
    throw std::invalid_argument(
        "exact_cubic_step: requires the least-squares fidelity");
  const double slope0 = profile.slope(0.0);
  if (!(slope0 < 0.0))
    throw std::invalid_argument("exact_cubic_step: not a descent direction");

  const auto c = profile.quartic_coeffs();
  double roots[3];
  const int nroots =
      solve_cubic_real(4.0 * c[4], 3.0 * c[3], 2.0 * c[2], c[1], roots);

  double best = -1.0;
  double best_val = profile.value(0.0);
  for (int k = 0; k < nroots; ++k) {
    const double a = roots[k];
    if (!(a > 0.0) || !std::isfinite(a)) continue;
    const double v = profile.value(a);
    if (v < best_val) {
      best_val = v;
      best = a;
    }
  }
  if (best > 0.0) return best;
  // no improving positive root (flat or ill-conditioned quartic)
  return wolfe_backtrack(profile, cfg.alpha0, cfg);
}

double exact_cubic_step(const ObjectiveSpec& spec,
                        const MeasurementEnsemble& ens, const CMat& Y,
                        const CMat& d) {
  return exact_cubic_step(StepProfile(spec, ens, Y, d), SolverConfig{});
}

double wolfe_backtrack(const StepProfile& profile, double alpha_init,
                       const SolverConfig& cfg) {
  const double phi0 = profile.value(0.0);
  const double dphi0 = profile.slope(0.0);
  if (!(dphi0 < 0.0))
    throw std::invalid_argument("wolfe_backtrack: not a descent direction");

  auto sufficient = [&](double a, double phi_a) {
    return phi_a <= phi0 + cfg.c1 * a * dphi0;
  };

  // sufficient decrease first
  double alpha = alpha_init;
  while (!sufficient(alpha, profile.value(alpha))) {
    alpha *= cfg.backtrack_shrink;
    if (alpha < 1e-16 * alpha_init)
      throw StagnationError("wolfe_backtrack: step underflow, stagnated");
  }
  if (profile.slope(alpha) >= cfg.c2 * dphi0) return alpha;

  // curvature still violated: the minimizer lies beyond alpha. Expand,
  // then bisect the bracket; cap the whole attempt at 40 trial steps.
  double lo = alpha;  // satisfies sufficient decrease
  double hi = 0.0;    // > lo, violates sufficient decrease (0 = unset)
  for (int trial = 0; trial < 40; ++trial) {
    const double cand = hi > 0.0 ? 0.5 * (lo + hi) : 2.0 * lo;
    const double phi_c = profile.value(cand);
    if (!sufficient(cand, phi_c) || phi_c >= profile.value(lo)) {
      hi = cand;
      continue;
    }
    lo = cand;
    if (profile.slope(cand) >= cfg.c2 * dphi0) return cand;
    if (hi == 0.0 && !(cand < 1e12 * alpha_init)) break;
  }
  return lo;  // best sufficient-decrease step
}

double wolfe_backtrack(const ObjectiveSpec& spec,
                       const MeasurementEnsemble& ens, const CMat& Y,
                       const CMat& d, const SolverConfig& cfg) {
  return wolfe_backtrack(StepProfile(spec, ens, Y, d), cfg.alpha0, cfg);
}

// ---------------------------------------------------------------------
// minimize_stationary

std::pair<CMat, SolveTrace> minimize_stationary(const ObjectiveSpec& spec,
                                                const MeasurementEnsemble& ens,
                                                const CMat& Y0,
                                                const SolverConfig& cfg) {
  if (!Y0.allFinite())
    throw std::invalid_argument("minimize_stationary: non-finite start");
  if (!(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0))
    throw std::invalid_argument("minimize_stationary: need 0 < c1 < c2 < 1");
  if (cfg.max_iters < 1 || !(cfg.grad_tol > 0.0))
    throw std::invalid_argument("minimize_stationary: bad iteration config");

  CMat Y = Y0;
  Evaluation ev = evaluate(spec, ens, Y);
  double gnorm = ev.gradient.norm();

  SolveTrace trace;
  if (cfg.record_values) trace.values.push_back(ev.value);

  CMat d, g_prev;
  double gnorm_prev = 0.0;
  double alpha_prev = 0.0;
  bool have_prev = false;

  auto stationary = [&]() {
    return gnorm <= cfg.grad_tol * std::max(1.0, std::abs(ev.value));
  };

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (stationary()) {
      trace.converged = true;
      break;
    }

    // search direction: steepest descent, or Polak-Ribiere+ with restart
    bool steepest = true;
    if (cfg.method == Method::ConjugateGradient && have_prev &&
        (iter % std::max(1, cfg.cg_restart_interval)) != 0) {
      const double beta =
          std::max(0.0, rdot(ev.gradient, ev.gradient - g_prev) /
                            (gnorm_prev * gnorm_prev));
      CMat d_cg = -ev.gradient + beta * d;
      if (rdot(d_cg, ev.gradient) < 0.0) {
        d = std::move(d_cg);
        steepest = false;
      }
    }
    if (steepest) d = -ev.gradient;

    StepProfile profile(spec, ens, Y, d, ev.TY, ev.t);
    const double alpha_init =
        iter == 0 ? cfg.alpha0 / std::max(1.0, gnorm)
                  : std::clamp(alpha_prev, 1e-12, 1e12);
    double alpha;
    try {
      alpha = spec.fidelity == Fidelity::LeastSquares
                  ? exact_cubic_step(profile, cfg)
                  : wolfe_backtrack(profile, alpha_init, cfg);
    } catch (const StagnationError&) {
      break;  // line search stagnated at numerical resolution
    }

    // accept against a fresh evaluation so recorded values are exactly
    // non-increasing even when the profile arithmetic and the operator
    // path round differently; an overflowing trial point just shrinks
    bool accepted = false;
    Evaluation ev_next;
    for (int shrink = 0; shrink < 12 && alpha > 0.0; ++shrink) {
      try {
        ev_next = evaluate(spec, ens, Y + alpha * d);
      } catch (const std::runtime_error&) {
        alpha *= 0.5;
        continue;
      }
      if (ev_next.value <= ev.value) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    Y += alpha * d;
    g_prev = std::move(ev.gradient);
    gnorm_prev = gnorm;
    ev = std::move(ev_next);
    gnorm = ev.gradient.norm();
    alpha_prev = alpha;
    have_prev = true;
    ++trace.iterations;
    if (cfg.record_values) trace.values.push_back(ev.value);
  }

  if (stationary()) trace.converged = true;
  trace.final_value = ev.value;
  trace.final_grad_norm = gnorm;
  return {std::move(Y), std::move(trace)};
}

}  // namespace increpr
