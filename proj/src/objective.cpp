#include "increpr/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace increpr {

namespace {

void check_shapes(const MeasurementEnsemble& ens, const CMat& Y) {
  if (Y.rows() != ens.n())
    throw std::invalid_argument("objective: factor has " +
                                std::to_string(Y.rows()) + " rows, ensemble " +
                                std::to_string(ens.n()));
  if (Y.cols() < 1 || Y.cols() > Y.rows())
    throw std::invalid_argument("objective: factor needs 1 <= p <= n");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("objective: non-finite ") + what);
}

}  // namespace

double fidelity_value(const ObjectiveSpec& spec, const Vec& t, const Vec& b) {
  if (spec.fidelity == Fidelity::LeastSquares)
    return (t - b).squaredNorm() / (2.0 * t.size());
  const Vec tc = t.cwiseMax(spec.poisson_floor);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    acc += t(i);
    if (b(i) != 0.0) acc -= b(i) * std::log(tc(i));
  }
  return acc;
}

Vec fidelity_weights(const ObjectiveSpec& spec, const Vec& t, const Vec& b) {
  if (spec.fidelity == Fidelity::LeastSquares)
    return (t - b) / static_cast<double>(t.size());
  return Vec::Ones(t.size()) -
         b.cwiseQuotient(t.cwiseMax(spec.poisson_floor));
}

Vec fidelity_curvature(const ObjectiveSpec& spec, const Vec& t, const Vec& b) {
  if (spec.fidelity == Fidelity::LeastSquares)
    return Vec::Constant(t.size(), 1.0 / static_cast<double>(t.size()));
  return b.cwiseQuotient(t.cwiseMax(spec.poisson_floor).cwiseAbs2());
}

double value(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
             const CMat& Y) {
  check_shapes(ens, Y);
  const Vec t = ens.forward_intensity(Y);
  const double v =
      fidelity_value(spec, t, ens.intensities()) + spec.lambda * Y.squaredNorm();
  if (!std::isfinite(v)) {
    for (Eigen::Index i = 0; i < t.size(); ++i)
      if (!std::isfinite(t(i)))
        throw std::runtime_error("objective: overflow at measurement " +
                                 std::to_string(i));
    throw std::runtime_error("objective: non-finite value");
  }
  return v;
}

Evaluation evaluate(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
                    const CMat& Y) {
  check_shapes(ens, Y);
  Evaluation ev;
  ev.TY = ens.transform(Y);
  ev.t = ev.TY.cwiseAbs2().rowwise().sum();
  const Vec& b = ens.intensities();
  ev.value = fidelity_value(spec, ev.t, b) + spec.lambda * Y.squaredNorm();
  check_finite(ev.value, "value");
  const Vec w = fidelity_weights(spec, ev.t, b);
  ev.gradient = 2.0 * ens.adjoint_transformed(w, ev.TY);
  if (spec.lambda != 0.0) ev.gradient += (2.0 * spec.lambda) * Y;
  if (!ev.gradient.allFinite())
    throw std::runtime_error("objective: non-finite gradient");
  return ev;
}

CMat gradient(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
              const CMat& Y) {
  return evaluate(spec, ens, Y).gradient;
}

CMat hessian_vec(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
                 const CMat& Y, const CMat& xi) {
  check_shapes(ens, Y);
  if (xi.rows() != Y.rows() || xi.cols() != Y.cols())
    throw std::invalid_argument("hessian_vec: xi must match the factor shape");
  const Vec& b = ens.intensities();
  const CMat TY = ens.transform(Y);
  const CMat TXi = ens.transform(xi);
  const Vec t = TY.cwiseAbs2().rowwise().sum();
  const Vec w = fidelity_weights(spec, t, b);
  const Vec cross = MeasurementEnsemble::polarized_intensity(TY, TXi);
  const Vec wc = fidelity_curvature(spec, t, b).cwiseProduct(cross);
  CMat H = 2.0 * ens.adjoint_transformed(w, TXi) +
           2.0 * ens.adjoint_transformed(wc, TY);
  if (spec.lambda != 0.0) H += (2.0 * spec.lambda) * xi;
  return H;
}

}  // namespace increpr
