#include "pff/material.hpp"

#include <cmath>
#include <string>

#include "pff/errors.hpp"

namespace pff {

namespace {

void check_damage(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("damage " + std::to_string(alpha) + " outside [0,1]");
}

}  // namespace

std::string_view to_string(DissipationModel m) {
  return m == DissipationModel::Threshold ? "threshold" : "no_threshold";
}

DissipationModel dissipation_model_from_string(std::string_view name) {
  if (name == "threshold") return DissipationModel::Threshold;
  if (name == "no_threshold") return DissipationModel::NoThreshold;
  throw ConfigError("unknown dissipation model '" + std::string(name) + "'", "dissipation");
}

double MaterialParams::shear_modulus() const {
  return 3.0 * bulk_modulus * (1.0 - 2.0 * poisson_ratio) / (2.0 * (1.0 + poisson_ratio));
}

double MaterialParams::lame_lambda() const { return bulk_modulus - 2.0 * shear_modulus() / 3.0; }

double MaterialParams::internal_length() const { return eta / std::sqrt(w0); }

double MaterialParams::fracture_toughness() const {
  const double l = internal_length();
  // 2 l int_0^1 sqrt(2 w0 w(b)) db in closed form
  if (model == DissipationModel::Threshold) return 4.0 * std::sqrt(2.0) / 3.0 * w0 * l;
  return std::sqrt(2.0) * w0 * l;
}

void MaterialParams::validate() const {
  if (!(bulk_modulus > 0.0)) throw ValidationError("K must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) throw ValidationError("nu must lie in (-1, 0.5)");
  if (!(w0 > 0.0)) throw ValidationError("w0 must be positive");
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  if (!(residual_stiffness >= 0.0 && residual_stiffness < 1.0))
    throw ValidationError("residual_stiffness must lie in [0, 1)");
}

SplitState split(const MaterialParams& p, const Voigt& strain) {
  const double K = p.bulk_modulus;
  const double mu = p.shear_modulus();
  SplitState s;
  const double tr = strain(0) + strain(1) + strain(2);
  s.volumetric_strain = tr / 3.0;
  for (int i = 0; i < 3; ++i) s.deviatoric_strain(i) = strain(i) - s.volumetric_strain;
  for (int i = 3; i < 6; ++i) s.deviatoric_strain(i) = 0.5 * strain(i);

  const Voigt& dev = s.deviatoric_strain;
  const double dev_dot = dev.head<3>().squaredNorm() + 2.0 * dev.tail<3>().squaredNorm();
  Voigt ones = Voigt::Zero();
  ones.head<3>().setOnes();

  s.stress_plus = 2.0 * mu * dev;
  s.psi_plus = mu * dev_dot;
  if (tr > 0.0) {
    s.psi_plus += 0.5 * K * tr * tr;
    s.stress_plus += K * tr * ones;
  } else {
    s.psi_minus = 0.5 * K * tr * tr;
    s.stress_minus = K * tr * ones;
  }
  return s;
}

double degradation(double alpha) {
  check_damage(alpha);
  return (1.0 - alpha) * (1.0 - alpha);
}

double degradation_derivative(double alpha) {
  check_damage(alpha);
  return -2.0 * (1.0 - alpha);
}

Dissipation local_dissipation(const MaterialParams& p, double alpha) {
  check_damage(alpha);
  if (p.model == DissipationModel::Threshold) return {p.w0 * alpha, p.w0};
  return {p.w0 * alpha * alpha, 2.0 * p.w0 * alpha};
}

VoigtMatrix volumetric_projector() {
  VoigtMatrix pv = VoigtMatrix::Zero();
  pv.topLeftCorner<3, 3>().setOnes();
  return pv;
}

VoigtMatrix deviatoric_projector() {
  VoigtMatrix pd = VoigtMatrix::Zero();
  pd.topLeftCorner<3, 3>().setConstant(-1.0 / 3.0);
  pd.topLeftCorner<3, 3>().diagonal().setConstant(2.0 / 3.0);
  pd.bottomRightCorner<3, 3>().diagonal().setConstant(0.5);
  return pd;
}

VoigtMatrix constitutive_matrix(const MaterialParams& p, double alpha, double volumetric_strain) {
  const double g = degradation(alpha) + p.residual_stiffness;
  const double vol = volumetric_strain > 0.0 ? g : 1.0;
  return p.bulk_modulus * vol * volumetric_projector() +
         2.0 * p.shear_modulus() * g * deviatoric_projector();
}

double driving_force(const SplitState& s, const Voigt& strain) { return strain.dot(s.stress_plus); }

VoigtMatrix isotropic_stiffness(const MaterialParams& p) {
  const double lambda = p.lame_lambda();
  const double mu = p.shear_modulus();
  VoigtMatrix c = VoigtMatrix::Zero();
  c.topLeftCorner<3, 3>().setConstant(lambda);
  c.topLeftCorner<3, 3>().diagonal().array() += 2.0 * mu;
  c.bottomRightCorner<3, 3>().diagonal().setConstant(mu);
  return c;
}

PointResponse point_response(const MaterialParams& p, const Voigt& strain, double alpha) {
  PointResponse r;
  r.split = split(p, strain);
  const double g = degradation(alpha) + p.residual_stiffness;
  r.energy = g * r.split.psi_plus + r.split.psi_minus;
  r.stress = g * r.split.stress_plus + r.split.stress_minus;
  return r;
}

Voigt plane_stress_strain(const MaterialParams& p, double eps_x, double eps_y, double gamma_xy,
                          double alpha) {
  const double K = p.bulk_modulus;
  const double mu = p.shear_modulus();
  const double g = degradation(alpha) + p.residual_stiffness;
  const double a = eps_x + eps_y;
  Voigt e = Voigt::Zero();
  e(0) = eps_x;
  e(1) = eps_y;
  e(3) = gamma_xy;
  // sigma_z = c K (a + ez) + 2 mu g (ez - (a + ez)/3) = 0 on the branch with volumetric factor c
  const double tension_den = g * K + 4.0 / 3.0 * mu * g;
  if (tension_den > 0.0) {
    const double ez = (2.0 / 3.0 * mu * g - g * K) * a / tension_den;
    if (a + ez > 0.0) {
      e(2) = ez;
      return e;
    }
  }
  e(2) = (2.0 / 3.0 * mu * g - K) * a / (K + 4.0 / 3.0 * mu * g);
  return e;
}

}  // namespace pff
