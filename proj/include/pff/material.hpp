#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace pff {

/// Local dissipation w(alpha): threshold is w0*alpha (elastic stage before
/// damage), no_threshold is w0*alpha^2.
enum class DissipationModel { Threshold, NoThreshold };

std::string_view to_string(DissipationModel m);
DissipationModel dissipation_model_from_string(std::string_view name);

/// Voigt vectors always carry six components
/// (eps_x, eps_y, eps_z, gamma_xy, gamma_yz, gamma_zx) with engineering shear.
using Voigt = Eigen::Matrix<double, 6, 1>;
using VoigtMatrix = Eigen::Matrix<double, 6, 6>;

/// Units: MPa for moduli and w0, (MPa)^{1/2} mm for eta, mm for lengths.
struct MaterialParams {
  double bulk_modulus = 0.0;
  double poisson_ratio = 0.0;
  double w0 = 0.0;
  double eta = 0.0;
  DissipationModel model = DissipationModel::Threshold;
  /// Small stiffness kept by fully broken material in tension; zero disables it.
  double residual_stiffness = 0.0;

  double shear_modulus() const;
  double lame_lambda() const;
  /// l = eta / sqrt(w0)
  double internal_length() const;
  /// G_c = 2 l int_0^1 sqrt(2 w0 w(b)) db; (4 sqrt 2 / 3) w0 l for the threshold model.
  double fracture_toughness() const;
  /// Throws ValidationError naming the violated bound.
  void validate() const;
};

/// Tension/compression split of the undamaged elastic energy.
struct SplitState {
  double psi_plus = 0.0;
  double psi_minus = 0.0;
  Voigt stress_plus = Voigt::Zero();
  Voigt stress_minus = Voigt::Zero();
  /// eps_v = tr(eps) / 3
  double volumetric_strain = 0.0;
  /// (eps_x - eps_v, eps_y - eps_v, eps_z - eps_v, gamma_xy/2, gamma_yz/2, gamma_zx/2)
  Voigt deviatoric_strain = Voigt::Zero();
};

/// Volumetric-deviatoric split. A zero trace counts as compression.
SplitState split(const MaterialParams& p, const Voigt& strain);

/// f(a) = (1-a)^2; throws DomainError outside [0,1].
double degradation(double alpha);
double degradation_derivative(double alpha);

struct Dissipation {
  double w;
  double dw;
};
Dissipation local_dissipation(const MaterialParams& p, double alpha);

VoigtMatrix volumetric_projector();
VoigtMatrix deviatoric_projector();

/// D = K [H(eps_v)(1-a)^2 + H(-eps_v)] P_V + 2 mu (1-a)^2 P_D, with the
/// residual stiffness added to (1-a)^2 when configured.
VoigtMatrix constitutive_matrix(const MaterialParams& p, double alpha, double volumetric_strain);

/// eps : sigma0^+ (equal to 2 psi^+).
double driving_force(const SplitState& s, const Voigt& strain);

/// Undamaged isotropic stiffness C0 = lambda 1x1 + 2 mu I in Voigt form.
VoigtMatrix isotropic_stiffness(const MaterialParams& p);

/// Degraded energy density psi(eps, a) = (f(a)+k) psi^+ + psi^- and its stress.
struct PointResponse {
  SplitState split;
  double energy;
  Voigt stress;
};
PointResponse point_response(const MaterialParams& p, const Voigt& strain, double alpha);

/// Out-of-plane strain that makes sigma_z vanish for an in-plane strain state
/// (plane stress); returns the completed Voigt strain.
Voigt plane_stress_strain(const MaterialParams& p, double eps_x, double eps_y, double gamma_xy,
                          double alpha);

}  // namespace pff
