#pragma once

#include <array>

namespace xfp {

/// Two-level emitter coupled bilinearly to one cavity mode (atomic units).
///
///   H = eps_g |g><g| + eps_e |e><e| + (omega_c^2 q^2 - d^2/dq^2) / 2
///     + g_coupling * omega_c * q (|e><g| + |g><e|)
///
/// g_coupling is the product r_eg * lambda. Self-polarization is taken as
/// already absorbed into eps_g and eps_e.
struct ModelParams {
    double eps_g = -0.2;
    double eps_e = 0.2;
    double omega_c = 0.4;
    double g_coupling = 0.01;

    /// Throws ConfigError unless eps_e > eps_g, omega_c > 0, g_coupling >= 0.
    void validate() const;

    double gap() const { return eps_e - eps_g; }
    double mean_level() const { return 0.5 * (eps_g + eps_e); }
    /// |omega_c - (eps_e - eps_g)|; zero for the default parameters.
    double detuning() const;
    /// Off-diagonal slope of H^qBO: coupling = bilinear() * q.
    double bilinear() const { return g_coupling * omega_c; }
};

/// Period of the one-excitation population exchange,
/// pi / (g_coupling * sqrt(omega_c / 2)), exact in the resonant RWA limit.
double vacuum_rabi_period(const ModelParams& params);

struct QboEnergies {
    double lower;
    double upper;
};

/// Eigenvectors of H^qBO(q) expressed in the diabatic (g, e) basis.
/// Sign convention: the e-component of the upper state is positive.
struct QboEigenvectors {
    double theta;
    std::array<double, 2> lower;  // ( cos theta, -sin theta)
    std::array<double, 2> upper;  // ( sin theta,  cos theta)
};

/// Second-order couplings D_ij = <Phi_i | d^2/dq^2 Phi_j> / 2.
struct SecondOrderCouplings {
    double gg;
    double ge;
    double eg;
    double ee;
};

/// Cavity-BO data at a single displacement.
struct QboPoint {
    double q;
    double e_lower;
    double e_upper;
    double theta;
    double d_ge;
    double D_gg;
    double D_ge;
};

/// Eigenvalues of eps + omega_c^2 q^2 / 2 + coupling at fixed q.
QboEnergies qbo_energies(const ModelParams& params, double q);

/// d/dq of both cavity-BO energies, closed form.
QboEnergies qbo_energy_gradients(const ModelParams& params, double q);

/// Mixing angle theta(q) = atan2(2 g omega_c q, eps_e - eps_g) / 2.
double mixing_angle(const ModelParams& params, double q);

QboEigenvectors qbo_eigenvectors(const ModelParams& params, double q);

/// d_ge = <Phi_g | d/dq Phi_e> = d theta / dq.
double nac_first_order(const ModelParams& params, double q);

/// Central finite differences of the eigenvectors with the given step.
SecondOrderCouplings nac_second_order(const ModelParams& params, double q,
                                      double step = 1e-4);

QboPoint qbo_point(const ModelParams& params, double q);

/// The 2x2 H^qBO(q) in the diabatic basis, row-major {Vgg, Vge, Veg, Vee}.
std::array<double, 4> qbo_hamiltonian(const ModelParams& params, double q);

}  // namespace xfp
