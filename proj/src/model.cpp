#include "xfphoton/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xfphoton/errors.hpp"

namespace xfp {

void ModelParams::validate() const {
    std::ostringstream why;
    if (!(eps_e > eps_g)) why << "eps_e must exceed eps_g; ";
    if (!(omega_c > 0.0)) why << "omega_c must be positive; ";
    if (!(g_coupling >= 0.0)) why << "g_coupling must be non-negative; ";
    if (!std::isfinite(eps_g) || !std::isfinite(eps_e) || !std::isfinite(omega_c) ||
        !std::isfinite(g_coupling))
        why << "parameters must be finite; ";
    if (!why.str().empty()) throw ConfigError("invalid model parameters: " + why.str());
}

double ModelParams::detuning() const { return std::abs(omega_c - gap()); }

double vacuum_rabi_period(const ModelParams& params) {
    const double g = params.g_coupling * std::sqrt(0.5 * params.omega_c);
    if (g == 0.0) return std::numeric_limits<double>::infinity();
    return std::numbers::pi / g;
}

namespace {

double half_splitting(const ModelParams& p, double q) {
    const double half_gap = 0.5 * p.gap();
    const double v = p.bilinear() * q;
    return std::hypot(half_gap, v);
}

}  // namespace

QboEnergies qbo_energies(const ModelParams& params, double q) {
    const double w = params.omega_c;
    const double base = params.mean_level() + 0.5 * w * w * q * q;
    const double r = half_splitting(params, q);
    return {base - r, base + r};
}

QboEnergies qbo_energy_gradients(const ModelParams& params, double q) {
    const double w = params.omega_c;
    const double harmonic = w * w * q;
    const double b = params.bilinear();
    const double r = half_splitting(params, q);
    const double dr = b * b * q / r;
    return {harmonic - dr, harmonic + dr};
}

double mixing_angle(const ModelParams& params, double q) {
    return 0.5 * std::atan2(2.0 * params.bilinear() * q, params.gap());
}

QboEigenvectors qbo_eigenvectors(const ModelParams& params, double q) {
    const double theta = mixing_angle(params, q);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {theta, {c, -s}, {s, c}};
}

double nac_first_order(const ModelParams& params, double q) {
    const double x = 2.0 * params.bilinear() * q / params.gap();
    return params.bilinear() / params.gap() / (1.0 + x * x);
}

SecondOrderCouplings nac_second_order(const ModelParams& params, double q, double step) {
    const auto m = qbo_eigenvectors(params, q - step);
    const auto c = qbo_eigenvectors(params, q);
    const auto p = qbo_eigenvectors(params, q + step);
    const double inv_h2 = 1.0 / (step * step);
    auto second = [&](const std::array<double, 2>& a, const std::array<double, 2>& b,
                      const std::array<double, 2>& d) {
        return std::array<double, 2>{(a[0] - 2.0 * b[0] + d[0]) * inv_h2,
                                     (a[1] - 2.0 * b[1] + d[1]) * inv_h2};
    };
    const auto lower2 = second(m.lower, c.lower, p.lower);
    const auto upper2 = second(m.upper, c.upper, p.upper);
    auto dot = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        return a[0] * b[0] + a[1] * b[1];
    };
    return {0.5 * dot(c.lower, lower2), 0.5 * dot(c.lower, upper2),
            0.5 * dot(c.upper, lower2), 0.5 * dot(c.upper, upper2)};
}

QboPoint qbo_point(const ModelParams& params, double q) {
    const auto e = qbo_energies(params, q);
    const auto d2 = nac_second_order(params, q);
    return {q, e.lower, e.upper, mixing_angle(params, q), nac_first_order(params, q), d2.gg,
            d2.ge};
}

std::array<double, 4> qbo_hamiltonian(const ModelParams& params, double q) {
    const double w = params.omega_c;
    const double harmonic = 0.5 * w * w * q * q;
    const double v = params.bilinear() * q;
    return {params.eps_g + harmonic, v, v, params.eps_e + harmonic};
}

}  // namespace xfp
