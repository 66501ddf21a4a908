#include "xfphoton/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xfp {

std::vector<double> GridWavefunction::density() const {
    std::vector<double> rho(grid.n_points);
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(comp_g[i]) + std::norm(comp_e[i]);
    return rho;
}

double GridWavefunction::norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) acc += std::norm(comp_g[i]) + std::norm(comp_e[i]);
    return acc * grid.dq();
}

std::vector<double> ScalarWavefunction::density() const {
    std::vector<double> rho(grid.n_points);
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi[i]);
    return rho;
}

double ScalarWavefunction::norm() const {
    double acc = 0.0;
    for (const auto& a : psi) acc += std::norm(a);
    return acc * grid.dq();
}

WavefunctionMoments wavefunction_observables(const GridWavefunction& psi,
                                             const ModelParams& params, Spectral& spectral) {
    const Grid& g = psi.grid;
    const double dq = g.dq();
    double pop_g = 0.0, pop_e = 0.0, q1 = 0.0, q2 = 0.0, potential = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double q = g.q(i);
        const double ng = std::norm(psi.comp_g[i]);
        const double ne = std::norm(psi.comp_e[i]);
        pop_g += ng;
        pop_e += ne;
        q1 += q * (ng + ne);
        q2 += q * q * (ng + ne);
        const auto h = qbo_hamiltonian(params, q);
        potential += h[0] * ng + h[3] * ne +
                     2.0 * h[1] * std::real(std::conj(psi.comp_g[i]) * psi.comp_e[i]);
    }
    const double p2 = spectral.p2_expectation(psi.comp_g) + spectral.p2_expectation(psi.comp_e);
    return {(pop_g + pop_e) * dq, q1 * dq, q2 * dq, p2, pop_g * dq, pop_e * dq,
            0.5 * p2 + potential * dq};
}

WavefunctionMoments wavefunction_observables(const GridWavefunction& psi,
                                             const ModelParams& params) {
    Spectral spectral(psi.grid);
    return wavefunction_observables(psi, params, spectral);
}

ScalarMoments scalar_observables(const ScalarWavefunction& chi, Spectral& spectral) {
    const Grid& g = chi.grid;
    double n = 0.0, q1 = 0.0, q2 = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double q = g.q(i);
        const double r = std::norm(chi.psi[i]);
        n += r;
        q1 += q * r;
        q2 += q * q * r;
    }
    const double dq = g.dq();
    return {n * dq, q1 * dq, q2 * dq, spectral.p2_expectation(chi.psi)};
}

double edge_amplitude(const Grid& grid, const std::vector<cplx>& amp, double fraction) {
    const auto band = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(grid.n_points)));
    double m = 0.0;
    for (std::size_t i = 0; i < band && i < amp.size(); ++i) {
        m = std::max(m, std::abs(amp[i]));
        m = std::max(m, std::abs(amp[amp.size() - 1 - i]));
    }
    return m;
}

double harmonic_ground(double omega, double q) {
    return std::pow(omega / std::numbers::pi, 0.25) * std::exp(-0.5 * omega * q * q);
}

double harmonic_first(double omega, double q) {
    return std::sqrt(2.0 * omega) * q * harmonic_ground(omega, q);
}

}  // namespace xfp
