#pragma once

#include <complex>
#include <vector>

#include "xfphoton/grid.hpp"
#include "xfphoton/model.hpp"
#include "xfphoton/spectral.hpp"

namespace xfp {

/// Two-component amplitude Psi(q) = chi_g^d(q)|g> + chi_e^d(q)|e>.
struct GridWavefunction {
    Grid grid;
    std::vector<cplx> comp_g;
    std::vector<cplx> comp_e;
    double t = 0.0;

    explicit GridWavefunction(const Grid& g = Grid{})
        : grid(g), comp_g(g.n_points), comp_e(g.n_points) {}

    /// |chi_g|^2 + |chi_e|^2 at every node.
    std::vector<double> density() const;
    double norm() const;
};

/// Single-component photonic amplitude chi(q).
struct ScalarWavefunction {
    Grid grid;
    std::vector<cplx> psi;
    double t = 0.0;

    explicit ScalarWavefunction(const Grid& g = Grid{}) : grid(g), psi(g.n_points) {}

    std::vector<double> density() const;
    double norm() const;
};

struct WavefunctionMoments {
    double norm;
    double q_mean;
    double q2;
    double p2;
    double pop_g;  // diabatic
    double pop_e;  // diabatic
    double energy;
};

/// Grid moments of the two-component state; <p^2> by spectral
/// differentiation summed over both components, energy = <H>.
WavefunctionMoments wavefunction_observables(const GridWavefunction& psi,
                                             const ModelParams& params, Spectral& spectral);
WavefunctionMoments wavefunction_observables(const GridWavefunction& psi,
                                             const ModelParams& params);

struct ScalarMoments {
    double norm;
    double q_mean;
    double q2;
    double p2;
};

ScalarMoments scalar_observables(const ScalarWavefunction& chi, Spectral& spectral);

/// Largest |amplitude| over the outer `fraction` of the grid on either side.
double edge_amplitude(const Grid& grid, const std::vector<cplx>& amp, double fraction = 0.05);

/// Harmonic-oscillator eigenfunctions of frequency omega (n = 0, 1).
double harmonic_ground(double omega, double q);
double harmonic_first(double omega, double q);

}  // namespace xfp
