#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "xfphoton/model.hpp"
#include "xfphoton/spectral.hpp"
#include "xfphoton/surface.hpp"
#include "xfphoton/wavefunction.hpp"

namespace xfp {

/// Psi(q,0) = chi_0(q) |Phi_{q,e}>, chi_0 the harmonic ground state of omega_c.
/// Throws ConfigError when the Gaussian tail at the grid ends exceeds 1e-12.
GridWavefunction init_state_qbo_excited(const ModelParams& params, const Grid& grid);

/// Symmetric split-operator propagator for the two-component diabatic TDSE.
/// The potential step is the exact 2x2 exponential of
/// V(q) = [[eps_g + w^2 q^2/2, g w q], [g w q, eps_e + w^2 q^2/2]].
class DiabaticPropagator {
public:
    DiabaticPropagator(const ModelParams& params, const Grid& grid, double dt);

    double dt() const { return dt_; }
    /// Advances psi by n steps (half kinetic steps fused between steps).
    void advance(GridWavefunction& psi, std::size_t n_steps);
    Spectral& spectral() { return spectral_; }

private:
    void kinetic(GridWavefunction& psi, const std::vector<cplx>& factor);
    void potential(GridWavefunction& psi);

    double dt_;
    Spectral spectral_;
    std::vector<cplx> k_half_, k_full_;
    // Per-node 2x2 propagator: {u_gg, u_ge, u_eg, u_ee}.
    std::vector<std::array<cplx, 4>> u_;
};

/// One symmetric step (kinetic/2, potential, kinetic/2).
GridWavefunction split_operator_step(GridWavefunction psi, const ModelParams& params, double dt);

/// Snapshot series of an exact propagation.
struct SnapshotSeries {
    ModelParams params;
    Grid grid;
    double dt = 0.001;
    double stride = 0.2;
    std::vector<GridWavefunction> frames;

    std::vector<double> times() const;
};

struct PropagationOptions {
    double dt = 0.001;
    double t_final = 0.0;
    double snapshot_stride = 0.2;
    /// Max |amplitude| allowed in the outer 5% of the grid.
    double edge_tolerance = 1e-6;
    double norm_tolerance = 1e-8;
};

/// Number of dt steps per stride; throws ConfigError if stride is not a
/// multiple of dt.
std::size_t steps_per_stride(double dt, double stride);

/// Exact propagation from psi0. Snapshots at t0 + k*stride <= t0 + t_final.
/// Throws InvariantViolation on boundary amplitude or final norm drift.
SnapshotSeries propagate_exact(const ModelParams& params, GridWavefunction psi0,
                               const PropagationOptions& opts);
/// Same, starting from init_state_qbo_excited.
SnapshotSeries propagate_exact(const ModelParams& params, const Grid& grid,
                               const PropagationOptions& opts);

/// Single-component split-operator propagation on a time-dependent surface,
/// linear in t between frames. Returns snapshots at the given stride.
/// Throws ConfigError when [t0, t0 + t_final] is not covered by the field.
std::vector<ScalarWavefunction> propagate_on_surface(const SurfaceField& field,
                                                     ScalarWavefunction chi0,
                                                     const PropagationOptions& opts);

/// Propagation in the cavity-BO (qBO) representation including D_ii, D_ij
/// and d_ge d/dq couplings (finite-difference second-order couplings).
/// Snapshots are rotated back to the diabatic basis.
SnapshotSeries propagate_qbo_basis(const ModelParams& params, const Grid& grid,
                                   const PropagationOptions& opts);

/// Amplitudes in the qBO basis (lower, upper) -> diabatic (g, e), per node.
GridWavefunction qbo_to_diabatic(const ModelParams& params, const std::vector<cplx>& lower,
                                 const std::vector<cplx>& upper, const Grid& grid, double t);

}  // namespace xfp
