#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xfphoton/model.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/spectral.hpp"
#include "xfphoton/surface.hpp"
#include "xfphoton/wavefunction.hpp"

namespace xfp {

struct InversionOptions {
    /// Nodes with |chi|^2 < mask_threshold * max|chi|^2 are invalid.
    double mask_threshold = 1e-8;
    int stencil_order = 4;
    /// Frames within this distance of an odd multiple of half the vacuum
    /// Rabi period are flagged untrusted (E_kin becomes singular there).
    double singular_window = 5.0;
};

struct MarginalModulus {
    std::vector<double> chi_mod;
    std::vector<std::uint8_t> valid;
};

/// |chi| = sqrt(<Psi|Psi>_el) and the density mask.
MarginalModulus marginal_modulus(const GridWavefunction& psi, double mask_threshold = 1e-8);

struct MarginalPhase {
    std::vector<double> phase;     // S(q)
    std::vector<double> gradient;  // dS/dq, zero on invalid nodes
    std::size_t reference;         // node with S = 0
};

/// Phase of the marginal in the A = 0 gauge: dS/dq = Im<Psi|dPsi/dq>/|chi|^2
/// integrated by the cumulative trapezoid rule from the node nearest q = 0
/// that is valid. Throws InvariantViolation on a fully masked frame.
MarginalPhase marginal_phase(const GridWavefunction& psi, const MarginalModulus& modulus,
                             Spectral& spectral);

struct ConditionalFrame {
    Grid grid;
    double t = 0.0;
    std::vector<double> chi_mod;
    std::vector<double> phase_s;
    std::vector<cplx> cond_g, cond_e;    // diabatic components of Phi_q
    std::vector<cplx> coeff_g, coeff_e;  // qBO coefficients C_g, C_e
    std::vector<std::uint8_t> valid;
    std::size_t gauge_reference = 0;
};

/// Phi_q = Psi(q) / (|chi| e^{iS}); invalid nodes copy the nearest valid node.
/// The qBO coefficients are left empty (see qbo_project).
ConditionalFrame conditional_state(const GridWavefunction& psi, const MarginalModulus& modulus,
                                   const MarginalPhase& phase);

struct QboCoefficients {
    std::vector<cplx> coeff_g;
    std::vector<cplx> coeff_e;
};

/// Rotates the conditional components into the qBO eigenbasis at each q.
QboCoefficients qbo_project(const ConditionalFrame& frame, const ModelParams& params);

/// modulus + phase + conditional state + qBO projection for one snapshot.
ConditionalFrame invert_frame(const GridWavefunction& psi, const ModelParams& params,
                              const InversionOptions& opts, Spectral& spectral);

/// |C_g|^2 E_lower + |C_e|^2 E_upper; masked nodes constant-extrapolated.
std::vector<double> surface_wbo(const ConditionalFrame& frame, const ModelParams& params);

/// <d Phi/dq | d Phi/dq>/2 by central differences of the conditional
/// components; masked nodes constant-extrapolated.
std::vector<double> surface_kin(const ConditionalFrame& frame, int stencil_order = 4);

struct GaugeDependentTerm {
    std::vector<double> value;
    /// max |Im <Phi| -i dPhi/dt>| over valid nodes (should vanish).
    double max_imag = 0.0;
};

/// <Phi_q| -i d/dt Phi_q> by a centered difference of log <Phi(t)|Phi(t +- h)>,
/// which is exact for a uniform phase rotation. Throws InvariantViolation if
/// the frames use different gauge references.
GaugeDependentTerm surface_gd(const ConditionalFrame& prev, const ConditionalFrame& frame,
                              const ConditionalFrame& next, double dt_snap);

/// Second-order one-sided version for end frames. `step` is the signed time
/// offset of `near` (and 2*step of `far`) relative to `frame`.
GaugeDependentTerm surface_gd_one_sided(const ConditionalFrame& frame,
                                        const ConditionalFrame& near,
                                        const ConditionalFrame& far, double step);

/// Pointwise E_wBO + E_kin + E_GD.
std::vector<double> assemble_qtdpes(std::span<const double> wbo, std::span<const double> kin,
                                    std::span<const double> gd);

/// Decomposition of -dE_wBO/dq:
///   lower_gradient      = -dE_lower/dq
///   gap_gradient        = -|C_e|^2 d(E_upper - E_lower)/dq
///   population_gradient = -(d|C_e|^2/dq) (E_upper - E_lower)
/// weighted() groups the first two (the Ehrenfest-like part) and
/// population_gradient is the coefficient-gradient part.
struct WboForceTerms {
    std::vector<double> lower_gradient;
    std::vector<double> gap_gradient;
    std::vector<double> population_gradient;

    std::vector<double> weighted() const;
    std::vector<double> total() const;
};

WboForceTerms wbo_force_terms(const ConditionalFrame& frame, const ModelParams& params,
                              int stencil_order = 4);

struct FrameReport {
    double t = 0.0;
    double masked_fraction = 0.0;
    double gd_max_imag = 0.0;
    bool trusted = true;
    std::string issue;
};

/// All inverted surfaces of a snapshot series. Every movie shares the grid,
/// the times and the mask.
struct SurfaceSet {
    ModelParams params;
    Grid grid;
    std::vector<double> times;
    std::vector<std::size_t> gauge_reference;
    double mask_threshold = 1e-8;
    ScalarSurfaceMovie wbo, kin, gd, qtdpes;
    ScalarSurfaceMovie density, pop_e, phase;
    ScalarSurfaceMovie force_lower, force_gap, force_population;
    std::vector<FrameReport> reports;

    /// Lookup by name: wbo, kin, gd, qtdpes, density, pop_e, phase.
    const ScalarSurfaceMovie& component(const std::string& name) const;
};

/// Inverts every snapshot and assembles the surfaces. Frame inversions are
/// independent; E_GD uses neighbouring frames in a second pass.
SurfaceSet invert_series(const SnapshotSeries& series, const InversionOptions& opts);

}  // namespace xfp
