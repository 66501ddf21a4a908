#include "xfphoton/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfphoton/errors.hpp"
#include "xfphoton/stencil.hpp"

namespace xfp {

MarginalModulus marginal_modulus(const GridWavefunction& psi, double mask_threshold) {
    const auto rho = psi.density();
    const double peak = *std::max_element(rho.begin(), rho.end());
    MarginalModulus out{std::vector<double>(rho.size()), std::vector<std::uint8_t>(rho.size())};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        out.chi_mod[i] = std::sqrt(rho[i]);
        out.valid[i] = (peak > 0.0 && rho[i] >= mask_threshold * peak) ? 1 : 0;
    }
    return out;
}

namespace {

std::size_t gauge_reference_node(const Grid& grid, std::span<const std::uint8_t> valid) {
    const std::size_t origin = grid.nearest_index(0.0);
    const std::size_t n = grid.n_points;
    for (std::size_t d = 0; d < n; ++d) {
        if (origin >= d && valid[origin - d]) return origin - d;
        if (origin + d < n && valid[origin + d]) return origin + d;
    }
    throw InvariantViolation("fully masked frame: no valid node for the gauge reference");
}

}  // namespace

MarginalPhase marginal_phase(const GridWavefunction& psi, const MarginalModulus& modulus,
                             Spectral& spectral) {
    const Grid& grid = psi.grid;
    const std::size_t n = grid.n_points;
    const double dq = grid.dq();
    MarginalPhase out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
    out.reference = gauge_reference_node(grid, modulus.valid);

    std::vector<cplx> dg(n), de(n);
    spectral.derivative(psi.comp_g, dg);
    spectral.derivative(psi.comp_e, de);
    for (std::size_t i = 0; i < n; ++i) {
        if (!modulus.valid[i]) continue;
        const double current = std::imag(std::conj(psi.comp_g[i]) * dg[i] +
                                         std::conj(psi.comp_e[i]) * de[i]);
        out.gradient[i] = current / (modulus.chi_mod[i] * modulus.chi_mod[i]);
    }
    const std::size_t r = out.reference;
    for (std::size_t i = r + 1; i < n; ++i)
        out.phase[i] = out.phase[i - 1] + 0.5 * dq * (out.gradient[i - 1] + out.gradient[i]);
    for (std::size_t i = r; i-- > 0;)
        out.phase[i] = out.phase[i + 1] - 0.5 * dq * (out.gradient[i] + out.gradient[i + 1]);
    return out;
}

ConditionalFrame conditional_state(const GridWavefunction& psi, const MarginalModulus& modulus,
                                   const MarginalPhase& phase) {
    const std::size_t n = psi.grid.n_points;
    ConditionalFrame f;
    f.grid = psi.grid;
    f.t = psi.t;
    f.chi_mod = modulus.chi_mod;
    f.phase_s = phase.phase;
    f.valid = modulus.valid;
    f.gauge_reference = phase.reference;
    f.cond_g.assign(n, 0.0);
    f.cond_e.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!f.valid[i]) continue;
        const cplx chi = std::polar(f.chi_mod[i], f.phase_s[i]);
        f.cond_g[i] = psi.comp_g[i] / chi;
        f.cond_e[i] = psi.comp_e[i] / chi;
    }
    extrapolate_masked_generic<cplx>(f.cond_g, f.valid);
    extrapolate_masked_generic<cplx>(f.cond_e, f.valid);
    return f;
}

QboCoefficients qbo_project(const ConditionalFrame& frame, const ModelParams& params) {
    const std::size_t n = frame.grid.n_points;
    QboCoefficients c{std::vector<cplx>(n), std::vector<cplx>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = qbo_eigenvectors(params, frame.grid.q(i));
        c.coeff_g[i] = v.lower[0] * frame.cond_g[i] + v.lower[1] * frame.cond_e[i];
        c.coeff_e[i] = v.upper[0] * frame.cond_g[i] + v.upper[1] * frame.cond_e[i];
    }
    return c;
}

ConditionalFrame invert_frame(const GridWavefunction& psi, const ModelParams& params,
                              const InversionOptions& opts, Spectral& spectral) {
    const auto modulus = marginal_modulus(psi, opts.mask_threshold);
    const auto phase = marginal_phase(psi, modulus, spectral);
    auto frame = conditional_state(psi, modulus, phase);
    auto coeffs = qbo_project(frame, params);
    frame.coeff_g = std::move(coeffs.coeff_g);
    frame.coeff_e = std::move(coeffs.coeff_e);
    return frame;
}

std::vector<double> surface_wbo(const ConditionalFrame& frame, const ModelParams& params) {
    const std::size_t n = frame.grid.n_points;
    const auto coeffs = frame.coeff_e.empty() ? qbo_project(frame, params)
                                              : QboCoefficients{frame.coeff_g, frame.coeff_e};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = qbo_energies(params, frame.grid.q(i));
        out[i] = std::norm(coeffs.coeff_g[i]) * e.lower + std::norm(coeffs.coeff_e[i]) * e.upper;
    }
    extrapolate_masked(out, frame.valid);
    return out;
}

std::vector<double> surface_kin(const ConditionalFrame& frame, int stencil_order) {
    const std::size_t n = frame.grid.n_points;
    const double h = frame.grid.dq();
    std::vector<cplx> dg(n), de(n);
    first_derivative<cplx>(frame.cond_g, h, stencil_order, dg);
    first_derivative<cplx>(frame.cond_e, h, stencil_order, de);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (std::norm(dg[i]) + std::norm(de[i]));
    extrapolate_masked(out, frame.valid);
    return out;
}

namespace {

void require_same_gauge(const ConditionalFrame& a, const ConditionalFrame& b) {
    if (a.gauge_reference != b.gauge_reference) {
        std::ostringstream os;
        os << "gauge reference mismatch between frames at t=" << a.t << " (node "
           << a.gauge_reference << ") and t=" << b.t << " (node " << b.gauge_reference << ")";
        throw InvariantViolation(os.str());
    }
}

cplx overlap(const ConditionalFrame& a, const ConditionalFrame& b, std::size_t i) {
    return std::conj(a.cond_g[i]) * b.cond_g[i] + std::conj(a.cond_e[i]) * b.cond_e[i];
}

GaugeDependentTerm finish_gd(std::vector<cplx> log_rate, const std::vector<std::uint8_t>& valid) {
    // log_rate approximates <Phi|dPhi/dt>; E_GD = Re(-i log_rate) = Im(log_rate).
    GaugeDependentTerm out;
    out.value.resize(log_rate.size());
    for (std::size_t i = 0; i < log_rate.size(); ++i) {
        out.value[i] = std::imag(log_rate[i]);
        if (valid[i]) out.max_imag = std::max(out.max_imag, std::abs(std::real(log_rate[i])));
    }
    extrapolate_masked(out.value, valid);
    return out;
}

}  // namespace

GaugeDependentTerm surface_gd(const ConditionalFrame& prev, const ConditionalFrame& frame,
                              const ConditionalFrame& next, double dt_snap) {
    require_same_gauge(prev, frame);
    require_same_gauge(frame, next);
    const std::size_t n = frame.grid.n_points;
    std::vector<cplx> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx fwd = overlap(frame, next, i);
        const cplx bwd = overlap(frame, prev, i);
        // log(fwd) - log(bwd) with the branch taken on the ratio.
        rate[i] = std::log(fwd / bwd) / (2.0 * dt_snap);
    }
    return finish_gd(std::move(rate), frame.valid);
}

GaugeDependentTerm surface_gd_one_sided(const ConditionalFrame& frame,
                                        const ConditionalFrame& near,
                                        const ConditionalFrame& far, double step) {
    require_same_gauge(frame, near);
    require_same_gauge(frame, far);
    const std::size_t n = frame.grid.n_points;
    std::vector<cplx> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx l1 = std::log(overlap(frame, near, i));
        // Unwrap log <Phi_0|Phi_2> around 2 log <Phi_0|Phi_1>.
        const cplx o2 = overlap(frame, far, i);
        const cplx l2 = 2.0 * l1 + std::log(o2 / std::exp(2.0 * l1));
        rate[i] = (4.0 * l1 - l2) / (2.0 * step);
    }
    return finish_gd(std::move(rate), frame.valid);
}

std::vector<double> assemble_qtdpes(std::span<const double> wbo, std::span<const double> kin,
                                    std::span<const double> gd) {
    std::vector<double> out(wbo.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = wbo[i] + kin[i] + gd[i];
    return out;
}

std::vector<double> WboForceTerms::weighted() const {
    std::vector<double> out(lower_gradient.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lower_gradient[i] + gap_gradient[i];
    return out;
}

std::vector<double> WboForceTerms::total() const {
    auto out = weighted();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += population_gradient[i];
    return out;
}

WboForceTerms wbo_force_terms(const ConditionalFrame& frame, const ModelParams& params,
                              int stencil_order) {
    const std::size_t n = frame.grid.n_points;
    const auto coeffs = frame.coeff_e.empty() ? qbo_project(frame, params)
                                              : QboCoefficients{frame.coeff_g, frame.coeff_e};
    std::vector<double> pop(n), dpop(n);
    for (std::size_t i = 0; i < n; ++i) pop[i] = std::norm(coeffs.coeff_e[i]);
    first_derivative<double>(pop, frame.grid.dq(), stencil_order, dpop);
    WboForceTerms t{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double q = frame.grid.q(i);
        const auto e = qbo_energies(params, q);
        const auto de = qbo_energy_gradients(params, q);
        t.lower_gradient[i] = -de.lower;
        t.gap_gradient[i] = -pop[i] * (de.upper - de.lower);
        t.population_gradient[i] = -dpop[i] * (e.upper - e.lower);
    }
    extrapolate_masked(t.lower_gradient, frame.valid);
    extrapolate_masked(t.gap_gradient, frame.valid);
    extrapolate_masked(t.population_gradient, frame.valid);
    return t;
}

const ScalarSurfaceMovie& SurfaceSet::component(const std::string& name) const {
    if (name == "wbo") return wbo;
    if (name == "kin") return kin;
    if (name == "gd") return gd;
    if (name == "qtdpes") return qtdpes;
    if (name == "density") return density;
    if (name == "pop_e") return pop_e;
    if (name == "phase") return phase;
    throw ConfigError("unknown surface component '" + name + "'");
}

namespace {

bool near_singular_instant(const ModelParams& params, double t, double window) {
    if (window <= 0.0) return false;
    const double period = vacuum_rabi_period(params);
    if (!std::isfinite(period)) return false;
    // Distance to the nearest (m + 1/2) * period.
    const double x = t / period - 0.5;
    return std::abs(x - std::round(x)) * period <= window;
}

}  // namespace

SurfaceSet invert_series(const SnapshotSeries& series, const InversionOptions& opts) {
    if (series.frames.empty()) throw ConfigError("snapshot series is empty");
    const Grid& grid = series.grid;
    const std::size_t n = grid.n_points;
    const std::size_t count = series.frames.size();
    const ModelParams& params = series.params;

    SurfaceSet set;
    set.params = params;
    set.grid = grid;
    set.times = series.times();
    set.mask_threshold = opts.mask_threshold;
    for (auto* m : {&set.wbo, &set.kin, &set.gd, &set.qtdpes, &set.density, &set.pop_e, &set.phase,
                    &set.force_lower, &set.force_gap, &set.force_population})
        *m = ScalarSurfaceMovie::with_times(grid, set.times);
    set.reports.resize(count);
    set.gauge_reference.resize(count);

    Spectral spectral(grid);
    std::vector<ConditionalFrame> frames;
    frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        frames.push_back(invert_frame(series.frames[k], params, opts, spectral));
        const auto& f = frames.back();
        const auto wbo = surface_wbo(f, params);
        const auto kin = surface_kin(f, opts.stencil_order);
        const auto forces = wbo_force_terms(f, params, opts.stencil_order);
        std::vector<double> pop(n);
        for (std::size_t i = 0; i < n; ++i) pop[i] = std::norm(f.coeff_e[i]);
        extrapolate_masked(pop, f.valid);
        std::size_t masked = 0;
        for (std::size_t i = 0; i < n; ++i) {
            set.wbo.frame(k)[i] = wbo[i];
            set.kin.frame(k)[i] = kin[i];
            set.density.frame(k)[i] = f.chi_mod[i] * f.chi_mod[i];
            set.pop_e.frame(k)[i] = pop[i];
            set.phase.frame(k)[i] = f.phase_s[i];
            set.force_lower.frame(k)[i] = forces.lower_gradient[i];
            set.force_gap.frame(k)[i] = forces.gap_gradient[i];
            set.force_population.frame(k)[i] = forces.population_gradient[i];
            masked += f.valid[i] ? 0 : 1;
        }
        for (auto* m : {&set.wbo, &set.kin, &set.gd, &set.qtdpes, &set.density, &set.pop_e,
                        &set.phase, &set.force_lower, &set.force_gap, &set.force_population})
            std::copy(f.valid.begin(), f.valid.end(), m->mask.begin() + static_cast<long>(k * n));
        set.gauge_reference[k] = f.gauge_reference;
        auto& rep = set.reports[k];
        rep.t = f.t;
        rep.masked_fraction = static_cast<double>(masked) / static_cast<double>(n);
        if (near_singular_instant(params, f.t, opts.singular_window)) {
            rep.trusted = false;
            rep.issue = "inside singular window";
        }
    }

    // Second pass: E_GD from neighbouring frames.
    const double h = series.stride;
    for (std::size_t k = 0; k < count; ++k) {
        GaugeDependentTerm gd;
        try {
            if (count == 1) {
                gd.value.assign(n, 0.0);
            } else if (count == 2) {
                // Only a first-order estimate is possible; reuse the centered
                // formula with the frame itself as the missing neighbour.
                const auto& other = frames[k == 0 ? 1 : 0];
                gd = k == 0 ? surface_gd(frames[0], frames[0], other, 0.5 * h)
                            : surface_gd(other, frames[1], frames[1], 0.5 * h);
            } else if (k == 0) {
                gd = surface_gd_one_sided(frames[0], frames[1], frames[2], h);
            } else if (k + 1 == count) {
                gd = surface_gd_one_sided(frames[k], frames[k - 1], frames[k - 2], -h);
            } else {
                gd = surface_gd(frames[k - 1], frames[k], frames[k + 1], h);
            }
        } catch (const InvariantViolation& e) {
            gd.value.assign(n, 0.0);
            auto& rep = set.reports[k];
            rep.trusted = false;
            rep.issue += (rep.issue.empty() ? "" : "; ") + std::string(e.what());
        }
        set.reports[k].gd_max_imag = gd.max_imag;
        const auto wbo = set.wbo.frame(k);
        const auto kin = set.kin.frame(k);
        const auto total = assemble_qtdpes(wbo, kin, gd.value);
        std::copy(gd.value.begin(), gd.value.end(), set.gd.frame(k).begin());
        std::copy(total.begin(), total.end(), set.qtdpes.frame(k).begin());
    }
    return set;
}

}  // namespace xfp
