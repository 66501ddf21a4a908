#include "xfphoton/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfphoton/errors.hpp"

namespace xfp {

GridWavefunction init_state_qbo_excited(const ModelParams& params, const Grid& grid) {
    params.validate();
    grid.validate();
    const double w = params.omega_c;
    const double tail = std::max(harmonic_ground(w, grid.q_min), harmonic_ground(w, grid.q_max));
    if (tail > 1e-12)
        throw ConfigError("grid too narrow: initial Gaussian tail at boundary exceeds 1e-12");
    GridWavefunction psi(grid);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double q = grid.q(i);
        const double chi = harmonic_ground(w, q);
        const auto v = qbo_eigenvectors(params, q);
        psi.comp_g[i] = chi * v.upper[0];
        psi.comp_e[i] = chi * v.upper[1];
    }
    return psi;
}

namespace {

std::vector<cplx> kinetic_factor(const std::vector<double>& k, double tau) {
    std::vector<cplx> f(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) f[i] = std::polar(1.0, -0.5 * k[i] * k[i] * tau);
    return f;
}

}  // namespace

DiabaticPropagator::DiabaticPropagator(const ModelParams& params, const Grid& grid, double dt)
    : dt_(dt), spectral_(grid) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    k_half_ = kinetic_factor(spectral_.wavenumbers(), 0.5 * dt);
    k_full_ = kinetic_factor(spectral_.wavenumbers(), dt);
    u_.resize(grid.n_points);
    // V = c I + a sigma_z + b sigma_x; exp(-i V dt) in closed form.
    const double a = -0.5 * params.gap();
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double q = grid.q(i);
        const double c = params.mean_level() + 0.5 * params.omega_c * params.omega_c * q * q;
        const double b = params.bilinear() * q;
        const double r = std::hypot(a, b);
        const double cs = std::cos(r * dt);
        const double sn = std::sin(r * dt) / r;
        const cplx phase = std::polar(1.0, -c * dt);
        const cplx I(0.0, 1.0);
        u_[i] = {phase * (cs - I * sn * a), phase * (-I * sn * b), phase * (-I * sn * b),
                 phase * (cs + I * sn * a)};
    }
}

void DiabaticPropagator::kinetic(GridWavefunction& psi, const std::vector<cplx>& factor) {
    spectral_.apply_in_k(psi.comp_g, factor);
    spectral_.apply_in_k(psi.comp_e, factor);
}

void DiabaticPropagator::potential(GridWavefunction& psi) {
    for (std::size_t i = 0; i < u_.size(); ++i) {
        const cplx g = psi.comp_g[i], e = psi.comp_e[i];
        const auto& u = u_[i];
        psi.comp_g[i] = u[0] * g + u[1] * e;
        psi.comp_e[i] = u[2] * g + u[3] * e;
    }
}

void DiabaticPropagator::advance(GridWavefunction& psi, std::size_t n_steps) {
    if (n_steps == 0) return;
    kinetic(psi, k_half_);
    for (std::size_t s = 0; s < n_steps; ++s) {
        potential(psi);
        kinetic(psi, s + 1 == n_steps ? k_half_ : k_full_);
    }
    psi.t += static_cast<double>(n_steps) * dt_;
}

GridWavefunction split_operator_step(GridWavefunction psi, const ModelParams& params, double dt) {
    DiabaticPropagator prop(params, psi.grid, dt);
    prop.advance(psi, 1);
    return psi;
}

std::vector<double> SnapshotSeries::times() const {
    std::vector<double> t(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) t[i] = frames[i].t;
    return t;
}

std::size_t steps_per_stride(double dt, double stride) {
    if (!(dt > 0.0) || !(stride > 0.0)) throw ConfigError("dt and snapshot stride must be positive");
    const double ratio = stride / dt;
    const double r = std::round(ratio);
    if (r < 1.0 || std::abs(ratio - r) > 1e-6 * r)
        throw ConfigError("snapshot stride must be an integer multiple of dt");
    return static_cast<std::size_t>(r);
}

namespace {

std::size_t snapshot_count(double t_final, double stride) {
    if (!(t_final >= 0.0)) throw ConfigError("t_final must be non-negative");
    return static_cast<std::size_t>(std::floor(t_final / stride + 1e-9)) + 1;
}

void check_edges(const GridWavefunction& psi, double tol) {
    const double edge = std::max(edge_amplitude(psi.grid, psi.comp_g),
                                 edge_amplitude(psi.grid, psi.comp_e));
    if (edge > tol) {
        std::ostringstream os;
        os << "boundary amplitude " << edge << " exceeds " << tol << " at t=" << psi.t
           << "; widen the grid";
        throw InvariantViolation(os.str());
    }
}

}  // namespace

SnapshotSeries propagate_exact(const ModelParams& params, GridWavefunction psi0,
                               const PropagationOptions& opts) {
    params.validate();
    psi0.grid.validate();
    const std::size_t per = steps_per_stride(opts.dt, opts.snapshot_stride);
    const std::size_t count = snapshot_count(opts.t_final, opts.snapshot_stride);
    SnapshotSeries out{params, psi0.grid, opts.dt, opts.snapshot_stride, {}};
    out.frames.reserve(count);
    DiabaticPropagator prop(params, psi0.grid, opts.dt);
    const double t0 = psi0.t;
    const double norm0 = psi0.norm();
    check_edges(psi0, opts.edge_tolerance);
    out.frames.push_back(psi0);
    GridWavefunction psi = std::move(psi0);
    for (std::size_t k = 1; k < count; ++k) {
        prop.advance(psi, per);
        psi.t = t0 + static_cast<double>(k) * opts.snapshot_stride;
        check_edges(psi, opts.edge_tolerance);
        out.frames.push_back(psi);
    }
    const double drift = std::abs(psi.norm() - norm0);
    if (drift > opts.norm_tolerance) {
        std::ostringstream os;
        os << "norm drift " << drift << " exceeds " << opts.norm_tolerance;
        throw InvariantViolation(os.str());
    }
    return out;
}

SnapshotSeries propagate_exact(const ModelParams& params, const Grid& grid,
                               const PropagationOptions& opts) {
    return propagate_exact(params, init_state_qbo_excited(params, grid), opts);
}

std::vector<ScalarWavefunction> propagate_on_surface(const SurfaceField& field,
                                                     ScalarWavefunction chi0,
                                                     const PropagationOptions& opts) {
    const Grid& grid = chi0.grid;
    if (!(grid == field.grid())) throw ConfigError("wavefunction and surface grids differ");
    const std::size_t per = steps_per_stride(opts.dt, opts.snapshot_stride);
    const std::size_t count = snapshot_count(opts.t_final, opts.snapshot_stride);
    const double t0 = chi0.t;
    const double t_end = t0 + static_cast<double>(count - 1) * opts.snapshot_stride;
    if (t0 < field.t_begin() - 1e-9 || t_end > field.t_end() + 1e-9) {
        std::ostringstream os;
        os << "surface covers [" << field.t_begin() << ", " << field.t_end()
           << "] but the run needs [" << t0 << ", " << t_end << "]";
        throw ConfigError(os.str());
    }
    const std::size_t n = grid.n_points;
    Spectral spectral(grid);
    const auto k_half = kinetic_factor(spectral.wavenumbers(), 0.5 * opts.dt);
    const auto k_full = kinetic_factor(spectral.wavenumbers(), opts.dt);

    std::vector<ScalarWavefunction> out;
    out.reserve(count);
    out.push_back(chi0);
    ScalarWavefunction chi = std::move(chi0);
    std::vector<double> v(n), rate(n);
    std::vector<cplx> phase(n), ratio(n);
    const double dt = opts.dt;
    std::size_t segment = static_cast<std::size_t>(-1);
    std::size_t step = 0;
    for (std::size_t k = 1; k < count; ++k) {
        spectral.apply_in_k(chi.psi, k_half);
        for (std::size_t s = 0; s < per; ++s, ++step) {
            // V is linear in t inside a frame interval, so the per-step phase
            // factors form a geometric sequence there.
            const double tm = std::min(t0 + (static_cast<double>(step) + 0.5) * dt, field.t_end());
            const std::size_t seg = field.segment(tm);
            if (seg != segment) {
                segment = seg;
                field.potential(tm, v);
                field.potential_rate(tm, rate);
                for (std::size_t i = 0; i < n; ++i) {
                    phase[i] = std::polar(1.0, -v[i] * dt);
                    ratio[i] = std::polar(1.0, -rate[i] * dt * dt);
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                chi.psi[i] *= phase[i];
                phase[i] *= ratio[i];
            }
            spectral.apply_in_k(chi.psi, s + 1 == per ? k_half : k_full);
        }
        chi.t = t0 + static_cast<double>(k) * opts.snapshot_stride;
        out.push_back(chi);
    }
    return out;
}

GridWavefunction qbo_to_diabatic(const ModelParams& params, const std::vector<cplx>& lower,
                                 const std::vector<cplx>& upper, const Grid& grid, double t) {
    GridWavefunction psi(grid);
    psi.t = t;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const auto v = qbo_eigenvectors(params, grid.q(i));
        psi.comp_g[i] = lower[i] * v.lower[0] + upper[i] * v.upper[0];
        psi.comp_e[i] = lower[i] * v.lower[1] + upper[i] * v.upper[1];
    }
    return psi;
}

namespace {

class QboPropagator {
public:
    QboPropagator(const ModelParams& params, const Grid& grid, double dt)
        : dt_(dt), spectral_(grid), n_(grid.n_points) {
        k_half_ = kinetic_factor(spectral_.wavenumbers(), 0.5 * dt);
        k_full_ = kinetic_factor(spectral_.wavenumbers(), dt);
        diag_half_g_.resize(n_);
        diag_half_e_.resize(n_);
        d_ge_.resize(n_);
        D_ge_.resize(n_);
        D_eg_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double q = grid.q(i);
            const auto e = qbo_energies(params, q);
            const auto d2 = nac_second_order(params, q);
            diag_half_g_[i] = std::polar(1.0, -(e.lower - d2.gg) * 0.5 * dt);
            diag_half_e_[i] = std::polar(1.0, -(e.upper - d2.ee) * 0.5 * dt);
            d_ge_[i] = nac_first_order(params, q);
            D_ge_[i] = d2.ge;
            D_eg_[i] = d2.eg;
        }
        for (auto* v : {&k1g_, &k1e_, &k2g_, &k2e_, &k3g_, &k3e_, &k4g_, &k4e_, &tg_, &te_, &dg_, &de_})
            v->resize(n_);
    }

    void advance(std::vector<cplx>& g, std::vector<cplx>& e, std::size_t n_steps) {
        if (n_steps == 0) return;
        spectral_.apply_in_k(g, k_half_);
        spectral_.apply_in_k(e, k_half_);
        for (std::size_t s = 0; s < n_steps; ++s) {
            diagonal(g, e);
            coupling_rk4(g, e);
            diagonal(g, e);
            const auto& f = s + 1 == n_steps ? k_half_ : k_full_;
            spectral_.apply_in_k(g, f);
            spectral_.apply_in_k(e, f);
        }
    }

private:
    void diagonal(std::vector<cplx>& g, std::vector<cplx>& e) const {
        for (std::size_t i = 0; i < n_; ++i) {
            g[i] *= diag_half_g_[i];
            e[i] *= diag_half_e_[i];
        }
    }

    // d/dt chi = -i W chi with W_ge = -(D_ge + d_ge d/dq), W_eg = -(D_eg + d_eg d/dq).
    void rhs(const std::vector<cplx>& g, const std::vector<cplx>& e, std::vector<cplx>& out_g,
             std::vector<cplx>& out_e) {
        spectral_.derivative(g, dg_);
        spectral_.derivative(e, de_);
        const cplx I(0.0, 1.0);
        for (std::size_t i = 0; i < n_; ++i) {
            out_g[i] = I * (D_ge_[i] * e[i] + d_ge_[i] * de_[i]);
            out_e[i] = I * (D_eg_[i] * g[i] - d_ge_[i] * dg_[i]);
        }
    }

    void coupling_rk4(std::vector<cplx>& g, std::vector<cplx>& e) {
        const double h = dt_;
        rhs(g, e, k1g_, k1e_);
        for (std::size_t i = 0; i < n_; ++i) {
            tg_[i] = g[i] + 0.5 * h * k1g_[i];
            te_[i] = e[i] + 0.5 * h * k1e_[i];
        }
        rhs(tg_, te_, k2g_, k2e_);
        for (std::size_t i = 0; i < n_; ++i) {
            tg_[i] = g[i] + 0.5 * h * k2g_[i];
            te_[i] = e[i] + 0.5 * h * k2e_[i];
        }
        rhs(tg_, te_, k3g_, k3e_);
        for (std::size_t i = 0; i < n_; ++i) {
            tg_[i] = g[i] + h * k3g_[i];
            te_[i] = e[i] + h * k3e_[i];
        }
        rhs(tg_, te_, k4g_, k4e_);
        for (std::size_t i = 0; i < n_; ++i) {
            g[i] += h / 6.0 * (k1g_[i] + 2.0 * k2g_[i] + 2.0 * k3g_[i] + k4g_[i]);
            e[i] += h / 6.0 * (k1e_[i] + 2.0 * k2e_[i] + 2.0 * k3e_[i] + k4e_[i]);
        }
    }

    double dt_;
    Spectral spectral_;
    std::size_t n_;
    std::vector<cplx> k_half_, k_full_, diag_half_g_, diag_half_e_;
    std::vector<double> d_ge_, D_ge_, D_eg_;
    std::vector<cplx> k1g_, k1e_, k2g_, k2e_, k3g_, k3e_, k4g_, k4e_, tg_, te_, dg_, de_;
};

}  // namespace

SnapshotSeries propagate_qbo_basis(const ModelParams& params, const Grid& grid,
                                   const PropagationOptions& opts) {
    params.validate();
    init_state_qbo_excited(params, grid);  // grid-width check
    const std::size_t per = steps_per_stride(opts.dt, opts.snapshot_stride);
    const std::size_t count = snapshot_count(opts.t_final, opts.snapshot_stride);
    std::vector<cplx> lower(grid.n_points, 0.0), upper(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i)
        upper[i] = harmonic_ground(params.omega_c, grid.q(i));

    SnapshotSeries out{params, grid, opts.dt, opts.snapshot_stride, {}};
    out.frames.reserve(count);
    out.frames.push_back(qbo_to_diabatic(params, lower, upper, grid, 0.0));
    QboPropagator prop(params, grid, opts.dt);
    for (std::size_t k = 1; k < count; ++k) {
        prop.advance(lower, upper, per);
        auto psi = qbo_to_diabatic(params, lower, upper, grid,
                                   static_cast<double>(k) * opts.snapshot_stride);
        check_edges(psi, opts.edge_tolerance);
        out.frames.push_back(std::move(psi));
    }
    return out;
}

}  // namespace xfp
