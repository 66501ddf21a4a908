#include "xfphoton/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "xfphoton/errors.hpp"

namespace xfp {

std::string method_name(Method m) {
    switch (m) {
        case Method::mte_diabatic: return "mte-diabatic";
        case Method::mte_qbo: return "mte-qbo";
        case Method::wbo: return "wbo";
        case Method::qtdpes: return "qtdpes";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "mte-diabatic" || name == "mte") return Method::mte_diabatic;
    if (name == "mte-qbo") return Method::mte_qbo;
    if (name == "wbo") return Method::wbo;
    if (name == "qtdpes") return Method::qtdpes;
    throw ConfigError("unknown trajectory method '" + name + "'");
}

bool is_surface_method(Method m) { return m == Method::wbo || m == Method::qtdpes; }

std::size_t Ensemble::diverged_count() const {
    return static_cast<std::size_t>(std::count_if(trajectories.begin(), trajectories.end(),
                                                  [](const Trajectory& t) { return t.diverged; }));
}

Ensemble wigner_sample(const ModelParams& params, std::size_t n, std::uint64_t seed, Basis basis) {
    params.validate();
    if (n == 0) throw ConfigError("ensemble size must be at least 1");
    const double w = params.omega_c;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sq = std::sqrt(0.5 / w);
    const double sp = std::sqrt(0.5 * w);
    Ensemble ens;
    ens.seed = seed;
    ens.trajectories.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = ens.trajectories[i];
        // q then p, strictly in index order.
        t.q = sq * unit(rng);
        t.p = sp * unit(rng);
        t.id = i;
        t.basis = basis;
        if (basis == Basis::diabatic) {
            const auto v = qbo_eigenvectors(params, t.q);
            t.c_g = v.upper[0];
            t.c_e = v.upper[1];
        } else {
            t.c_g = 0.0;
            t.c_e = 1.0;
        }
    }
    return ens;
}

double mte_force_diabatic(const Trajectory& traj, const ModelParams& params) {
    const double w = params.omega_c;
    return -w * w * traj.q - 2.0 * params.bilinear() * std::real(std::conj(traj.c_g) * traj.c_e);
}

double mte_force_qbo(const Trajectory& traj, const ModelParams& params) {
    const auto e = qbo_energies(params, traj.q);
    const auto de = qbo_energy_gradients(params, traj.q);
    const double d = nac_first_order(params, traj.q);
    return -std::norm(traj.c_g) * de.lower - std::norm(traj.c_e) * de.upper -
           2.0 * std::real(std::conj(traj.c_g) * traj.c_e) * (e.upper - e.lower) * d;
}

double mte_energy(const Trajectory& traj, const ModelParams& params) {
    double el;
    if (traj.basis == Basis::qbo) {
        const auto e = qbo_energies(params, traj.q);
        el = std::norm(traj.c_g) * e.lower + std::norm(traj.c_e) * e.upper;
    } else {
        const auto v = qbo_hamiltonian(params, traj.q);
        el = v[0] * std::norm(traj.c_g) + v[3] * std::norm(traj.c_e) +
             2.0 * v[1] * std::real(std::conj(traj.c_g) * traj.c_e);
    }
    return 0.5 * traj.p * traj.p + el;
}

namespace {

using Coeffs = std::array<cplx, 2>;

template <class Rhs>
Coeffs rk4(Coeffs c, double h, int substeps, const Rhs& rhs) {
    const double tau = h / substeps;
    double s = 0.0;
    for (int k = 0; k < substeps; ++k) {
        auto add = [](const Coeffs& a, const Coeffs& b, double f) {
            return Coeffs{a[0] + f * b[0], a[1] + f * b[1]};
        };
        const Coeffs k1 = rhs(s, c);
        const Coeffs k2 = rhs(s + 0.5 * tau, add(c, k1, 0.5 * tau));
        const Coeffs k3 = rhs(s + 0.5 * tau, add(c, k2, 0.5 * tau));
        const Coeffs k4 = rhs(s + tau, add(c, k3, tau));
        for (int i = 0; i < 2; ++i) c[i] += tau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        s += tau;
    }
    return c;
}

void record_drift(Trajectory& traj, const Coeffs& c) {
    const double before = std::norm(traj.c_g) + std::norm(traj.c_e);
    const double after = std::norm(c[0]) + std::norm(c[1]);
    traj.max_step_drift = std::max(traj.max_step_drift, std::abs(after - before));
    traj.c_g = c[0];
    traj.c_e = c[1];
}

void check_substeps(int substeps) {
    if (substeps < 1) throw ConfigError("rk4 substeps must be at least 1");
}

}  // namespace

void mte_step_diabatic(Trajectory& traj, const ModelParams& params, double dt, int substeps) {
    check_substeps(substeps);
    traj.p += 0.5 * dt * mte_force_diabatic(traj, params);
    const double q0 = traj.q;
    traj.q += dt * traj.p;
    const auto v = qbo_hamiltonian(params, 0.5 * (q0 + traj.q));
    const cplx mi(0.0, -1.0);
    const auto c = rk4({traj.c_g, traj.c_e}, dt, substeps, [&](double, const Coeffs& x) {
        return Coeffs{mi * (v[0] * x[0] + v[1] * x[1]), mi * (v[2] * x[0] + v[3] * x[1])};
    });
    record_drift(traj, c);
    traj.p += 0.5 * dt * mte_force_diabatic(traj, params);
}

void mte_step_qbo(Trajectory& traj, const ModelParams& params, double dt, int substeps) {
    check_substeps(substeps);
    traj.p += 0.5 * dt * mte_force_qbo(traj, params);
    const double q0 = traj.q;
    const double v = traj.p;
    traj.q += dt * v;
    const cplx mi(0.0, -1.0);
    const auto c = rk4({traj.c_g, traj.c_e}, dt, substeps, [&](double s, const Coeffs& x) {
        const double q = q0 + v * s;
        const auto e = qbo_energies(params, q);
        const double d = v * nac_first_order(params, q);
        return Coeffs{mi * e.lower * x[0] - d * x[1], mi * e.upper * x[1] + d * x[0]};
    });
    record_drift(traj, c);
    traj.p += 0.5 * dt * mte_force_qbo(traj, params);
}

double surface_force(const SurfaceField& field, double q, double t) { return field.force(q, t); }

void surface_step(Trajectory& traj, const SurfaceField& field, double t, double dt) {
    const double t1 = std::min(t + dt, field.t_end());
    traj.p += 0.5 * dt * field.force(traj.q, t);
    traj.q += dt * traj.p;
    traj.p += 0.5 * dt * field.force(traj.q, t1);
}

void MteDiabaticForces::step(Trajectory& traj, double, double dt) const {
    mte_step_diabatic(traj, params_, dt, substeps_);
}

void MteQboForces::step(Trajectory& traj, double, double dt) const {
    mte_step_qbo(traj, params_, dt, substeps_);
}

void SurfaceForces::step(Trajectory& traj, double t, double dt) const {
    surface_step(traj, *field_, t, dt);
}

namespace {

void advance_block(std::span<Trajectory> block, const ForceProvider& forces, double dt,
                   std::size_t step0, std::size_t n_steps, double q_limit) {
    for (auto& traj : block) {
        for (std::size_t s = 0; s < n_steps && !traj.diverged; ++s) {
            forces.step(traj, static_cast<double>(step0 + s) * dt, dt);
            const bool bad = !std::isfinite(traj.q) || !std::isfinite(traj.p) ||
                             (q_limit > 0.0 && std::abs(traj.q) > q_limit);
            if (bad) traj.diverged = true;
        }
    }
}

}  // namespace

void propagate_ensemble(Ensemble& ensemble, const ForceProvider& forces,
                        const EnsembleRunOptions& opts, const SnapshotCallback& on_snapshot) {
    const double dt = ensemble.dt;
    if (!(dt > 0.0)) throw ConfigError("ensemble dt must be positive");
    if (!(opts.snapshot_stride > 0.0)) throw ConfigError("observable stride must be positive");
    if (opts.t_final < 0.0) throw ConfigError("t_final must be non-negative");
    const double ratio = opts.snapshot_stride / dt;
    const auto per_stride = static_cast<std::size_t>(std::llround(ratio));
    if (per_stride == 0 || std::abs(ratio - static_cast<double>(per_stride)) > 1e-9 * ratio)
        throw ConfigError("observable stride must be an integer multiple of the ensemble dt");
    if (opts.t_final > forces.t_limit() + 1e-9 * std::max(1.0, opts.t_final)) {
        std::ostringstream os;
        os << "force provider covers t <= " << forces.t_limit() << " but t_final is "
           << opts.t_final;
        throw ConfigError(os.str());
    }
    const auto n_snap =
        static_cast<std::size_t>(std::floor(opts.t_final / opts.snapshot_stride + 1e-9));
    const unsigned workers = std::max(1u, opts.workers);
    auto& trajs = ensemble.trajectories;

    if (on_snapshot) on_snapshot(0.0, ensemble);
    for (std::size_t k = 0; k < n_snap; ++k) {
        const std::size_t step0 = k * per_stride;
        if (workers == 1 || trajs.size() < 2 * workers) {
            advance_block(trajs, forces, dt, step0, per_stride, opts.q_limit);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (trajs.size() + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(trajs.size(), lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(advance_block, std::span<Trajectory>(trajs.data() + lo, hi - lo),
                                  std::cref(forces), dt, step0, per_stride, opts.q_limit);
            }
            for (auto& th : pool) th.join();
        }
        if (on_snapshot) on_snapshot(static_cast<double>(step0 + per_stride) * dt, ensemble);
    }
}

}  // namespace xfp
