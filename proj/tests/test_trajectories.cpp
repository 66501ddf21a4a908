#include <cmath>

#include "doctest.h"
#include "xfphoton/errors.hpp"
#include "xfphoton/surface.hpp"
#include "xfphoton/trajectories.hpp"

using namespace xfp;

namespace {

// qBO channel amplitudes expressed in the diabatic basis.
Trajectory to_diabatic(const Trajectory& t, const ModelParams& p) {
    const auto v = qbo_eigenvectors(p, t.q);
    Trajectory out = t;
    out.basis = Basis::diabatic;
    out.c_g = t.c_g * v.lower[0] + t.c_e * v.upper[0];
    out.c_e = t.c_g * v.lower[1] + t.c_e * v.upper[1];
    return out;
}

}  // namespace

TEST_CASE("method names round trip") {
    for (auto m : {Method::mte_diabatic, Method::mte_qbo, Method::wbo, Method::qtdpes})
        CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("mte") == Method::mte_diabatic);
    CHECK(is_surface_method(Method::wbo));
    CHECK_FALSE(is_surface_method(Method::mte_qbo));
    CHECK_THROWS_AS(parse_method("ehrenfest"), ConfigError);
}

TEST_CASE("Wigner sampling reproduces the vacuum moments") {
    ModelParams p;
    const auto ens = wigner_sample(p, 40000, 7);
    double q2 = 0.0, p2 = 0.0;
    for (const auto& t : ens.trajectories) {
        q2 += t.q * t.q;
        p2 += t.p * t.p;
    }
    q2 /= ens.size();
    p2 /= ens.size();
    const double q2_ref = 1.0 / (2.0 * p.omega_c), p2_ref = p.omega_c / 2.0;
    // standard error of a second moment of a Gaussian is sqrt(2/n) * variance
    CHECK(std::abs(q2 - q2_ref) <= 5.0 * std::sqrt(2.0 / ens.size()) * q2_ref);
    CHECK(std::abs(p2 - p2_ref) <= 5.0 * std::sqrt(2.0 / ens.size()) * p2_ref);

    const auto again = wigner_sample(p, 40000, 7);
    CHECK(again.trajectories[123].q == ens.trajectories[123].q);
    CHECK(again.trajectories[39999].p == ens.trajectories[39999].p);
    const auto other = wigner_sample(p, 10, 8);
    CHECK(other.trajectories[0].q != ens.trajectories[0].q);
}

TEST_CASE("sampled coefficients start on the upper qBO state") {
    ModelParams p;
    const auto dia = wigner_sample(p, 50, 3, Basis::diabatic);
    const auto qbo = wigner_sample(p, 50, 3, Basis::qbo);
    for (std::size_t k = 0; k < 50; ++k) {
        const auto& t = dia.trajectories[k];
        const auto v = qbo_eigenvectors(p, t.q);
        CHECK(std::abs(t.c_g - v.upper[0]) < 1e-15);
        CHECK(std::abs(t.c_e - v.upper[1]) < 1e-15);
        CHECK(qbo.trajectories[k].q == t.q);
        CHECK(std::abs(qbo.trajectories[k].c_e - 1.0) < 1e-15);
    }
}

TEST_CASE("mean-field forces agree between the two bases") {
    ModelParams p;
    p.g_coupling = 0.05;
    Trajectory t;
    t.basis = Basis::qbo;
    for (double q : {-3.0, -0.4, 0.0, 1.1, 4.5}) {
        t.q = q;
        t.c_g = cplx(0.6, 0.1);
        t.c_e = cplx(-0.2, std::sqrt(1.0 - 0.36 - 0.01 - 0.04));
        const auto d = to_diabatic(t, p);
        CHECK(mte_force_qbo(t, p) == doctest::Approx(mte_force_diabatic(d, p)).epsilon(1e-10));
        CHECK(mte_energy(t, p) == doctest::Approx(mte_energy(d, p)).epsilon(1e-12));
    }
}

TEST_CASE("diabatic force is minus the gradient of the mean-field energy") {
    ModelParams p;
    Trajectory t;
    t.c_g = cplx(0.3, 0.4);
    t.c_e = cplx(0.0, std::sqrt(0.75));
    for (double q : {-2.0, 0.5, 3.0}) {
        const double h = 1e-5;
        Trajectory a = t, b = t;
        a.q = q + h;
        b.q = q - h;
        t.q = q;
        const double fd = -(mte_energy(a, p) - mte_energy(b, p)) / (2 * h);
        CHECK(mte_force_diabatic(t, p) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("uncoupled trajectories are harmonic") {
    ModelParams p;
    p.g_coupling = 0.0;
    Trajectory t;
    t.q = 1.2;
    t.p = -0.3;
    const double dt = 0.02;
    const int steps = 1000;
    for (int k = 0; k < steps; ++k) mte_step_diabatic(t, p, dt);
    const double w = p.omega_c, time = dt * steps;
    const double q_ref = 1.2 * std::cos(w * time) - 0.3 / w * std::sin(w * time);
    CHECK(std::abs(t.q - q_ref) <= 1e-4);
    CHECK(std::abs(std::norm(t.c_e) - 1.0) <= 1e-12);
}

TEST_CASE("MTE conserves energy and norm, and both bases agree") {
    ModelParams p;
    p.g_coupling = 0.05;
    const auto ens = wigner_sample(p, 1, 11, Basis::diabatic);
    Trajectory dia = ens.trajectories[0];
    Trajectory qbo = wigner_sample(p, 1, 11, Basis::qbo).trajectories[0];
    const double e0 = mte_energy(dia, p);
    for (int k = 0; k < 5000; ++k) {
        mte_step_diabatic(dia, p, 0.02);
        mte_step_qbo(qbo, p, 0.02);
    }
    CHECK(std::abs(mte_energy(dia, p) - e0) <= 1e-4);
    CHECK(std::abs(std::norm(dia.c_g) + std::norm(dia.c_e) - 1.0) <= 1e-6);
    CHECK(std::abs(std::norm(qbo.c_g) + std::norm(qbo.c_e) - 1.0) <= 1e-6);
    CHECK(dia.max_step_drift <= 1e-8);
    const auto back = to_diabatic(qbo, p);
    CHECK(std::abs(back.q - dia.q) <= 1e-4);
    CHECK(std::abs(std::norm(back.c_e) - std::norm(dia.c_e)) <= 1e-4);
}

TEST_CASE("surface steps on a static harmonic surface follow the oscillator") {
    ModelParams p;
    Grid grid;
    const auto movie = ScalarSurfaceMovie::static_harmonic(grid, p.omega_c, {0.0, 50.0, 100.0});
    SurfaceField field(movie, p.omega_c);
    CHECK(surface_force(field, 1.5, 20.0) == doctest::Approx(-p.omega_c * p.omega_c * 1.5).epsilon(1e-6));
    Trajectory t;
    t.q = 0.8;
    double time = 0.0;
    for (int k = 0; k < 2500; ++k, time += 0.02) surface_step(t, field, time, 0.02);
    CHECK(std::abs(t.q - 0.8 * std::cos(p.omega_c * 50.0)) <= 1e-3);
}

TEST_CASE("ensemble propagation is independent of the worker count") {
    ModelParams p;
    MteDiabaticForces forces(p);
    EnsembleRunOptions opts;
    opts.t_final = 4.0;
    opts.snapshot_stride = 1.0;
    std::vector<double> seen;
    auto run = [&](unsigned workers) {
        auto ens = wigner_sample(p, 101, 5);
        opts.workers = workers;
        seen.clear();
        propagate_ensemble(ens, forces, opts, [&](double t, const Ensemble&) { seen.push_back(t); });
        return ens;
    };
    const auto a = run(1);
    const auto b = run(3);
    REQUIRE(seen.size() == 5);
    CHECK(seen.front() == 0.0);
    CHECK(seen.back() == doctest::Approx(4.0));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.trajectories[k].q == b.trajectories[k].q);
        CHECK(a.trajectories[k].c_e == b.trajectories[k].c_e);
    }
}

TEST_CASE("ensemble propagation rejects bad schedules and flags runaways") {
    ModelParams p;
    MteDiabaticForces forces(p);
    auto ens = wigner_sample(p, 20, 5);
    EnsembleRunOptions opts;
    opts.t_final = 2.0;
    opts.snapshot_stride = 0.03;
    CHECK_THROWS_AS(propagate_ensemble(ens, forces, opts, {}), ConfigError);

    Grid grid;
    const auto movie = ScalarSurfaceMovie::static_harmonic(grid, p.omega_c, {0.0, 1.0, 2.0});
    SurfaceField field(movie, p.omega_c);
    SurfaceForces on_surface(field);
    opts.snapshot_stride = 1.0;
    opts.t_final = 3.0;
    CHECK_THROWS_AS(propagate_ensemble(ens, on_surface, opts, {}), ConfigError);

    opts.t_final = 1.0;
    opts.q_limit = 0.5;
    propagate_ensemble(ens, forces, opts, {});
    CHECK(ens.diverged_count() > 0);
    for (const auto& t : ens.trajectories)
        if (t.diverged) CHECK(std::abs(t.q) > 0.5);
}
