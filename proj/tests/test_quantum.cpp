#include <cmath>
#include <complex>

#include "doctest.h"
#include "xfphoton/errors.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/wavefunction.hpp"

using namespace xfp;

namespace {

// chi_0 on the bare excited state, no photons.
GridWavefunction bare_excited(const ModelParams& p, const Grid& grid) {
    GridWavefunction psi(grid);
    for (std::size_t i = 0; i < grid.n_points; ++i)
        psi.comp_e[i] = harmonic_ground(p.omega_c, grid.q(i));
    return psi;
}

double max_density_diff(const GridWavefunction& a, const GridWavefunction& b) {
    const auto da = a.density(), db = b.density();
    double worst = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(da[i] - db[i]));
    return worst;
}

}  // namespace

TEST_CASE("initial state is normalized and lives on the upper surface") {
    ModelParams p;
    Grid grid;
    const auto psi = init_state_qbo_excited(p, grid);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = wavefunction_observables(psi, p);
    CHECK(m.q_mean == doctest::Approx(0.0).epsilon(1e-12));
    // photon vacuum of the harmonic ground state
    CHECK(m.q2 == doctest::Approx(1.0 / (2.0 * p.omega_c)).epsilon(1e-10));
    // the two-component <p^2> also carries the electronic gradient, int chi^2 d_ge^2
    double electronic = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double q = grid.q(i);
        electronic += std::pow(harmonic_ground(p.omega_c, q) * nac_first_order(p, q), 2) * grid.dq();
    }
    CHECK(m.p2 == doctest::Approx(p.omega_c / 2.0 + electronic).epsilon(1e-10));
    CHECK(m.pop_e > 0.99);

    Grid narrow{-2.0, 2.0, 64};
    CHECK_THROWS_AS(init_state_qbo_excited(p, narrow), ConfigError);
}

TEST_CASE("split operator conserves norm and energy") {
    ModelParams p;
    Grid grid;
    PropagationOptions opts;
    opts.t_final = 20.0;
    opts.snapshot_stride = 5.0;
    const auto run = propagate_exact(p, grid, opts);
    REQUIRE(run.frames.size() == 5);
    const auto e0 = wavefunction_observables(run.frames.front(), p);
    for (const auto& f : run.frames) {
        const auto m = wavefunction_observables(f, p);
        CHECK(std::abs(m.norm - 1.0) <= 1e-10);
        CHECK(std::abs(m.energy - e0.energy) <= 1e-6);
    }
    CHECK(run.times().back() == doctest::Approx(20.0));
}

TEST_CASE("uncoupled excited state only picks up a phase") {
    ModelParams p;
    p.g_coupling = 0.0;
    Grid grid;
    PropagationOptions opts;
    opts.t_final = 10.0;
    opts.snapshot_stride = 10.0;
    const auto run = propagate_exact(p, bare_excited(p, grid), opts);
    const auto& last = run.frames.back();
    const cplx expected_phase = std::exp(cplx(0.0, -(p.eps_e + 0.5 * p.omega_c) * 10.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const cplx want = harmonic_ground(p.omega_c, grid.q(i)) * expected_phase;
        worst = std::max({worst, std::abs(last.comp_e[i] - want), std::abs(last.comp_g[i])});
    }
    CHECK(worst <= 1e-7);
}

TEST_CASE("vacuum Rabi oscillation follows the Jaynes-Cummings law") {
    ModelParams p;
    p.g_coupling = 0.1;
    Grid grid;
    PropagationOptions opts;
    opts.dt = 0.002;
    opts.t_final = 40.0;
    opts.snapshot_stride = 4.0;
    const auto run = propagate_exact(p, bare_excited(p, grid), opts);
    const double rabi = p.g_coupling * std::sqrt(p.omega_c / 2.0);
    for (const auto& f : run.frames) {
        const auto m = wavefunction_observables(f, p);
        const double c = std::cos(rabi * f.t);
        CHECK(std::abs(m.pop_e - c * c) <= 0.02);
    }
}

TEST_CASE("diabatic and qBO-basis propagations agree") {
    ModelParams p;
    Grid grid;
    PropagationOptions opts;
    opts.t_final = 10.0;
    opts.snapshot_stride = 5.0;
    const auto dia = propagate_exact(p, grid, opts);
    const auto qbo = propagate_qbo_basis(p, grid, opts);
    REQUIRE(dia.frames.size() == qbo.frames.size());
    for (std::size_t k = 0; k < dia.frames.size(); ++k)
        CHECK(max_density_diff(dia.frames[k], qbo.frames[k]) <= 1e-6);
}

TEST_CASE("qBO to diabatic rotation round trip") {
    ModelParams p;
    Grid grid;
    std::vector<cplx> lower(grid.n_points), upper(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double q = grid.q(i);
        lower[i] = cplx(std::exp(-q * q), 0.3 * q * std::exp(-q * q));
        upper[i] = cplx(0.0, std::exp(-0.5 * q * q));
    }
    const auto psi = qbo_to_diabatic(p, lower, upper, grid, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const auto v = qbo_eigenvectors(p, grid.q(i));
        const cplx l = v.lower[0] * psi.comp_g[i] + v.lower[1] * psi.comp_e[i];
        const cplx u = v.upper[0] * psi.comp_g[i] + v.upper[1] * psi.comp_e[i];
        worst = std::max({worst, std::abs(l - lower[i]), std::abs(u - upper[i])});
    }
    CHECK(worst <= 1e-14);
}

TEST_CASE("stride must be a multiple of dt") {
    CHECK(steps_per_stride(0.001, 0.2) == 200);
    CHECK_THROWS_AS(steps_per_stride(0.001, 0.0015), ConfigError);
}

TEST_CASE("probability reaching the grid edge is an invariant violation") {
    ModelParams p;
    Grid grid{-12.8, 12.8, 256};
    GridWavefunction psi(grid);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double q = grid.q(i);
        psi.comp_e[i] = std::exp(-(q - 9.0) * (q - 9.0)) * std::exp(cplx(0.0, 4.0 * q));
    }
    PropagationOptions opts;
    opts.t_final = 4.0;
    opts.snapshot_stride = 1.0;
    CHECK_THROWS_AS(propagate_exact(p, psi, opts), InvariantViolation);
}

TEST_CASE("harmonic ground state is stationary on a static harmonic surface") {
    ModelParams p;
    Grid grid;
    const auto movie = ScalarSurfaceMovie::static_harmonic(grid, p.omega_c, {0.0, 5.0, 10.0});
    SurfaceField field(movie, p.omega_c);
    ScalarWavefunction chi(grid);
    for (std::size_t i = 0; i < grid.n_points; ++i)
        chi.psi[i] = harmonic_ground(p.omega_c, grid.q(i));
    PropagationOptions opts;
    opts.t_final = 10.0;
    opts.snapshot_stride = 5.0;
    const auto frames = propagate_on_surface(field, chi, opts);
    REQUIRE(frames.size() == 3);
    const auto d0 = frames.front().density();
    const auto d1 = frames.back().density();
    double worst = 0.0;
    for (std::size_t i = 0; i < d0.size(); ++i) worst = std::max(worst, std::abs(d0[i] - d1[i]));
    CHECK(worst <= 1e-8);
    CHECK(frames.back().norm() == doctest::Approx(1.0).epsilon(1e-10));

    opts.t_final = 11.0;
    opts.snapshot_stride = 1.0;
    CHECK_THROWS_AS(propagate_on_surface(field, chi, opts), ConfigError);
}
