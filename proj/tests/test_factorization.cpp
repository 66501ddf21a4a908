#include <cmath>
#include <complex>

#include "doctest.h"
#include "xfphoton/errors.hpp"
#include "xfphoton/factorization.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/spectral.hpp"

using namespace xfp;

namespace {

const SnapshotSeries& short_run() {
    static const SnapshotSeries run = [] {
        PropagationOptions opts;
        opts.t_final = 2.0;
        opts.snapshot_stride = 0.2;
        return propagate_exact(ModelParams{}, Grid{}, opts);
    }();
    return run;
}

const SurfaceSet& short_surfaces() {
    static const SurfaceSet set = invert_series(short_run(), InversionOptions{});
    return set;
}

// -int_0^q (2 omega s d^2 - d d') ds with d' by central difference.
double gd_at_start(const ModelParams& p, double q) {
    const int n = 4000;
    const double h = q / n;
    auto integrand = [&](double s) {
        const double d = nac_first_order(p, s);
        const double dd = (nac_first_order(p, s + 1e-5) - nac_first_order(p, s - 1e-5)) / 2e-5;
        return 2.0 * p.omega_c * s * d * d - d * dd;
    };
    double sum = 0.5 * (integrand(0.0) + integrand(q));
    for (int k = 1; k < n; ++k) sum += integrand(k * h);
    return -sum * h;
}

bool inside(const Grid& g, std::size_t i, double half_width) {
    return std::abs(g.q(i)) <= half_width;
}

}  // namespace

TEST_CASE("conditional state obeys the partial normalization condition") {
    ModelParams p;
    Spectral spectral(Grid{});
    for (std::size_t k : {0u, 5u, 10u}) {
        const auto frame = invert_frame(short_run().frames[k], p, InversionOptions{}, spectral);
        double worst = 0.0;
        for (std::size_t i = 0; i < frame.grid.n_points; ++i) {
            if (!frame.valid[i]) continue;
            const double nc = std::norm(frame.cond_g[i]) + std::norm(frame.cond_e[i]);
            const double nq = std::norm(frame.coeff_g[i]) + std::norm(frame.coeff_e[i]);
            worst = std::max({worst, std::abs(nc - 1.0), std::abs(nq - 1.0)});
        }
        CHECK(worst <= 1e-12);
        CHECK(frame.phase_s[frame.gauge_reference] == 0.0);
    }
}

TEST_CASE("factorization reproduces the full amplitude") {
    ModelParams p;
    Spectral spectral(Grid{});
    const auto& psi = short_run().frames[7];
    const auto frame = invert_frame(psi, p, InversionOptions{}, spectral);
    double worst = 0.0;
    for (std::size_t i = 0; i < frame.grid.n_points; ++i) {
        if (!frame.valid[i]) continue;
        const cplx chi = frame.chi_mod[i] * std::exp(cplx(0.0, frame.phase_s[i]));
        worst = std::max({worst, std::abs(chi * frame.cond_g[i] - psi.comp_g[i]),
                          std::abs(chi * frame.cond_e[i] - psi.comp_e[i])});
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("surfaces at t = 0 match their closed forms") {
    ModelParams p;
    const auto& set = short_surfaces();
    const auto wbo = set.wbo.frame(0), kin = set.kin.frame(0);
    const auto mask = set.wbo.frame_mask(0);
    double worst_wbo = 0.0, worst_kin = 0.0;
    for (std::size_t i = 0; i < set.grid.n_points; ++i) {
        if (!mask[i] || !inside(set.grid, i, 6.0)) continue;
        const double q = set.grid.q(i);
        const double d = nac_first_order(p, q);
        worst_wbo = std::max(worst_wbo, std::abs(wbo[i] - qbo_energies(p, q).upper));
        worst_kin = std::max(worst_kin, std::abs(kin[i] - 0.5 * d * d));
    }
    CHECK(worst_wbo <= 1e-10);
    CHECK(worst_kin <= 1e-7);
}

TEST_CASE("gauge-dependent term at t = 0 matches the analytic integral") {
    ModelParams p;
    const auto& set = short_surfaces();
    const auto gd = set.gd.frame(0);
    const std::size_t ref = set.gauge_reference[0];
    CHECK(std::abs(set.grid.q(ref)) < 1e-12);
    double worst = 0.0;
    for (std::size_t i = 0; i < set.grid.n_points; ++i) {
        if (!inside(set.grid, i, 5.0)) continue;
        const double q = set.grid.q(i);
        worst = std::max(worst, std::abs(gd[i] - gd[ref] - gd_at_start(p, q)));
    }
    CHECK(worst <= 5e-6);
    CHECK(gd_at_start(p, 1.0) == doctest::Approx(-4.0024e-5).epsilon(1e-3));
    for (const auto& r : set.reports) CHECK(r.gd_max_imag <= 1e-6);
}

TEST_CASE("qTDPES is the sum of its parts") {
    const auto& set = short_surfaces();
    double worst = 0.0;
    for (std::size_t k = 0; k < set.times.size(); ++k) {
        const auto a = set.wbo.frame(k), b = set.kin.frame(k), c = set.gd.frame(k),
                   s = set.qtdpes.frame(k);
        for (std::size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(s[i] - (a[i] + b[i] + c[i])));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("wBO force terms add up to minus the surface gradient") {
    ModelParams p;
    Spectral spectral(Grid{});
    const auto frame = invert_frame(short_run().frames[10], p, InversionOptions{}, spectral);
    const auto wbo = surface_wbo(frame, p);
    const auto terms = wbo_force_terms(frame, p);
    const auto total = terms.total();
    const auto weighted = terms.weighted();
    const double h = frame.grid.dq();
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < wbo.size(); ++i) {
        if (!inside(frame.grid, i, 5.0)) continue;
        const double fd = -(wbo[i - 2] - 8 * wbo[i - 1] + 8 * wbo[i + 1] - wbo[i + 2]) / (12 * h);
        worst = std::max(worst, std::abs(total[i] - fd));
        CHECK(weighted[i] == doctest::Approx(terms.lower_gradient[i] + terms.gap_gradient[i]));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("surfaces are invariant under a q-dependent phase of the full state") {
    ModelParams p;
    Spectral spectral(Grid{});
    const auto& psi = short_run().frames[6];
    GridWavefunction twisted = psi;
    for (std::size_t i = 0; i < psi.grid.n_points; ++i) {
        const double q = psi.grid.q(i);
        const cplx u = std::exp(cplx(0.0, 0.3 * std::sin(0.5 * q)));
        twisted.comp_g[i] *= u;
        twisted.comp_e[i] *= u;
    }
    const auto a = invert_frame(psi, p, InversionOptions{}, spectral);
    const auto b = invert_frame(twisted, p, InversionOptions{}, spectral);
    const auto wa = surface_wbo(a, p), wb = surface_wbo(b, p);
    const auto ka = surface_kin(a), kb = surface_kin(b);
    double worst_surface = 0.0, worst_phase = 0.0;
    const double q_ref = a.grid.q(a.gauge_reference);
    for (std::size_t i = 0; i < wa.size(); ++i) {
        if (!inside(a.grid, i, 5.0)) continue;
        const double q = a.grid.q(i);
        worst_surface = std::max({worst_surface, std::abs(wa[i] - wb[i]), std::abs(ka[i] - kb[i])});
        const double shift = 0.3 * (std::sin(0.5 * q) - std::sin(0.5 * q_ref));
        worst_phase = std::max(worst_phase, std::abs(b.phase_s[i] - a.phase_s[i] - shift));
    }
    CHECK(worst_surface <= 1e-9);
    // trapezoid quadrature of dS/dq, O(dq^2)
    CHECK(worst_phase <= 2e-4);
}

TEST_CASE("mixed gauge references are rejected") {
    ModelParams p;
    Spectral spectral(Grid{});
    auto a = invert_frame(short_run().frames[0], p, InversionOptions{}, spectral);
    auto b = invert_frame(short_run().frames[1], p, InversionOptions{}, spectral);
    auto c = invert_frame(short_run().frames[2], p, InversionOptions{}, spectral);
    CHECK_NOTHROW(surface_gd(a, b, c, 0.2));
    c.gauge_reference += 1;
    CHECK_THROWS_AS(surface_gd(a, b, c, 0.2), InvariantViolation);
}

TEST_CASE("a fully masked frame cannot be inverted") {
    ModelParams p;
    Grid grid;
    GridWavefunction empty(grid);
    Spectral spectral(grid);
    CHECK_THROWS_AS(invert_frame(empty, p, InversionOptions{}, spectral), InvariantViolation);
}

TEST_CASE("masked nodes carry nearest valid values") {
    const auto& set = short_surfaces();
    const auto mask = set.kin.frame_mask(0);
    const auto kin = set.kin.frame(0);
    std::size_t first = 0;
    while (!mask[first]) ++first;
    REQUIRE(first > 0);
    for (std::size_t i = 0; i < first; ++i) CHECK(kin[i] == kin[first]);
    for (const auto& r : set.reports) {
        CHECK(r.trusted);
        CHECK(r.masked_fraction > 0.0);
        CHECK(r.masked_fraction < 1.0);
    }
}
