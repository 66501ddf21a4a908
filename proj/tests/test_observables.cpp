#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "xfphoton/errors.hpp"
#include "xfphoton/observables.hpp"

using namespace xfp;

namespace {

ObservableSeries synthetic(const std::string& name, double offset, double period) {
    ObservableSeries s;
    s.method = name;
    s.omega_c = 0.4;
    for (int k = 0; k <= 200; ++k) {
        const double t = period * k / 200.0;
        const double q2 = 1.25 + 0.5 * std::sin(2 * std::numbers::pi * t / period) + offset;
        s.append(t, q2, 0.2, 0.0, 1.0);
    }
    return s;
}

}  // namespace

TEST_CASE("photon number of the vacuum is zero") {
    const double w = 0.4;
    CHECK(photon_number(1.0 / (2 * w), w / 2, w) == doctest::Approx(0.0).epsilon(1e-15));
    // first Fock state
    CHECK(photon_number(3.0 / (2 * w), 3 * w / 2, w) == doctest::Approx(1.0));
}

TEST_CASE("series keeps its identities and interpolates linearly") {
    ObservableSeries s;
    s.omega_c = 0.4;
    s.append(0.0, 1.25, 0.2, 0.0, 1.0);
    s.append(2.0, 2.25, 0.2, 0.1, 1.0);
    CHECK(s.identity_residual() <= 1e-15);
    CHECK(s.p2[1] == doctest::Approx(0.3));
    CHECK(s.at("q2", 1.0) == doctest::Approx(1.75));
    CHECK(s.at("q2", 5.0) == doctest::Approx(2.25));
    CHECK(s.column("kin")[1] == 0.1);
}

TEST_CASE("kinetic correction is twice the density-weighted surface") {
    std::vector<double> rho{0.0, 0.5, 1.0, 0.5, 0.0};
    std::vector<double> ekin{1.0, 1.0, 2.0, 1.0, 1.0};
    CHECK(kinetic_correction(rho, ekin, 0.5) == doctest::Approx(2.0 * (0.25 + 1.0 + 0.25)));
    CHECK(p2_corrected(0.2, rho, ekin, 0.5) == doctest::Approx(3.2));
    std::vector<double> short_ekin{1.0};
    CHECK_THROWS_AS(p2_corrected(0.2, rho, short_ekin, 0.5), ConfigError);
}

TEST_CASE("ensemble moments skip diverged trajectories") {
    Ensemble ens;
    for (int k = 0; k < 4; ++k) {
        Trajectory t;
        t.q = k;
        t.p = 1.0;
        t.diverged = k == 3;
        ens.trajectories.push_back(t);
    }
    const auto m = ensemble_moments(ens);
    CHECK(m.used == 3);
    CHECK(m.excluded == 1);
    CHECK(m.q2 == doctest::Approx(5.0 / 3.0));
    CHECK(m.p2 == doctest::Approx(1.0));
}

TEST_CASE("densities are normalized and resolve a Gaussian") {
    Grid grid;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    Ensemble ens;
    std::vector<double> samples;
    for (int k = 0; k < 20000; ++k) {
        Trajectory t;
        t.q = normal(rng);
        samples.push_back(t.q);
        ens.trajectories.push_back(t);
    }
    for (auto est : {DensityEstimator::histogram, DensityEstimator::kde}) {
        DensityOptions opts;
        opts.estimator = est;
        const auto d = ensemble_density(ens, grid, opts);
        double total = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            total += d.values[i] * grid.dq();
            const double q = grid.q(i);
            worst = std::max(worst, std::abs(d.values[i] - std::exp(-0.5 * q * q) / std::sqrt(2 * std::numbers::pi)));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        // bin noise at n = 20000, dq = 0.1 is about 0.014
        CHECK(worst <= 0.06);
        CHECK(d.used == 20000);
    }
    const double h = silverman_bandwidth(samples);
    CHECK(h == doctest::Approx(0.9 * std::pow(20000.0, -0.2)).epsilon(0.05));

    ens.trajectories.resize(50);
    CHECK_THROWS_AS(ensemble_density(ens, grid), InvariantViolation);
}

TEST_CASE("parity symmetrization mirrors about the central node") {
    std::vector<double> v{9.0, 1.0, 2.0, 3.0, 5.0, 7.0};
    const auto s = parity_symmetrize(v);
    // node 0 has no mirror, node 3 is q = 0
    CHECK(s[0] == 9.0);
    CHECK(s[3] == 3.0);
    CHECK(s[1] == doctest::Approx(4.0));
    CHECK(s[5] == doctest::Approx(4.0));
    CHECK(s[2] == doctest::Approx(3.5));
}

TEST_CASE("series comparison windows and sign statistics") {
    const double period = 628.3;
    const auto ref = synthetic("exact", 0.0, period);
    const auto low = synthetic("low", -0.1, period);
    // N shifts by omega * dq2 / 2 = 0.02
    const auto rep = compare_series(ref, low, period, "N");
    const auto& bias = rep.window("bias");
    CHECK(bias.strictly_below);
    CHECK_FALSE(bias.strictly_above);
    CHECK(bias.frac_below == 1.0);
    CHECK(bias.p_below < 1e-6);
    CHECK(rep.window("early").max_abs == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(rep.window("early").l1 == doctest::Approx(0.02 * period / 4).epsilon(1e-9));
    CHECK(rep.to_json()["windows"].size() == 3);

    auto far = synthetic("far", 0.0, period);
    for (auto& t : far.times) t += 10 * period;
    CHECK_THROWS_AS(compare_series(ref, far, period), ConfigError);
}
