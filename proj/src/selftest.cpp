#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "xfphoton/factorization.hpp"
#include "xfphoton/observables.hpp"
#include "xfphoton/pipeline.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/trajectories.hpp"

namespace xfp {

namespace {

struct Check {
    std::string name;
    std::function<bool()> run;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

bool run_selftest(std::ostream& out) {
    const ModelParams params;
    const Grid grid;
    const double w = params.omega_c;

    const std::vector<Check> checks{
        {"initial state at q=0 is purely excited",
         [&] {
             const auto psi = init_state_qbo_excited(params, grid);
             const std::size_t i0 = grid.nearest_index(0.0);
             return std::abs(psi.comp_g[i0]) < 1e-15 &&
                    near(std::abs(psi.comp_e[i0]), std::pow(w / std::numbers::pi, 0.25), 1e-14);
         }},
        {"initial moments are the harmonic vacuum",
         [&] {
             const auto m = wavefunction_observables(init_state_qbo_excited(params, grid), params);
             return near(m.norm, 1.0, 1e-10) && near(m.q_mean, 0.0, 1e-10) &&
                    near(m.q2, 1.25, 1e-3) && near(m.p2, 0.2, 1e-3) &&
                    near(photon_number(m.q2, m.p2, w), 0.0, 1e-3);
         }},
        {"photon number of vacuum, one-photon and coherent moments",
         [&] {
             const double q0 = 1.7;
             return near(photon_number(1.25, 0.2, 0.4), 0.0, 1e-14) &&
                    near(photon_number(3.75, 0.6, 0.4), 1.0, 1e-14) &&
                    near(photon_number(1.25 + q0 * q0, 0.2, 0.4), 0.2 * q0 * q0, 1e-14);
         }},
        {"mean-field force without coherence is harmonic",
         [&] {
             Trajectory t;
             t.q = 0.7;
             t.c_g = 0.0;
             t.c_e = 1.0;
             return near(mte_force_diabatic(t, params), -w * w * 0.7, 1e-15);
         }},
        {"mean-field force at q=0 with equal real coefficients",
         [&] {
             Trajectory t;
             t.q = 0.0;
             t.c_g = t.c_e = 1.0 / std::sqrt(2.0);
             return near(mte_force_diabatic(t, params), -0.004, 1e-15);
         }},
        {"one split-operator step preserves the norm",
         [&] {
             const auto psi = init_state_qbo_excited(params, grid);
             const auto next = split_operator_step(psi, params, 0.001);
             return near(next.norm(), psi.norm(), 1e-12);
         }},
        {"uncoupled ground state is stationary",
         [&] {
             ModelParams free = params;
             free.g_coupling = 0.0;
             GridWavefunction psi(grid);
             for (std::size_t i = 0; i < grid.n_points; ++i)
                 psi.comp_g[i] = harmonic_ground(w, grid.q(i));
             const auto rho0 = psi.density();
             DiabaticPropagator prop(free, grid, 0.001);
             prop.advance(psi, 1000);
             const auto rho1 = psi.density();
             double worst = 0.0;
             for (std::size_t i = 0; i < rho0.size(); ++i)
                 worst = std::max(worst, std::abs(rho1[i] - rho0[i]));
             return worst < 1e-7;
         }},
        {"same seed gives an identical ensemble",
         [&] {
             const auto a = wigner_sample(params, 500, 7);
             const auto b = wigner_sample(params, 500, 7);
             for (std::size_t i = 0; i < a.size(); ++i)
                 if (a.trajectories[i].q != b.trajectories[i].q ||
                     a.trajectories[i].p != b.trajectories[i].p)
                     return false;
             return true;
         }},
        {"static harmonic surface gives the harmonic force at nodes",
         [&] {
             const auto movie = ScalarSurfaceMovie::static_harmonic(grid, w, {0.0, 1.0, 2.0});
             SurfaceField field(movie, w);
             for (std::size_t i = 200; i < 312; i += 7)
                 if (!near(field.force(grid.q(i), 0.5), -w * w * grid.q(i), 1e-9)) return false;
             return true;
         }},
        {"surface force is odd in q",
         [&] {
             const auto movie = ScalarSurfaceMovie::static_harmonic(grid, w, {0.0, 1.0});
             SurfaceField field(movie, w);
             for (double q : {0.05, 0.3, 1.1, 4.0})
                 if (!near(field.force(q, 0.2), -field.force(-q, 0.2), 1e-12)) return false;
             return true;
         }},
        {"initial conditional state is the upper eigenvector",
         [&] {
             const auto psi = init_state_qbo_excited(params, grid);
             Spectral spectral(grid);
             const auto f = invert_frame(psi, params, InversionOptions{}, spectral);
             for (std::size_t i = 0; i < grid.n_points; ++i) {
                 if (!f.valid[i]) continue;
                 if (!near(std::norm(f.coeff_e[i]), 1.0, 1e-10) || std::norm(f.coeff_g[i]) > 1e-10)
                     return false;
                 if (std::abs(f.phase_s[i]) > 1e-12) return false;
             }
             return true;
         }},
        {"zero kinetic surface leaves <p^2> unchanged",
         [&] {
             std::vector<double> rho(grid.n_points, 1.0 / (grid.q_max - grid.q_min));
             std::vector<double> ekin(grid.n_points, 0.0);
             return p2_corrected(0.3, rho, ekin, grid.dq()) == 0.3;
         }},
        {"identical series compare with zero error",
         [&] {
             ObservableSeries s;
             s.method = "a";
             for (int k = 0; k <= 10; ++k) s.append(k, 1.25 + 0.1 * k, 0.2, 0.0, 1.0);
             const auto rep = compare_series(s, s, 8.0);
             return rep.max_abs == 0.0;
         }},
    };

    bool ok = true;
    for (const auto& c : checks) {
        bool pass = false;
        std::string err;
        try {
            pass = c.run();
        } catch (const std::exception& e) {
            err = e.what();
        }
        out << (pass ? "PASS " : "FAIL ") << c.name;
        if (!err.empty()) out << " (" << err << ")";
        out << "\n";
        ok = ok && pass;
    }
    return ok;
}

}  // namespace xfp
