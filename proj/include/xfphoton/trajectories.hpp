#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "xfphoton/model.hpp"
#include "xfphoton/spectral.hpp"
#include "xfphoton/surface.hpp"

namespace xfp {

enum class Basis { diabatic, qbo };

enum class Method { mte_diabatic, mte_qbo, wbo, qtdpes };

std::string method_name(Method m);
/// Accepts mte-diabatic, mte-qbo, wbo, qtdpes. Throws ConfigError otherwise.
Method parse_method(const std::string& name);
bool is_surface_method(Method m);

/// Phase-space point plus electronic coefficients. In the qBO basis
/// c_g / c_e are the lower / upper channel amplitudes.
struct Trajectory {
    double q = 0.0;
    double p = 0.0;
    cplx c_g{0.0, 0.0};
    cplx c_e{1.0, 0.0};
    Basis basis = Basis::diabatic;
    std::size_t id = 0;
    bool diverged = false;
    /// Largest per-step change of |c_g|^2 + |c_e|^2 seen so far (MTE only).
    double max_step_drift = 0.0;
};

struct Ensemble {
    std::vector<Trajectory> trajectories;
    std::uint64_t seed = 0;
    double dt = 0.02;
    Method method = Method::mte_diabatic;

    std::size_t size() const { return trajectories.size(); }
    std::size_t diverged_count() const;
};

/// q ~ N(0, 1/(2 omega_c)), p ~ N(0, omega_c/2), drawn sequentially from a
/// mt19937_64 seeded with `seed`. Coefficients start in the upper qBO state,
/// expressed in the requested basis.
Ensemble wigner_sample(const ModelParams& params, std::size_t n, std::uint64_t seed,
                       Basis basis = Basis::diabatic);

/// -omega^2 q - 2 g omega Re(c_g^* c_e)
double mte_force_diabatic(const Trajectory& traj, const ModelParams& params);
/// -sum |c_i|^2 dE_i/dq - 2 Re(c_g^* c_e) (E_upper - E_lower) d_ge
double mte_force_qbo(const Trajectory& traj, const ModelParams& params);

/// Mean-field energy p^2/2 + <c|H^qBO(q)|c> (basis-aware).
double mte_energy(const Trajectory& traj, const ModelParams& params);

/// Kick-drift-kick step. Coefficients are advanced by `substeps` RK4 steps
/// with q frozen at the midpoint of the drift. No renormalization.
void mte_step_diabatic(Trajectory& traj, const ModelParams& params, double dt, int substeps = 4);
/// Same in the qBO basis; q moves linearly during the drift so that
/// dq/dt = p at the half step enters the derivative coupling.
void mte_step_qbo(Trajectory& traj, const ModelParams& params, double dt, int substeps = 4);

/// -dV/dq of a movie at (q, t).
double surface_force(const SurfaceField& field, double q, double t);
/// Kick-drift-kick step on a time-dependent surface starting at time t.
void surface_step(Trajectory& traj, const SurfaceField& field, double t, double dt);

/// Advances one trajectory by dt starting from time t.
class ForceProvider {
public:
    virtual ~ForceProvider() = default;
    virtual void step(Trajectory& traj, double t, double dt) const = 0;
    /// Latest time the provider can step to.
    virtual double t_limit() const { return std::numeric_limits<double>::infinity(); }
};

class MteDiabaticForces : public ForceProvider {
public:
    MteDiabaticForces(ModelParams params, int substeps = 4) : params_(params), substeps_(substeps) {}
    void step(Trajectory& traj, double t, double dt) const override;

private:
    ModelParams params_;
    int substeps_;
};

class MteQboForces : public ForceProvider {
public:
    MteQboForces(ModelParams params, int substeps = 4) : params_(params), substeps_(substeps) {}
    void step(Trajectory& traj, double t, double dt) const override;

private:
    ModelParams params_;
    int substeps_;
};

class SurfaceForces : public ForceProvider {
public:
    explicit SurfaceForces(const SurfaceField& field) : field_(&field) {}
    void step(Trajectory& traj, double t, double dt) const override;
    double t_limit() const override { return field_->t_end(); }

private:
    const SurfaceField* field_;
};

struct EnsembleRunOptions {
    double t_final = 0.0;
    double snapshot_stride = 1.0;
    unsigned workers = 1;
    /// Trajectories with |q| beyond this are flagged as diverged (0: no limit).
    double q_limit = 0.0;
};

/// Called at t0 and at every stride with the current ensemble.
using SnapshotCallback = std::function<void(double t, const Ensemble&)>;

/// Evolves every trajectory independently with the ensemble's dt.
/// Work is split into contiguous index blocks; results do not depend on the
/// number of workers. Diverged trajectories are frozen and flagged.
void propagate_ensemble(Ensemble& ensemble, const ForceProvider& forces,
                        const EnsembleRunOptions& opts, const SnapshotCallback& on_snapshot);

}  // namespace xfp
