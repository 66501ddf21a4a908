#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/surface.hpp"
#include "xfphoton/trajectories.hpp"

namespace xfp {

/// (omega q2 + p2/omega)/2 - 1/2
double photon_number(double q2, double p2, double omega);

/// Time series of field observables for one method. For surface methods
/// p2 = p2_chi + kin_correction; otherwise kin_correction is 0.
struct ObservableSeries {
    std::string method;
    double omega_c = 0.4;
    std::vector<double> times;
    std::vector<double> n_photon;
    std::vector<double> q2;
    std::vector<double> p2;
    std::vector<double> p2_chi;
    std::vector<double> kin_correction;
    std::vector<double> norm;
    std::vector<std::size_t> excluded;

    std::size_t size() const { return times.size(); }
    void append(double t, double q2_value, double p2_chi_value, double kin, double norm_value,
                std::size_t excluded_count = 0);
    /// Max violation of the photon-number identity and of p2 = p2_chi + kin.
    double identity_residual() const;
    /// Linear interpolation of a column ("N", "q2", "p2", "p2_chi", "kin") at t.
    double at(const std::string& column, double t) const;
    const std::vector<double>& column(const std::string& name) const;
};

/// 2 * sum rho(q) E_kin(q) dq.
double kinetic_correction(std::span<const double> density, std::span<const double> ekin, double dq);

/// <p^2>_chi + 2 int |chi|^2 E_kin dq. Throws ConfigError on size mismatch.
double p2_corrected(double p2_chi, std::span<const double> density, std::span<const double> ekin,
                    double dq);

/// Frame values of a movie linearly interpolated in time (masked nodes
/// carry their extrapolated values).
std::vector<double> movie_at(const ScalarSurfaceMovie& movie, double t);

/// Series of the exact two-component run (kin_correction = 0).
ObservableSeries exact_series(const SnapshotSeries& series, double every = 0.0);

/// Series of a single-component run. With `ekin`, the kinetic correction
/// is computed from the propagated density.
ObservableSeries surface_quantum_series(const std::string& method,
                                        const std::vector<ScalarWavefunction>& frames,
                                        double omega_c, const ScalarSurfaceMovie* ekin = nullptr);

struct EnsembleMoments {
    double q_mean = 0.0;
    double p_mean = 0.0;
    double q2 = 0.0;  // raw second moments
    double p2 = 0.0;
    double q4 = 0.0;
    double p4 = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
};

/// Sums in trajectory-index order over non-diverged trajectories.
EnsembleMoments ensemble_moments(const Ensemble& ensemble);

enum class DensityEstimator { histogram, kde };

struct DensityOptions {
    DensityEstimator estimator = DensityEstimator::histogram;
    /// KDE bandwidth; 0 selects Silverman's rule.
    double bandwidth = 0.0;
    std::size_t min_trajectories = 100;
};

struct EnsembleDensity {
    std::vector<double> values;  // normalized so sum(values) * dq = 1
    std::size_t used = 0;
    std::size_t overflow = 0;    // trajectories outside the grid bins
    double bandwidth = 0.0;
};

/// Histogram with one bin per grid node (bin width dq) or Gaussian KDE
/// evaluated at the nodes. Throws InvariantViolation with too few
/// surviving trajectories.
EnsembleDensity ensemble_density(const Ensemble& ensemble, const Grid& grid,
                                 const DensityOptions& opts = {});

double silverman_bandwidth(std::span<const double> samples);

/// (f(q) + f(-q)) / 2 on the symmetric grid; node 0 (no mirror) is kept.
std::vector<double> parity_symmetrize(std::span<const double> values);

struct WindowStats {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t points = 0;
    double max_abs = 0.0;
    double l1 = 0.0;           // time integral of |candidate - reference|
    double mean_signed = 0.0;  // mean of candidate - reference
    double frac_below = 0.0;
    double frac_above = 0.0;
    double p_below = 1.0;      // one-sided sign test
    double p_above = 1.0;
    bool strictly_below = false;  // over the open window
    bool strictly_above = false;
};

struct ComparisonReport {
    std::string reference;
    std::string candidate;
    std::string quantity;
    double period = 0.0;
    std::vector<WindowStats> windows;
    double max_abs = 0.0;

    nlohmann::json to_json() const;
    const WindowStats& window(const std::string& name) const;
};

/// Resamples the candidate onto the reference times (linear interpolation)
/// over the common range and reports errors in the windows [0, T/4],
/// [T/4, T/2] and (0.1T, 0.5T). Throws ConfigError on disjoint ranges.
ComparisonReport compare_series(const ObservableSeries& reference,
                                const ObservableSeries& candidate, double period,
                                const std::string& quantity = "N");

}  // namespace xfp
