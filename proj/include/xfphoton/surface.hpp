#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "xfphoton/grid.hpp"

namespace xfp {

/// Time-indexed scalar field V(q, t_k) on a grid, stored frame-major.
/// Masked (invalid) nodes hold the value of the nearest valid node of the
/// same frame.
struct ScalarSurfaceMovie {
    Grid grid;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  // 1 = valid

    std::size_t frames() const { return times.size(); }
    std::span<const double> frame(std::size_t k) const {
        return {values.data() + k * grid.n_points, grid.n_points};
    }
    std::span<double> frame(std::size_t k) { return {values.data() + k * grid.n_points, grid.n_points}; }
    std::span<const std::uint8_t> frame_mask(std::size_t k) const {
        return {mask.data() + k * grid.n_points, grid.n_points};
    }

    /// Allocates frames for the given times, all nodes valid.
    static ScalarSurfaceMovie with_times(const Grid& grid, std::vector<double> times);
    /// omega^2 q^2 / 2 at every time.
    static ScalarSurfaceMovie static_harmonic(const Grid& grid, double omega,
                                              std::vector<double> times);

    /// Checks sizes, strictly increasing times with a uniform stride.
    void validate() const;
    double stride() const;
};

/// Overwrites invalid entries with the value at the nearest valid index
/// (ties resolve toward lower q). Throws InvariantViolation if nothing is valid.
void extrapolate_masked(std::span<double> values, std::span<const std::uint8_t> valid);

template <class T>
void extrapolate_masked_generic(std::span<T> values, std::span<const std::uint8_t> valid);

/// Frame index k and weight alpha with t = (1-alpha) t_k + alpha t_{k+1}.
struct TimeBracket {
    std::size_t k;
    double alpha;
};
/// Throws ConfigError when t lies outside [times.front(), times.back()].
TimeBracket locate_time(std::span<const double> times, double t);

/// Continuous potential and force derived from a movie.
///
/// Inside the hull of valid nodes each frame is represented by a cubic
/// spline; beyond the hull it continues as V_edge - F_edge (q - q_edge)
/// + omega^2 (q - q_edge)^2 / 2, so the force is -omega^2 q-like with a
/// continuous match at the edge. Frames are combined linearly in time.
/// Immutable after construction and safe to share between threads.
class SurfaceField {
public:
    SurfaceField(const ScalarSurfaceMovie& movie, double omega_c, double force_cap = 0.0);

    double t_begin() const { return movie_->times.front(); }
    double t_end() const { return movie_->times.back(); }
    const Grid& grid() const { return movie_->grid; }

    /// Potential at every grid node at time t (linear in t).
    void potential(double t, std::span<double> out) const;
    /// dV/dt at every node for the frame interval containing t.
    void potential_rate(double t, std::span<double> out) const;
    /// Index of the frame interval containing t.
    std::size_t segment(double t) const;
    /// -dV/dq at (q, t); clamped to |F| <= force_cap when a cap is set.
    double force(double q, double t) const;
    /// Force from a single frame.
    double frame_force(std::size_t k, double q) const;

private:
    struct Frame {
        std::size_t lo;
        std::size_t hi;
        double v_lo, v_hi;
        double f_lo, f_hi;
        boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
    };
    double frame_potential(std::size_t k, std::size_t i) const;

    const ScalarSurfaceMovie* movie_;
    double omega_;
    double cap_;
    std::vector<Frame> frames_;
};

}  // namespace xfp
