#include "xfphoton/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfphoton/errors.hpp"

namespace xfp {

ScalarSurfaceMovie ScalarSurfaceMovie::with_times(const Grid& grid, std::vector<double> times) {
    ScalarSurfaceMovie m;
    m.grid = grid;
    m.times = std::move(times);
    m.values.assign(m.times.size() * grid.n_points, 0.0);
    m.mask.assign(m.times.size() * grid.n_points, 1);
    return m;
}

ScalarSurfaceMovie ScalarSurfaceMovie::static_harmonic(const Grid& grid, double omega,
                                                       std::vector<double> times) {
    auto m = with_times(grid, std::move(times));
    for (std::size_t k = 0; k < m.frames(); ++k) {
        auto f = m.frame(k);
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            const double q = grid.q(i);
            f[i] = 0.5 * omega * omega * q * q;
        }
    }
    return m;
}

double ScalarSurfaceMovie::stride() const {
    return times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                            : 0.0;
}

void ScalarSurfaceMovie::validate() const {
    if (times.empty()) throw ConfigError("surface movie has no frames");
    if (values.size() != times.size() * grid.n_points || mask.size() != values.size())
        throw ConfigError("surface movie: array sizes do not match grid and times");
    const double h = stride();
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double step = times[k] - times[k - 1];
        if (!(step > 0.0)) throw ConfigError("surface movie: times must increase strictly");
        if (std::abs(step - h) > 1e-9 * std::max(1.0, h))
            throw ConfigError("surface movie: times must have a uniform stride");
    }
}

template <class T>
void extrapolate_masked_generic(std::span<T> values, std::span<const std::uint8_t> valid) {
    const std::size_t n = values.size();
    // Distance-to-nearest-valid sweep in both directions.
    std::vector<long> left(n, -1), right(n, -1);
    long last = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (valid[i]) last = static_cast<long>(i);
        left[i] = last;
    }
    last = -1;
    for (std::size_t i = n; i-- > 0;) {
        if (valid[i]) last = static_cast<long>(i);
        right[i] = last;
    }
    if (left[n - 1] < 0) throw InvariantViolation("fully masked frame");
    for (std::size_t i = 0; i < n; ++i) {
        if (valid[i]) continue;
        const long l = left[i], r = right[i];
        long src;
        if (l < 0)
            src = r;
        else if (r < 0)
            src = l;
        else
            src = (static_cast<long>(i) - l <= r - static_cast<long>(i)) ? l : r;
        values[i] = values[static_cast<std::size_t>(src)];
    }
}

template void extrapolate_masked_generic<double>(std::span<double>, std::span<const std::uint8_t>);
template void extrapolate_masked_generic<std::complex<double>>(std::span<std::complex<double>>,
                                                               std::span<const std::uint8_t>);

void extrapolate_masked(std::span<double> values, std::span<const std::uint8_t> valid) {
    extrapolate_masked_generic<double>(values, valid);
}

TimeBracket locate_time(std::span<const double> times, double t) {
    const double t0 = times.front(), t1 = times.back();
    const double slack = 1e-9 * std::max(1.0, std::abs(t1));
    if (t < t0 - slack || t > t1 + slack) {
        std::ostringstream os;
        os << "time " << t << " outside surface range [" << t0 << ", " << t1 << "]";
        throw ConfigError(os.str());
    }
    if (times.size() == 1) return {0, 0.0};
    const double h = (t1 - t0) / static_cast<double>(times.size() - 1);
    double s = (t - t0) / h;
    s = std::clamp(s, 0.0, static_cast<double>(times.size() - 1));
    auto k = static_cast<std::size_t>(std::floor(s));
    if (k >= times.size() - 1) k = times.size() - 2;
    return {k, s - static_cast<double>(k)};
}

namespace {

// Fourth-order one-sided first derivative at the start of f (step h).
double one_sided_derivative(const double* f, double h) {
    return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
}

}  // namespace

SurfaceField::SurfaceField(const ScalarSurfaceMovie& movie, double omega_c, double force_cap)
    : movie_(&movie), omega_(omega_c), cap_(force_cap) {
    movie.validate();
    const Grid& g = movie.grid;
    const double h = g.dq();
    frames_.reserve(movie.frames());
    for (std::size_t k = 0; k < movie.frames(); ++k) {
        const auto v = movie.frame(k);
        const auto m = movie.frame_mask(k);
        std::size_t lo = 0, hi = g.n_points - 1;
        while (lo < g.n_points && !m[lo]) ++lo;
        while (hi > lo && !m[hi]) --hi;
        if (lo >= g.n_points || hi - lo + 1 < 5) {
            std::ostringstream os;
            os << "surface frame " << k << " (t=" << movie.times[k]
               << ") has fewer than 5 contiguous valid nodes";
            throw InvariantViolation(os.str());
        }
        const std::size_t len = hi - lo + 1;
        std::vector<double> rev(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi) + 1);
        const double d_lo = one_sided_derivative(rev.data(), h);
        std::reverse(rev.begin(), rev.end());
        const double d_hi = -one_sided_derivative(rev.data(), h);
        frames_.push_back(Frame{lo, hi, v[lo], v[hi], -d_lo, -d_hi,
                                {v.data() + lo, len, g.q(lo), h, d_lo, d_hi}});
    }
}

double SurfaceField::frame_potential(std::size_t k, std::size_t i) const {
    const Frame& f = frames_[k];
    const Grid& g = movie_->grid;
    if (i < f.lo) {
        const double x = g.q(i) - g.q(f.lo);
        return f.v_lo - f.f_lo * x + 0.5 * omega_ * omega_ * x * x;
    }
    if (i > f.hi) {
        const double x = g.q(i) - g.q(f.hi);
        return f.v_hi - f.f_hi * x + 0.5 * omega_ * omega_ * x * x;
    }
    return movie_->frame(k)[i];
}

void SurfaceField::potential(double t, std::span<double> out) const {
    const auto b = locate_time(movie_->times, t);
    const std::size_t n = movie_->grid.n_points;
    const std::size_t k1 = std::min(b.k + 1, frames_.size() - 1);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (1.0 - b.alpha) * frame_potential(b.k, i) + b.alpha * frame_potential(k1, i);
}

void SurfaceField::potential_rate(double t, std::span<double> out) const {
    const auto b = locate_time(movie_->times, t);
    const std::size_t n = movie_->grid.n_points;
    if (frames_.size() < 2) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double h = movie_->times[b.k + 1] - movie_->times[b.k];
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (frame_potential(b.k + 1, i) - frame_potential(b.k, i)) / h;
}

std::size_t SurfaceField::segment(double t) const { return locate_time(movie_->times, t).k; }

double SurfaceField::frame_force(std::size_t k, double q) const {
    const Frame& f = frames_[k];
    const Grid& g = movie_->grid;
    const double q_lo = g.q(f.lo), q_hi = g.q(f.hi);
    if (q < q_lo) return f.f_lo - omega_ * omega_ * (q - q_lo);
    if (q > q_hi) return f.f_hi - omega_ * omega_ * (q - q_hi);
    return -f.spline.prime(q);
}

double SurfaceField::force(double q, double t) const {
    const auto b = locate_time(movie_->times, t);
    double f = frame_force(b.k, q);
    if (b.alpha > 0.0) f = (1.0 - b.alpha) * f + b.alpha * frame_force(b.k + 1, q);
    if (cap_ > 0.0) f = std::clamp(f, -cap_, cap_);
    return f;
}

}  // namespace xfp
