#include "xfphoton/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "xfphoton/errors.hpp"

namespace xfp {

void Grid::validate() const {
    if (!(q_max > q_min) || !std::isfinite(q_min) || !std::isfinite(q_max))
        throw ConfigError("grid: q_max must exceed q_min");
    if (n_points < 8 || !std::has_single_bit(n_points))
        throw ConfigError("grid: n_points must be a power of two >= 8");
}

std::vector<double> Grid::coordinates() const {
    std::vector<double> out(n_points);
    for (std::size_t i = 0; i < n_points; ++i) out[i] = q(i);
    return out;
}

std::vector<double> Grid::wavenumbers() const {
    const auto n = static_cast<long>(n_points);
    const double dk = 2.0 * std::numbers::pi / (q_max - q_min);
    std::vector<double> k(n_points);
    for (long i = 0; i < n; ++i) k[i] = dk * static_cast<double>(i < n / 2 ? i : i - n);
    return k;
}

std::size_t Grid::nearest_index(double x) const {
    const double s = std::round((x - q_min) / dq());
    if (!(s > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(s), n_points - 1);
}

}  // namespace xfp
