#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace xfp {

/// Central first derivative on a uniform grid. `order` is 2, 4 or 6; the
/// order drops near the ends, where too few neighbours exist, down to a
/// second-order one-sided formula at the first and last node.
template <class T>
void first_derivative(std::span<const T> f, double h, int order, std::span<T> out) {
    if (order != 2 && order != 4 && order != 6)
        throw std::invalid_argument("stencil order must be 2, 4 or 6");
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("need at least 3 points for a derivative");
    const double inv = 1.0 / h;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t room = std::min(i, n - 1 - i);
        if (room == 0) {
            out[i] = i == 0 ? (-3.0 * f[0] + 4.0 * f[1] - f[2]) * (0.5 * inv)
                            : (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * (0.5 * inv);
        } else if (room >= 3 && order == 6) {
            out[i] = (-f[i - 3] + 9.0 * f[i - 2] - 45.0 * f[i - 1] + 45.0 * f[i + 1] -
                      9.0 * f[i + 2] + f[i + 3]) *
                     (inv / 60.0);
        } else if (room >= 2 && order >= 4) {
            out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * (inv / 12.0);
        } else {
            out[i] = (f[i + 1] - f[i - 1]) * (0.5 * inv);
        }
    }
}

}  // namespace xfp
