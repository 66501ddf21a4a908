#pragma once

#include <cstddef>
#include <vector>

namespace xfp {

/// Uniform periodic grid on [q_min, q_max) with n_points nodes,
/// q_i = q_min + i * dq.
struct Grid {
    double q_min = -25.6;
    double q_max = 25.6;
    std::size_t n_points = 512;

    /// Throws ConfigError unless q_max > q_min and n_points is a power of two >= 8.
    void validate() const;

    double dq() const { return (q_max - q_min) / static_cast<double>(n_points); }
    double q(std::size_t i) const { return q_min + static_cast<double>(i) * dq(); }
    std::vector<double> coordinates() const;
    /// Angular wavenumbers in FFT order.
    std::vector<double> wavenumbers() const;
    /// Index of the node closest to q (clamped to the grid).
    std::size_t nearest_index(double q) const;

    bool operator==(const Grid&) const = default;
};

}  // namespace xfp
