#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "xfphoton/grid.hpp"

namespace xfp {

using cplx = std::complex<double>;

/// FFTW-backed transforms on a fixed grid. Plans are built with
/// FFTW_ESTIMATE and always execute on the object's own aligned buffers, so
/// results are bit-reproducible across runs.
///
/// Not thread-safe; use one instance per propagation.
class Spectral {
public:
    explicit Spectral(const Grid& grid);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;
    Spectral(Spectral&&) noexcept;
    Spectral& operator=(Spectral&&) noexcept;

    const Grid& grid() const { return grid_; }
    const std::vector<double>& wavenumbers() const { return k_; }

    /// In-place on the position-space buffer: x -> k (unnormalized).
    void forward(std::span<cplx> data);
    /// k -> x including the 1/n normalization.
    void backward(std::span<cplx> data);

    /// Multiplies the k-space representation by factor[k].
    void apply_in_k(std::span<cplx> data, std::span<const cplx> factor);

    /// d/dq by spectral differentiation.
    void derivative(std::span<const cplx> in, std::span<cplx> out);

    /// sum_k k^2 |psi_k|^2 dq / n  ==  <p^2> of the (unnormalized) amplitude.
    double p2_expectation(std::span<const cplx> psi);

private:
    struct Plans;
    Grid grid_;
    std::vector<double> k_;
    std::unique_ptr<Plans> plans_;
};

}  // namespace xfp
