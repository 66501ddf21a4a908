#include "xfphoton/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace xfp {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Spectral::Plans {
    std::size_t n;
    fftw_complex* buffer;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit Plans(std::size_t n_) : n(n_) {
        std::lock_guard lock(planner_mutex());
        buffer = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buffer);
    }
    cplx* data() { return reinterpret_cast<cplx*>(buffer); }
};

Spectral::Spectral(const Grid& grid)
    : grid_(grid), k_(grid.wavenumbers()), plans_(std::make_unique<Plans>(grid.n_points)) {}

Spectral::~Spectral() = default;
Spectral::Spectral(Spectral&&) noexcept = default;
Spectral& Spectral::operator=(Spectral&&) noexcept = default;

void Spectral::forward(std::span<cplx> data) {
    std::copy(data.begin(), data.end(), plans_->data());
    fftw_execute(plans_->fwd);
    std::copy_n(plans_->data(), plans_->n, data.begin());
}

void Spectral::backward(std::span<cplx> data) {
    std::copy(data.begin(), data.end(), plans_->data());
    fftw_execute(plans_->bwd);
    const double scale = 1.0 / static_cast<double>(plans_->n);
    const cplx* src = plans_->data();
    for (std::size_t i = 0; i < plans_->n; ++i) data[i] = src[i] * scale;
}

void Spectral::apply_in_k(std::span<cplx> data, std::span<const cplx> factor) {
    forward(data);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= factor[i];
    backward(data);
}

void Spectral::derivative(std::span<const cplx> in, std::span<cplx> out) {
    std::copy(in.begin(), in.end(), out.begin());
    forward(out);
    const std::size_t n = plans_->n;
    for (std::size_t i = 0; i < n; ++i) out[i] *= cplx(0.0, k_[i]);
    // The Nyquist mode has no consistent derivative on a real grid.
    out[n / 2] = 0.0;
    backward(out);
}

double Spectral::p2_expectation(std::span<const cplx> psi) {
    std::copy(psi.begin(), psi.end(), plans_->data());
    fftw_execute(plans_->fwd);
    const cplx* c = plans_->data();
    double acc = 0.0;
    for (std::size_t i = 0; i < plans_->n; ++i) acc += k_[i] * k_[i] * std::norm(c[i]);
    return acc * grid_.dq() / static_cast<double>(plans_->n);
}

}  // namespace xfp
