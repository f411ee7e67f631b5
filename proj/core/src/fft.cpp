#include "polarkit/fft.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex, FftwFree>;

struct PlanDestroy {
    void operator()(fftw_plan_s* p) const noexcept {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDestroy>;

FftwBuffer allocate(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer(p);
}

}  // namespace

std::vector<Complex> fft2d(std::span<const Complex> grid, int width, int height, FftDirection direction) {
    if (width <= 0 || height <= 0) throw UsageError("fft2d: dimensions must be positive");
    const std::size_t n = std::size_t(width) * std::size_t(height);
    if (grid.size() != n) throw UsageError("fft2d: grid size does not match dimensions");

    FftwBuffer in = allocate(n);
    FftwBuffer out = allocate(n);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_2d(height, width, in.get(), out.get(),
                                    direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE));
    }
    if (!plan) throw DomainError("fft2d: planner failed");
    for (std::size_t k = 0; k < n; ++k) {
        in.get()[k][0] = grid[k].real();
        in.get()[k][1] = grid[k].imag();
    }
    fftw_execute(plan.get());

    std::vector<Complex> result(n);
    for (std::size_t k = 0; k < n; ++k) result[k] = Complex(out.get()[k][0], out.get()[k][1]);
    if (direction == FftDirection::Inverse) {
        const double scale = 1.0 / double(n);
        for (Complex& v : result) v *= scale;
    }
    return result;
}

std::vector<Complex> fft2d_channel(const Image& img, int channel, int padded_width, int padded_height) {
    if (padded_width < img.width() || padded_height < img.height()) {
        throw UsageError("fft2d_channel: padded size smaller than image");
    }
    std::vector<Complex> grid(std::size_t(padded_width) * std::size_t(padded_height));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            grid[std::size_t(y) * std::size_t(padded_width) + std::size_t(x)] = img.at(x, y, channel);
        }
    }
    return fft2d(grid, padded_width, padded_height);
}

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) noexcept {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace polarkit
