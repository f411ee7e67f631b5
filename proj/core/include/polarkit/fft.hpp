#pragma once

#include <complex>
#include <span>
#include <vector>

#include "polarkit/image.hpp"

namespace polarkit {

using Complex = std::complex<double>;

enum class FftDirection { Forward, Inverse };

/// 2-D DFT of a row-major grid (`width` columns, `height` rows). Forward uses
/// exp(-2*pi*i*k*n/N); the inverse is scaled by 1 / (width * height).
std::vector<Complex> fft2d(std::span<const Complex> grid, int width, int height,
                           FftDirection direction = FftDirection::Forward);

/// Forward DFT of one channel of `img`, zero-padded to `padded_width` x
/// `padded_height`.
std::vector<Complex> fft2d_channel(const Image& img, int channel, int padded_width, int padded_height);

bool is_power_of_two(int n) noexcept;
int next_power_of_two(int n) noexcept;

}  // namespace polarkit
