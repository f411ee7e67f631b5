#pragma once

#include <cstdint>
#include <vector>

#include "polarkit/image.hpp"

namespace polarkit {

/// Radiance images behind a linear polarizer at 0, 45, 90 and 135 degrees.
struct PolarFrame {
    Image i0, i45, i90, i135;

    /// Throws UsageError on mismatched geometry, DomainError on negative or
    /// non-finite samples.
    void validate() const;
};

/// Linear Stokes components per pixel and channel.
struct StokesMap {
    Image s0, s1, s2;

    void validate() const;
};

/// Angle of linear polarization together with the pixels where it is
/// undefined (s1 = s2 = 0).
struct AolpMap {
    Image angle;
    std::vector<std::uint8_t> degenerate;  // one flag per sample of `angle`
};

/// s0 below this is treated as zero intensity.
inline constexpr double kStokesEpsilon = 1e-9;

StokesMap compute_stokes(const PolarFrame& frame);

/// sqrt(s1^2 + s2^2) / s0 clamped to [0, 1]; zero where s0 <= kStokesEpsilon.
Image dolp(const StokesMap& s);

/// 0.5 * atan2(s2, s1) mapped to (-pi/2, pi/2].
AolpMap aolp(const StokesMap& s);

/// Total intensity (i0 + i45 + i90 + i135) / 2, i.e. s0.
Image unpolarized(const PolarFrame& frame);

/// Intensity seen through an ideal linear polarizer at `phi` radians.
Image intensity_at(const StokesMap& s, double phi);

/// intensity_at sampled at the four canonical polarizer angles.
PolarFrame frame_from_stokes(const StokesMap& s);

}  // namespace polarkit
