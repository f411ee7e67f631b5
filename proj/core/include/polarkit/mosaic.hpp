#pragma once

#include <array>
#include <cstdint>

#include "polarkit/image.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/stokes.hpp"

namespace polarkit {

enum class BayerColor : std::uint8_t { Red = 0, Green = 1, Blue = 2 };

/// 2x2 colour tile, indexed [row][col].
using BayerPattern = std::array<std::array<BayerColor, 2>, 2>;

/// Polarizer angles in the repeating 2x2 super-pixel (degrees, [row][col]) and
/// the Bayer tile applied to 2x2 blocks of super-pixels.
struct MosaicLayout {
    std::array<std::array<int, 2>, 2> angle_pattern{{{90, 45}, {135, 0}}};
    BayerPattern bayer_pattern{{{BayerColor::Red, BayerColor::Green}, {BayerColor::Green, BayerColor::Blue}}};

    /// Throws UsageError unless the angles are a permutation of {0, 45, 90, 135}
    /// and the tile holds one red, one blue and two greens.
    void validate() const;

    /// (row, col) of `angle_deg` inside the super-pixel.
    std::array<int, 2> site_of(int angle_deg) const;

    bool operator==(const MosaicLayout&) const = default;
};

inline constexpr std::array<int, 4> kPolarizerAngles{0, 45, 90, 135};

/// Registered layouts:
///   0  angles [[90,45],[135,0]], RGGB (default)
///   1  angles [[90,45],[135,0]], BGGR
///   2  angles [[0,45],[135,90]], RGGB
///   3  angles [[0,45],[135,90]], BGGR
bool is_known_layout(std::uint8_t id);
MosaicLayout layout_from_id(std::uint8_t id);
inline MosaicLayout default_layout() { return MosaicLayout{}; }

inline BayerColor bayer_color(const BayerPattern& pattern, int x, int y) noexcept {
    return pattern[std::size_t(y & 1)][std::size_t(x & 1)];
}

/// Quarter-resolution Bayer images, one per polarizer angle, ordered as
/// kPolarizerAngles.
using AngleImages = std::array<Image, 4>;

AngleImages split_angles(const RawMosaic& mosaic, const MosaicLayout& layout);

/// Bilinear demosaicking with reflect-101 borders: native samples pass through
/// and each missing colour is the mean of its same-colour 3x3 neighbours.
Image demosaic_bilinear(const Image& bayer, const BayerPattern& pattern);

PolarFrame decode_frame(const RawMosaic& mosaic, const MosaicLayout& layout);

}  // namespace polarkit
