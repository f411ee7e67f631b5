#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "polarkit/image.hpp"
#include "polarkit/image_io.hpp"

namespace polarkit {

/// 2x3 matrix [a b c; d e f] mapping an output pixel (x, y) to the source
/// position (a*x + b*y + c, d*x + e*y + f) it samples from.
struct AffineTransform {
    std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

    static AffineTransform identity() { return {}; }
    static AffineTransform translation(double dx, double dy) { return {{1.0, 0.0, dx, 0.0, 1.0, dy}}; }

    std::array<double, 2> apply(double x, double y) const noexcept {
        return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
    }
    double determinant() const noexcept { return m[0] * m[4] - m[1] * m[3]; }
    bool is_identity() const noexcept { return *this == identity(); }

    /// Throws DomainError when |det| <= 1e-6.
    AffineTransform inverse() const;

    bool operator==(const AffineTransform&) const = default;
};

/// A source point and the target point it should land on.
struct Correspondence {
    double sx = 0.0, sy = 0.0, tx = 0.0, ty = 0.0;
};
using Correspondences = std::vector<Correspondence>;

/// One "sx sy tx ty" quadruple per line; '#' starts a comment.
Correspondences read_correspondences(const std::filesystem::path& path);

struct PixelShift {
    int dx = 0;
    int dy = 0;
    bool operator==(const PixelShift&) const = default;
};

/// Integer shift d such that b(x) ~ a(x - d), from the peak of the inverse
/// DFT of the normalized cross-power spectrum. Equal peaks resolve to the
/// smallest |d|, then lexicographically. Both images must be single-channel
/// with equal power-of-two sides of at least 8.
PixelShift phase_correlate(const Image& a, const Image& b);

/// Least-squares affine A minimizing sum |A*src - dst|^2. Needs at least three
/// non-collinear pairs; a rank-deficient configuration raises DomainError.
AffineTransform estimate_affine(std::span<const Correspondence> pairs);

/// Inverse warp with bilinear sampling and reflect-101 borders.
Image warp(const Image& img, const AffineTransform& t);

/// Like warp, with one transform per channel.
Image warp_channels(const Image& img, std::span<const AffineTransform> per_channel);

// Raw-domain alignment. A 16-bit mosaic is split into 16 planes, one per
// position in the 4x4 period (one polarizer angle and one colour each), so
// every plane is warped without mixing sensor sites.

inline constexpr int kRawPlanes = 16;
using RawPlanes = std::array<Image, kRawPlanes>;
using RawTransforms = std::array<AffineTransform, kRawPlanes>;

/// Plane p = 4*row + col holds mosaic(4*qx + col, 4*qy + row) / 65535.
RawPlanes split_raw_planes(const RawMosaic& mosaic);
/// Inverse of split_raw_planes; samples are rounded half up to 16 bits and
/// saturated.
RawMosaic merge_raw_planes(const RawPlanes& planes, std::uint8_t layout_id);

/// Expresses a transform in mosaic pixel coordinates in the coordinates of
/// plane `plane`.
AffineTransform plane_transform(const AffineTransform& mosaic_transform, int plane);
RawTransforms plane_transforms(const AffineTransform& mosaic_transform);

/// Translation of plane `plane` read back in mosaic pixels (4x the plane shift).
AffineTransform mosaic_transform(const AffineTransform& plane_transform, int plane);

RawMosaic warp_raw(const RawMosaic& mosaic, const RawTransforms& transforms);

/// Per-plane phase correlation of `moving` against `reference`, each plane
/// cropped to its largest centred power-of-two window. Returns the plane
/// transforms that warp `moving` onto `reference`.
RawTransforms estimate_raw_translation(const RawMosaic& reference, const RawMosaic& moving);

}  // namespace polarkit
