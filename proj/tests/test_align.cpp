#include <gtest/gtest.h>

#include "polarkit/align.hpp"
#include "polarkit/error.hpp"
#include "polarkit/fft.hpp"
#include "support/test_support.hpp"

namespace polarkit {
namespace {

using testing::shifted_circular;
using testing::texture;

TEST(Fft, MatchesDirectDftOnSmallSizes) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n;
    for (auto [w, h] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 4}, std::pair{5, 7}, std::pair{8, 16},
                        std::pair{16, 16}, std::pair{12, 9}}) {
        std::vector<std::complex<double>> grid(std::size_t(w * h));
        for (auto& v : grid) v = {n(rng), n(rng)};
        const auto fast = fft2d(grid, w, h);
        const auto slow = testing::direct_dft(grid, w, h);
        for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_LE(std::abs(fast[k] - slow[k]), 1e-9);
        const auto back = fft2d(fast, w, h, FftDirection::Inverse);
        for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_LE(std::abs(back[k] - grid[k]), 1e-12);
    }
}

TEST(Fft, PowerOfTwoHelpers) {
    EXPECT_TRUE(is_power_of_two(1));
    EXPECT_TRUE(is_power_of_two(64));
    EXPECT_FALSE(is_power_of_two(0));
    EXPECT_FALSE(is_power_of_two(12));
    EXPECT_EQ(next_power_of_two(1), 1);
    EXPECT_EQ(next_power_of_two(17), 32);
    EXPECT_EQ(next_power_of_two(32), 32);
}

TEST(PhaseCorrelate, IdenticalImages) {
    const Image a = texture(32, 32, 1.5, 1);
    EXPECT_EQ(phase_correlate(a, a), (PixelShift{0, 0}));
}

TEST(PhaseCorrelate, CircularShift) {
    const Image a = texture(64, 32, 1.5, 2);
    EXPECT_EQ(phase_correlate(a, shifted_circular(a, 3, -2)), (PixelShift{3, -2}));
}

TEST(PhaseCorrelate, CircularShiftWithNoise) {
    const Image a = texture(64, 64, 1.5, 3, 0.0, 1.0);
    Image b = shifted_circular(a, 3, -2);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (double& v : b.data()) v += noise(rng);
    EXPECT_EQ(phase_correlate(a, b), (PixelShift{3, -2}));
}

TEST(PhaseCorrelate, ExactForAllShiftsWithinQuarterSize) {
    const Image a = testing::random_image(16, 16, 1, 4);
    for (int dy = -4; dy <= 4; ++dy) {
        for (int dx = -4; dx <= 4; ++dx) EXPECT_EQ(phase_correlate(a, shifted_circular(a, dx, dy)), (PixelShift{dx, dy}));
    }
}

TEST(PhaseCorrelate, TieBreaksTowardSmallestShift) {
    // A constant image correlates equally everywhere.
    const Image flat(8, 8, 1, 0.5);
    EXPECT_EQ(phase_correlate(flat, flat), (PixelShift{0, 0}));
}

TEST(PhaseCorrelate, RejectsBadSizes) {
    EXPECT_THROW(phase_correlate(Image(12, 16, 1), Image(12, 16, 1)), UsageError);
    EXPECT_THROW(phase_correlate(Image(16, 16, 1), Image(8, 8, 1)), UsageError);
    EXPECT_THROW(phase_correlate(Image(4, 4, 1), Image(4, 4, 1)), UsageError);
}

Correspondences grid_pairs(const AffineTransform& t) {
    Correspondences out;
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            const double sx = 10.0 * x + 3.0;
            const double sy = 8.0 * y - 2.0;
            const auto [tx, ty] = t.apply(sx, sy);
            out.push_back({sx, sy, tx, ty});
        }
    }
    return out;
}

TEST(EstimateAffine, IdentityAndTranslation) {
    const AffineTransform id = estimate_affine(grid_pairs(AffineTransform::identity()));
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(id.m[k], AffineTransform::identity().m[k], 1e-12);
    const AffineTransform tr = estimate_affine(grid_pairs(AffineTransform::translation(5, 7)));
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(tr.m[k], AffineTransform::translation(5, 7).m[k], 1e-12);
}

TEST(EstimateAffine, RecoversRandomWellConditionedTransforms) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const AffineTransform t{{1.0 + 0.3 * u(rng), 0.3 * u(rng), 20 * u(rng), 0.3 * u(rng), 1.0 + 0.3 * u(rng), 20 * u(rng)}};
        const AffineTransform fit = estimate_affine(grid_pairs(t));
        for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(fit.m[k], t.m[k], 1e-9);
    }
}

TEST(EstimateAffine, LeastSquaresOnNoisyPairs) {
    Correspondences pairs = grid_pairs(AffineTransform::translation(1, 2));
    pairs[0].tx += 0.5;
    pairs[1].tx -= 0.5;
    const AffineTransform fit = estimate_affine(pairs);
    EXPECT_NEAR(fit.m[5], 2.0, 1e-9);
    EXPECT_NEAR(fit.m[2], 1.0, 0.1);
}

TEST(EstimateAffine, DegenerateConfigurations) {
    EXPECT_THROW(estimate_affine(Correspondences{{0, 0, 0, 0}, {1, 1, 1, 1}}), UsageError);
    EXPECT_THROW(estimate_affine(Correspondences{{0, 0, 0, 0}, {1, 1, 1, 1}, {2, 2, 2, 2}, {3, 3, 3, 3}}), DomainError);
    EXPECT_THROW(estimate_affine(Correspondences{{1, 1, 0, 0}, {1, 1, 1, 1}, {1, 1, 2, 2}}), DomainError);
}

TEST(AffineTransform, InverseComposesToIdentity) {
    const AffineTransform t{{1.1, 0.2, 3.0, -0.1, 0.9, -4.0}};
    const AffineTransform inv = t.inverse();
    const auto [x, y] = t.apply(2.5, -7.0);
    const auto [bx, by] = inv.apply(x, y);
    EXPECT_NEAR(bx, 2.5, 1e-12);
    EXPECT_NEAR(by, -7.0, 1e-12);
    EXPECT_THROW((AffineTransform{{1, 2, 0, 2, 4, 0}}).inverse(), DomainError);
}

TEST(Warp, IdentityIsExact) {
    const Image img = testing::random_image(9, 7, 3, 5);
    EXPECT_EQ(warp(img, AffineTransform::identity()), img);
}

TEST(Warp, IntegerTranslationOfConstant) {
    const Image img(8, 8, 1, 0.4);
    EXPECT_EQ(warp(img, AffineTransform::translation(3, -2)), img);
}

TEST(Warp, TranslationMovesContent) {
    const Image img = testing::random_image(10, 10, 1, 6);
    const Image out = warp(img, AffineTransform::translation(2, 1));
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 8; ++x) EXPECT_EQ(out.at(x, y), img.at(x + 2, y + 1));
    }
    // Reflect padding past the right edge.
    EXPECT_EQ(out.at(8, 0), img.at(8, 1));
}

TEST(Warp, ForwardThenInverseRecoversSmoothImage) {
    const Image img = texture(64, 64, 8.0, 7);
    const AffineTransform t{{1.02, 0.05, 1.3, -0.04, 0.98, -0.7}};
    const Image back = warp(warp(img, t), t.inverse());
    double s = 0.0;
    int n = 0;
    for (int y = 8; y < 56; ++y) {
        for (int x = 8; x < 56; ++x) {
            const double d = back.at(x, y) - img.at(x, y);
            s += d * d;
            ++n;
        }
    }
    EXPECT_LE(std::sqrt(s / n), 1e-3);
}

TEST(Warp, PerChannelTransformsAndErrors) {
    const Image img = testing::random_image(8, 8, 3, 9);
    const std::vector<AffineTransform> ts{AffineTransform::identity(), AffineTransform::translation(1, 0),
                                          AffineTransform::identity()};
    const Image out = warp_channels(img, ts);
    EXPECT_EQ(out.channel(0), img.channel(0));
    EXPECT_EQ(out.at(0, 0, 1), img.at(1, 0, 1));
    EXPECT_THROW(warp_channels(img, std::vector<AffineTransform>(2)), UsageError);
    EXPECT_THROW(warp(img, AffineTransform{{0, 0, 0, 0, 0, 0}}), DomainError);
}

TEST(RawPlanes, SplitMergeRoundTrip) {
    std::mt19937_64 rng(3);
    RawMosaic m(16, 8, 2);
    for (auto& s : m.samples) s = std::uint16_t(rng() & 0xffff);
    const RawPlanes planes = split_raw_planes(m);
    EXPECT_EQ(planes[5].at(1, 1), m.at(5, 5) / 65535.0);
    EXPECT_EQ(merge_raw_planes(planes, 2), m);
}

TEST(RawPlanes, PlaneTransformRoundTrip) {
    const AffineTransform t{{1.01, 0.02, 5.0, -0.03, 0.99, -3.0}};
    for (int p = 0; p < kRawPlanes; ++p) {
        const AffineTransform back = mosaic_transform(plane_transform(t, p), p);
        for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(back.m[k], t.m[k], 1e-12);
    }
    const AffineTransform shift = plane_transform(AffineTransform::translation(8, -4), 7);
    EXPECT_EQ(shift, AffineTransform::translation(2, -1));
}

TEST(RawPlanes, WarpRawByMultipleOfFourMatchesShift) {
    std::mt19937_64 rng(10);
    RawMosaic m(32, 32, 0);
    for (auto& s : m.samples) s = std::uint16_t(rng() & 0xffff);
    const RawMosaic out = warp_raw(m, plane_transforms(AffineTransform::translation(4, 8)));
    for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 28; ++x) EXPECT_EQ(out.at(x, y), m.at(x + 4, y + 8));
    }
}

TEST(RawPlanes, TranslationEstimateFindsShift) {
    const Image scene = texture(64, 64, 1.5, 11);
    RawMosaic ref(128, 128, 0);
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) ref.at(x, y) = std::uint16_t(std::lround(scene.at(x / 2, y / 2) * 65535));
    }
    const RawMosaic moving = warp_raw(ref, plane_transforms(AffineTransform::translation(-8, 4)));
    const RawTransforms est = estimate_raw_translation(ref, moving);
    for (int p = 0; p < kRawPlanes; ++p) EXPECT_EQ(mosaic_transform(est[std::size_t(p)], p), AffineTransform::translation(8, -4));
}

TEST(Correspondences, ReadsFile) {
    testing::TempDir dir;
    testing::write_text(dir / "c.txt", "# sx sy tx ty\n0 0 1 1\n  2 3 4 5 # trailing\n\n");
    const Correspondences c = read_correspondences(dir / "c.txt");
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[1].ty, 5.0);
    testing::write_text(dir / "bad.txt", "1 2 3\n");
    EXPECT_THROW(read_correspondences(dir / "bad.txt"), FormatError);
    EXPECT_THROW(read_correspondences(dir / "missing.txt"), IoError);
}

}  // namespace
}  // namespace polarkit
