#include <gtest/gtest.h>

#include <numbers>

#include "polarkit/error.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/mosaic.hpp"
#include "polarkit/optics.hpp"
#include "support/test_support.hpp"

namespace polarkit {
namespace {

constexpr double kPi = std::numbers::pi;

// Fresnel power coefficients through the sine/tangent forms, independent of
// the cosine form used by the library.
std::pair<double, double> fresnel_oracle(double n1, double n2, double theta) {
    const double theta_t = std::asin(n1 * std::sin(theta) / n2);
    const double rs = std::pow(std::sin(theta - theta_t) / std::sin(theta + theta_t), 2);
    const double rp = std::pow(std::tan(theta - theta_t) / std::tan(theta + theta_t), 2);
    return {rs, rp};
}

SceneSpec scene_of(const Image& t, const Image& r, double theta, double phi_perp = 0.0) {
    SceneSpec s;
    s.transmission = t;
    s.reflection = r;
    s.interface = InterfaceSpec{1.0, 1.5, theta};
    s.phi_perp = phi_perp;
    return s;
}

TEST(Fresnel, NormalIncidence) {
    const FresnelCoefficients f = fresnel({1.0, 1.5, 0.0});
    EXPECT_NEAR(f.rs, 0.04, 1e-15);
    EXPECT_NEAR(f.rp, 0.04, 1e-15);
    EXPECT_EQ(f.rs, std::pow((1.0 - 1.5) / 2.5, 2));
}

TEST(Fresnel, FortyFiveDegreesMatchesOracle) {
    const FresnelCoefficients f = fresnel({1.0, 1.5, kPi / 4});
    const auto [rs, rp] = fresnel_oracle(1.0, 1.5, kPi / 4);
    EXPECT_NEAR(f.rs, rs, 1e-14);
    EXPECT_NEAR(f.rp, rp, 1e-14);
    EXPECT_NEAR(f.rs, 0.0920, 5e-5);
    EXPECT_NEAR(f.rp, 0.0085, 5e-5);
}

TEST(Fresnel, MatchesOracleOverRandomInterfaces) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> n(1.1, 2.5);
    std::uniform_real_distribution<double> th(0.01, kPi / 2 - 0.01);
    for (int k = 0; k < 200; ++k) {
        const double n2 = n(rng);
        const double theta = th(rng);
        const FresnelCoefficients f = fresnel({1.0, n2, theta});
        const auto [rs, rp] = fresnel_oracle(1.0, n2, theta);
        EXPECT_NEAR(f.rs, rs, 1e-12);
        EXPECT_NEAR(f.rp, rp, 1e-12);
        EXPECT_EQ(f.rs + f.ts, 1.0);
        EXPECT_EQ(f.rp + f.tp, 1.0);
    }
}

TEST(Fresnel, TotalInternalReflectionIsDomainError) {
    EXPECT_THROW(fresnel({1.5, 1.0, 1.2}), DomainError);
    EXPECT_THROW(fresnel({1.0, 1.5, kPi / 2}), DomainError);
    EXPECT_THROW(fresnel({0.0, 1.5, 0.1}), DomainError);
}

TEST(Fresnel, MonotoneReflectanceAndBrewsterMinimum) {
    const double brewster = brewster_angle(1.0, 1.5);
    double prev_rs = -1.0;
    double min_rp = 1.0;
    double argmin = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double theta = (kPi / 2) * k / 1000.0;
        const FresnelCoefficients f = fresnel({1.0, 1.5, theta});
        EXPECT_GT(f.rs, prev_rs);
        prev_rs = f.rs;
        if (f.rp < min_rp) {
            min_rp = f.rp;
            argmin = theta;
        }
    }
    EXPECT_NEAR(argmin, brewster, kPi / 2000 + 1e-12);
}

TEST(Brewster, Examples) {
    EXPECT_NEAR(brewster_angle(1.0, 1.5), 0.982793723247329, 1e-12);
    EXPECT_NEAR(brewster_angle(1.0, 1.5) * 180 / kPi, 56.31, 5e-3);
    EXPECT_DOUBLE_EQ(brewster_angle(1.0, 1.0), kPi / 4);
    EXPECT_LE(fresnel({1.0, 1.5, brewster_angle(1.0, 1.5)}).rp, 1e-12);
    EXPECT_THROW(brewster_angle(-1.0, 1.5), DomainError);
}

TEST(Synthesize, BrewsterReflectionIsFullyPolarized) {
    const Image r = testing::random_image(8, 8, 3, 1, 0.1, 1.0);
    const Synthesis s = synthesize(scene_of(Image(8, 8, 3), r, brewster_angle(1.0, 1.5)));
    EXPECT_NEAR(s.dolp_reflection, 1.0, 1e-12);
    const Image d = dolp(s.mixed);
    for (double v : d.data()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Synthesize, NormalIncidenceTransmissionIsUnpolarized) {
    const Image t = testing::random_image(8, 8, 1, 2, 0.1, 1.0);
    const Synthesis s = synthesize(scene_of(t, Image(8, 8, 1), 0.0));
    EXPECT_EQ(s.dolp_transmission, 0.0);
    const Image d = dolp(s.mixed);
    for (double v : d.data()) EXPECT_EQ(v, 0.0);

    SceneSpec extra = scene_of(t, Image(8, 8, 1), 0.0);
    extra.dolp_t_extra = 0.3;
    EXPECT_EQ(synthesize(extra).dolp_transmission, 0.3);
}

TEST(Synthesize, MixedIntensityIsWeightedSum) {
    // alpha_t = 0.8 and alpha_r = 0.2 through a direct Stokes sum.
    const StokesMap t{Image(1, 1, 1, 0.8 * 0.5), Image(1, 1, 1), Image(1, 1, 1)};
    const StokesMap r{Image(1, 1, 1, 0.2 * 1.0), Image(1, 1, 1, 0.2), Image(1, 1, 1)};
    const PolarFrame f = frame_from_stokes(StokesMap{Image(1, 1, 1, t.s0.at(0, 0) + r.s0.at(0, 0)), r.s1, r.s2});
    EXPECT_NEAR(unpolarized(f).at(0, 0), 0.6, 1e-15);
}

TEST(Synthesize, UnpolarizedMixedMatchesMixingModel) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Image t = testing::random_image(6, 4, 3, rng());
        const Image r = testing::random_image(6, 4, 3, rng());
        SceneSpec scene = scene_of(t, r, 1.4 * u(rng), kPi * (u(rng) - 0.5));
        scene.interface.n2 = 1.1 + 1.4 * u(rng);
        scene.dolp_t_extra = 0.5 * u(rng);
        const Synthesis s = synthesize(scene);
        EXPECT_DOUBLE_EQ(s.alpha_r, (s.coefficients.rs + s.coefficients.rp) / 2);
        EXPECT_DOUBLE_EQ(s.alpha_t, (s.coefficients.ts + s.coefficients.tp) / 2);
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double expect = s.alpha_t * t.data()[k] + s.alpha_r * r.data()[k];
            EXPECT_NEAR(s.mixed.s0.data()[k], expect, 1e-12);
            EXPECT_NEAR(unpolarized(s.frame).data()[k], expect, 1e-12);
        }
    }
}

TEST(Synthesize, TransmissionPolarizedPerpendicularToReflection) {
    SceneSpec scene = scene_of(Image(2, 2, 1, 0.5), Image(2, 2, 1, 0.5), 0.7, 0.3);
    const Synthesis s = synthesize(scene);
    const double reflection_angle = aolp(s.reflection_stokes).angle.at(0, 0);
    double transmission_angle = aolp(s.transmission_stokes).angle.at(0, 0);
    EXPECT_NEAR(reflection_angle, 0.3, 1e-12);
    EXPECT_NEAR(transmission_angle, 0.3 + kPi / 2 - kPi, 1e-12);
}

TEST(Synthesize, UnpolarizedTransmissionFlag) {
    SceneSpec scene = scene_of(Image(2, 2, 1, 0.5), Image(2, 2, 1), brewster_angle(1.0, 1.5));
    EXPECT_GT(synthesize(scene).dolp_transmission, 0.0);
    scene.unpolarized_transmission = true;
    const Synthesis s = synthesize(scene);
    EXPECT_EQ(s.dolp_transmission, 0.0);
    const Image d = dolp(s.mixed);
    for (double v : d.data()) EXPECT_EQ(v, 0.0);
}

TEST(Synthesize, Errors) {
    EXPECT_THROW(synthesize(scene_of(Image(2, 2, 1), Image(4, 2, 1), 0.1)), UsageError);
    EXPECT_THROW(synthesize(scene_of(Image(2, 2, 1, -1.0), Image(2, 2, 1), 0.1)), DomainError);
    EXPECT_THROW(synthesize(scene_of(Image(2, 2, 1), Image(2, 2, 1), 0.1, -kPi / 2)), DomainError);
    SceneSpec bad = scene_of(Image(2, 2, 1), Image(2, 2, 1), 0.1);
    bad.interface = {1.5, 1.0, 1.3};
    EXPECT_THROW(synthesize(bad), DomainError);
}

TEST(RenderMosaic, UniformUnpolarizedScene) {
    const RenderedMosaic m = render_mosaic(scene_of(Image(4, 4, 3, 0.5), Image(4, 4, 3), 0.0), default_layout());
    EXPECT_EQ(m.mosaic.width, 8);
    EXPECT_EQ(m.clipped, 0u);
    const auto [lo, hi] = std::minmax_element(m.mosaic.samples.begin(), m.mosaic.samples.end());
    EXPECT_LE(*hi - *lo, 1);
}

TEST(RenderMosaic, ZeroSceneAndClipping) {
    const RenderedMosaic zero = render_mosaic(scene_of(Image(4, 4, 1), Image(4, 4, 1), 0.3), default_layout());
    for (auto v : zero.mosaic.samples) EXPECT_EQ(v, 0);
    const RenderedMosaic hot = render_mosaic(scene_of(Image(4, 4, 1, 3.0), Image(4, 4, 1), 0.0), default_layout());
    EXPECT_EQ(hot.clipped, hot.mosaic.samples.size());
    EXPECT_THROW(render_mosaic(scene_of(Image(3, 4, 1), Image(3, 4, 1), 0.0), default_layout()), UsageError);
}

TEST(RenderMosaic, DecodeMatchesFrameAtNativeSites) {
    const Image t = testing::texture(32, 32, 3.0, 1);
    Image t_rgb = Image::merge(std::vector<Image>{t, testing::scaled(t, 0.8), testing::scaled(t, 0.6)});
    const Image r = Image::merge(std::vector<Image>{testing::texture(32, 32, 3.0, 2), testing::texture(32, 32, 3.0, 3),
                                                    testing::texture(32, 32, 3.0, 4)});
    for (int id = 0; id <= 3; ++id) {
        const MosaicLayout layout = layout_from_id(std::uint8_t(id));
        const SceneSpec scene = scene_of(t_rgb, r, 0.9, 0.2);
        const Synthesis syn = synthesize(scene);
        const RenderedMosaic m = render_mosaic(scene, layout, std::uint8_t(id));
        const PolarFrame decoded = decode_frame(m.mosaic, layout);
        const std::array<std::pair<const Image*, const Image*>, 4> pairs{
            {{&decoded.i0, &syn.frame.i0}, {&decoded.i45, &syn.frame.i45}, {&decoded.i90, &syn.frame.i90},
             {&decoded.i135, &syn.frame.i135}}};
        for (const auto& [got, want] : pairs) {
            for (int y = 0; y < 32; ++y) {
                for (int x = 0; x < 32; ++x) {
                    const int c = int(bayer_color(layout.bayer_pattern, x, y));
                    EXPECT_NEAR(got->at(x, y, c), want->at(x, y, c), 0.5 / 65535.0 + 1e-12);
                }
            }
        }
    }
}

TEST(LoadScene, ReadsParameterFile) {
    testing::TempDir dir;
    write_image(Image(4, 4, 1, 0.5), dir / "t.pfm", ImageFormat::Pfm);
    testing::write_text(dir / "p.txt", "n1 = 1\nn2 = 1.5\ntheta_deg = brewster\nphi_perp_deg = 30\n");
    const SceneSpec s = load_scene(dir / "p.txt", dir / "t.pfm", std::nullopt);
    EXPECT_DOUBLE_EQ(s.interface.theta, brewster_angle(1.0, 1.5));
    EXPECT_NEAR(s.phi_perp, kPi / 6, 1e-15);
    EXPECT_EQ(s.reflection, Image(4, 4, 1));
    testing::write_text(dir / "q.txt", "bogus = 1\n");
    EXPECT_THROW(load_scene(dir / "q.txt", dir / "t.pfm", std::nullopt), FormatError);
}

}  // namespace
}  // namespace polarkit
