#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "polarkit/image.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/mosaic.hpp"
#include "polarkit/stokes.hpp"

namespace polarkit {

/// Planar dielectric interface: incident index n1, glass index n2 and the
/// angle of incidence theta in radians.
struct InterfaceSpec {
    double n1 = 1.0;
    double n2 = 1.5;
    double theta = 0.0;

    /// Throws DomainError on non-positive indices, theta outside [0, pi/2) or
    /// total internal reflection.
    void validate() const;
};

/// Power reflectances and transmittances for s and p polarization.
struct FresnelCoefficients {
    double rs = 0.0, rp = 0.0, ts = 1.0, tp = 1.0;
};

FresnelCoefficients fresnel(const InterfaceSpec& interface);

/// atan(n2 / n1).
double brewster_angle(double n1, double n2);

/// Polarized fraction of reflected light, |Rs - Rp| / (Rs + Rp).
double reflection_dolp(const FresnelCoefficients& f);
/// Polarized fraction of transmitted light, |Ts - Tp| / (Ts + Tp).
double transmission_dolp(const FresnelCoefficients& f);

struct SceneSpec {
    Image transmission;
    Image reflection;
    InterfaceSpec interface;
    double phi_perp = 0.0;      // reflection polarization orientation, radians in (-pi/2, pi/2]
    double dolp_t_extra = 0.0;  // lower bound on the transmission polarized fraction
    bool unpolarized_transmission = false;  // force the transmitted layer to DOLP 0

    void validate() const;
};

struct Synthesis {
    StokesMap mixed;
    PolarFrame frame;
    double alpha_t = 0.0;
    double alpha_r = 0.0;
    double dolp_reflection = 0.0;
    double dolp_transmission = 0.0;
    FresnelCoefficients coefficients;
    StokesMap reflection_stokes;
    StokesMap transmission_stokes;
    PolarFrame reflection_frame;
    PolarFrame transmission_frame;
};

/// Superposes the reflected and transmitted layers as incoherent Stokes
/// vectors. The reflected layer carries alpha_r = (Rs + Rp) / 2 of R, polarized
/// at phi_perp; the transmitted layer carries alpha_t = (Ts + Tp) / 2 of T,
/// polarized at phi_perp + pi/2. s0 of the mixture is alpha_t*T + alpha_r*R.
Synthesis synthesize(const SceneSpec& scene);

struct RenderedMosaic {
    RawMosaic mosaic;
    std::size_t clipped = 0;  // samples saturated to [0, 65535]
};

/// Point-samples each per-angle RGB frame at its native sensor site. The
/// mosaic is twice the frame size in each direction.
RenderedMosaic render_frame(const PolarFrame& frame, const MosaicLayout& layout, std::uint8_t layout_id);

/// render_frame(synthesize(scene).frame, ...).
RenderedMosaic render_mosaic(const SceneSpec& scene, const MosaicLayout& layout, std::uint8_t layout_id = 0);

/// Scene parameters from a key=value file (n1, n2, theta_deg, phi_perp_deg,
/// dolp_t_extra, unpolarized_transmission); theta_deg may be "brewster".
/// The two images are read with read_image. An absent reflection path gives a
/// zero reflection layer.
SceneSpec load_scene(const std::filesystem::path& params, const std::filesystem::path& transmission,
                     const std::optional<std::filesystem::path>& reflection);

}  // namespace polarkit
