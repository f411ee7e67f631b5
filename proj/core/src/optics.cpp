#include "polarkit/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "polarkit/error.hpp"
#include "polarkit/keyvalue.hpp"

namespace polarkit {

namespace {

constexpr double kPi = std::numbers::pi;

const Image& frame_at(const PolarFrame& f, int angle) {
    switch (angle) {
        case 0: return f.i0;
        case 45: return f.i45;
        case 90: return f.i90;
        default: return f.i135;
    }
}

// Stokes vector of a layer of radiance `scale * src` polarized with fraction
// `p` along the direction whose doubled angle has cosine c2 and sine s2.
StokesMap polarized_layer(const Image& src, double scale, double p, double c2, double s2) {
    StokesMap s{Image(src.width(), src.height(), src.channels()), Image(src.width(), src.height(), src.channels()),
                Image(src.width(), src.height(), src.channels())};
    auto in = src.data();
    auto o0 = s.s0.data();
    auto o1 = s.s1.data();
    auto o2 = s.s2.data();
    for (std::size_t k = 0; k < in.size(); ++k) {
        const double total = scale * in[k];
        o0[k] = total;
        o1[k] = p * total * c2;
        o2[k] = p * total * s2;
    }
    return s;
}

}  // namespace

void InterfaceSpec::validate() const {
    if (!(n1 > 0.0) || !(n2 > 0.0) || !std::isfinite(n1) || !std::isfinite(n2)) {
        throw DomainError("interface: refractive indices must be positive and finite");
    }
    if (!(theta >= 0.0 && theta < kPi / 2.0)) throw DomainError("interface: angle of incidence must lie in [0, pi/2)");
    if (std::sin(theta) * n1 / n2 > 1.0) throw DomainError("interface: total internal reflection");
}

FresnelCoefficients fresnel(const InterfaceSpec& interface) {
    interface.validate();
    const double n1 = interface.n1;
    const double n2 = interface.n2;
    const double cos_i = std::cos(interface.theta);
    const double sin_t = n1 * std::sin(interface.theta) / n2;
    const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
    const double rs_amp = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    const double rp_amp = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    FresnelCoefficients f;
    f.rs = rs_amp * rs_amp;
    f.rp = rp_amp * rp_amp;
    f.ts = 1.0 - f.rs;
    f.tp = 1.0 - f.rp;
    return f;
}

double brewster_angle(double n1, double n2) {
    if (!(n1 > 0.0) || !(n2 > 0.0) || !std::isfinite(n1) || !std::isfinite(n2)) {
        throw DomainError("brewster_angle: refractive indices must be positive");
    }
    return std::atan(n2 / n1);
}

double reflection_dolp(const FresnelCoefficients& f) {
    const double sum = f.rs + f.rp;
    return sum > 0.0 ? std::abs(f.rs - f.rp) / sum : 0.0;
}

double transmission_dolp(const FresnelCoefficients& f) {
    const double sum = f.ts + f.tp;
    return sum > 0.0 ? std::abs(f.ts - f.tp) / sum : 0.0;
}

void SceneSpec::validate() const {
    if (transmission.empty()) throw UsageError("scene: transmission image is empty");
    require_same_geometry(transmission, reflection, "scene");
    require_finite(transmission, "scene transmission");
    require_finite(reflection, "scene reflection");
    for (const Image* img : {&transmission, &reflection}) {
        for (double v : img->data()) {
            if (v < 0.0) throw DomainError("scene: negative radiance");
        }
    }
    interface.validate();
    if (!(phi_perp > -kPi / 2.0 && phi_perp <= kPi / 2.0)) throw DomainError("scene: phi_perp must lie in (-pi/2, pi/2]");
    if (!(dolp_t_extra >= 0.0 && dolp_t_extra <= 1.0)) throw DomainError("scene: dolp_t_extra must lie in [0, 1]");
}

Synthesis synthesize(const SceneSpec& scene) {
    scene.validate();
    Synthesis out;
    out.coefficients = fresnel(scene.interface);
    const FresnelCoefficients& f = out.coefficients;
    out.alpha_r = (f.rs + f.rp) / 2.0;
    out.alpha_t = (f.ts + f.tp) / 2.0;
    out.dolp_reflection = reflection_dolp(f);
    out.dolp_transmission =
        scene.unpolarized_transmission ? 0.0 : std::max(transmission_dolp(f), scene.dolp_t_extra);

    const double c2 = std::cos(2.0 * scene.phi_perp);
    const double s2 = std::sin(2.0 * scene.phi_perp);
    out.reflection_stokes = polarized_layer(scene.reflection, out.alpha_r, out.dolp_reflection, c2, s2);
    // The transmitted layer is polarized perpendicular to the reflected one.
    out.transmission_stokes = polarized_layer(scene.transmission, out.alpha_t, out.dolp_transmission, -c2, -s2);

    const Image& t0 = out.transmission_stokes.s0;
    out.mixed = StokesMap{Image(t0.width(), t0.height(), t0.channels()), Image(t0.width(), t0.height(), t0.channels()),
                          Image(t0.width(), t0.height(), t0.channels())};
    for (auto [dst, a, b] : {std::tuple{&out.mixed.s0, &out.transmission_stokes.s0, &out.reflection_stokes.s0},
                             std::tuple{&out.mixed.s1, &out.transmission_stokes.s1, &out.reflection_stokes.s1},
                             std::tuple{&out.mixed.s2, &out.transmission_stokes.s2, &out.reflection_stokes.s2}}) {
        auto d = dst->data();
        auto x = a->data();
        auto y = b->data();
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = x[k] + y[k];
    }
    out.frame = frame_from_stokes(out.mixed);
    out.reflection_frame = frame_from_stokes(out.reflection_stokes);
    out.transmission_frame = frame_from_stokes(out.transmission_stokes);
    return out;
}

RenderedMosaic render_frame(const PolarFrame& frame, const MosaicLayout& layout, std::uint8_t layout_id) {
    frame.validate();
    layout.validate();
    const Image& ref = frame.i0;
    if (ref.width() % 2 != 0 || ref.height() % 2 != 0) {
        throw UsageError("render: frame dimensions must be even (mosaic is twice the frame size)");
    }
    RenderedMosaic out{RawMosaic(2 * ref.width(), 2 * ref.height(), layout_id), 0};
    for (int y = 0; y < out.mosaic.height; ++y) {
        for (int x = 0; x < out.mosaic.width; ++x) {
            const int angle = layout.angle_pattern[std::size_t(y & 1)][std::size_t(x & 1)];
            const int i = y / 2;
            const int j = x / 2;
            const int channel = ref.channels() == 3 ? int(bayer_color(layout.bayer_pattern, j, i)) : 0;
            const double scaled = std::floor(frame_at(frame, angle).at(j, i, channel) * 65535.0 + 0.5);
            if (scaled < 0.0 || scaled > 65535.0) ++out.clipped;
            out.mosaic.at(x, y) = std::uint16_t(std::clamp(scaled, 0.0, 65535.0));
        }
    }
    return out;
}

RenderedMosaic render_mosaic(const SceneSpec& scene, const MosaicLayout& layout, std::uint8_t layout_id) {
    return render_frame(synthesize(scene).frame, layout, layout_id);
}

SceneSpec load_scene(const std::filesystem::path& params, const std::filesystem::path& transmission,
                     const std::optional<std::filesystem::path>& reflection) {
    const KeyValues kv = read_key_values(params);
    SceneSpec scene;
    std::string theta = "0";
    for (const auto& [key, value] : kv) {
        if (key == "n1") scene.interface.n1 = parse_real(value, key);
        else if (key == "n2") scene.interface.n2 = parse_real(value, key);
        else if (key == "theta_deg") theta = value;
        else if (key == "phi_perp_deg") scene.phi_perp = parse_real(value, key) * kPi / 180.0;
        else if (key == "dolp_t_extra") scene.dolp_t_extra = parse_real(value, key);
        else if (key == "unpolarized_transmission") scene.unpolarized_transmission = parse_bool(value, key);
        else throw FormatError(params.string() + ": unknown scene key '" + key + "'");
    }
    scene.interface.theta = theta == "brewster" ? brewster_angle(scene.interface.n1, scene.interface.n2)
                                                : parse_real(theta, "theta_deg") * kPi / 180.0;
    scene.transmission = read_image(transmission);
    scene.reflection = reflection ? read_image(*reflection)
                                  : Image(scene.transmission.width(), scene.transmission.height(),
                                          scene.transmission.channels());
    scene.validate();
    return scene;
}

}  // namespace polarkit
