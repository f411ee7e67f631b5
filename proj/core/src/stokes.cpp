#include "polarkit/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polarkit/error.hpp"

namespace polarkit {

void PolarFrame::validate() const {
    if (i0.empty()) throw UsageError("polar frame is empty");
    require_same_geometry(i0, i45, "polar frame");
    require_same_geometry(i0, i90, "polar frame");
    require_same_geometry(i0, i135, "polar frame");
    for (const Image* img : {&i0, &i45, &i90, &i135}) {
        require_finite(*img, "polar frame");
        for (double v : img->data()) {
            if (v < 0.0) throw DomainError("polar frame: negative intensity");
        }
    }
}

void StokesMap::validate() const {
    if (s0.empty()) throw UsageError("stokes map is empty");
    require_same_geometry(s0, s1, "stokes map");
    require_same_geometry(s0, s2, "stokes map");
    require_finite(s0, "stokes map");
    require_finite(s1, "stokes map");
    require_finite(s2, "stokes map");
}

StokesMap compute_stokes(const PolarFrame& frame) {
    frame.validate();
    const Image& a = frame.i0;
    StokesMap s{Image(a.width(), a.height(), a.channels()), Image(a.width(), a.height(), a.channels()),
                Image(a.width(), a.height(), a.channels())};
    auto i0 = frame.i0.data();
    auto i45 = frame.i45.data();
    auto i90 = frame.i90.data();
    auto i135 = frame.i135.data();
    auto s0 = s.s0.data();
    auto s1 = s.s1.data();
    auto s2 = s.s2.data();
    for (std::size_t k = 0; k < s0.size(); ++k) {
        s0[k] = (i0[k] + i45[k] + i90[k] + i135[k]) / 2.0;
        s1[k] = i0[k] - i90[k];
        s2[k] = i45[k] - i135[k];
    }
    return s;
}

Image dolp(const StokesMap& s) {
    s.validate();
    Image out(s.s0.width(), s.s0.height(), s.s0.channels());
    auto s0 = s.s0.data();
    auto s1 = s.s1.data();
    auto s2 = s.s2.data();
    auto d = out.data();
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = s0[k] > kStokesEpsilon ? std::min(1.0, std::hypot(s1[k], s2[k]) / s0[k]) : 0.0;
    }
    return out;
}

AolpMap aolp(const StokesMap& s) {
    s.validate();
    AolpMap out{Image(s.s0.width(), s.s0.height(), s.s0.channels()), std::vector<std::uint8_t>(s.s0.size(), 0)};
    auto s1 = s.s1.data();
    auto s2 = s.s2.data();
    auto a = out.angle.data();
    constexpr double half_pi = std::numbers::pi / 2.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (s1[k] == 0.0 && s2[k] == 0.0) {
            a[k] = 0.0;
            out.degenerate[k] = 1;
            continue;
        }
        double v = 0.5 * std::atan2(s2[k], s1[k]);
        if (v <= -half_pi) v = half_pi;
        a[k] = v;
    }
    return out;
}

Image unpolarized(const PolarFrame& frame) { return compute_stokes(frame).s0; }

namespace {

Image project(const StokesMap& s, double c, double sn) {
    Image out(s.s0.width(), s.s0.height(), s.s0.channels());
    auto s0 = s.s0.data();
    auto s1 = s.s1.data();
    auto s2 = s.s2.data();
    auto d = out.data();
    for (std::size_t k = 0; k < d.size(); ++k) {
        // Negative results only come from rounding on fully polarized light.
        d[k] = std::max(0.0, 0.5 * (s0[k] + s1[k] * c + s2[k] * sn));
    }
    return out;
}

}  // namespace

Image intensity_at(const StokesMap& s, double phi) {
    s.validate();
    if (!std::isfinite(phi)) throw DomainError("intensity_at: non-finite angle");
    return project(s, std::cos(2.0 * phi), std::sin(2.0 * phi));
}

PolarFrame frame_from_stokes(const StokesMap& s) {
    s.validate();
    // Exact cos/sin at the canonical angles.
    return PolarFrame{project(s, 1.0, 0.0), project(s, 0.0, 1.0), project(s, -1.0, 0.0), project(s, 0.0, -1.0)};
}

}  // namespace polarkit
