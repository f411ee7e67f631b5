#include "polarkit/align.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "polarkit/error.hpp"
#include "polarkit/fft.hpp"

namespace polarkit {

namespace {

int reflect101(long i, int n) {
    if (n == 1) return 0;
    const long period = 2L * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return int(i >= n ? period - i : i);
}

double sample_bilinear(const Image& img, double u, double v, int c) {
    // Keep the floor inside long range; reflection makes the exact value
    // irrelevant that far out.
    u = std::clamp(u, -1e9, 1e9);
    v = std::clamp(v, -1e9, 1e9);
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const double ax = u - fu;
    const double ay = v - fv;
    const int x0 = reflect101(long(fu), img.width());
    const int x1 = reflect101(long(fu) + 1, img.width());
    const int y0 = reflect101(long(fv), img.height());
    const int y1 = reflect101(long(fv) + 1, img.height());
    const double top = (1.0 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c);
    const double bottom = (1.0 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c);
    return (1.0 - ay) * top + ay * bottom;
}

Image crop(const Image& img, int x0, int y0, int w, int h) {
    Image out(w, h, img.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
        }
    }
    return out;
}

int largest_power_of_two_at_most(int n) {
    int p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

std::array<int, 2> plane_offset(int plane) { return {plane % 4, plane / 4}; }

}  // namespace

AffineTransform AffineTransform::inverse() const {
    const double det = determinant();
    if (!(std::abs(det) > 1e-6)) throw DomainError("affine transform is singular");
    const double a = m[0], b = m[1], c = m[2], d = m[3], e = m[4], f = m[5];
    const double ia = e / det, ib = -b / det, id = -d / det, ie = a / det;
    return {{ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)}};
}

Correspondences read_correspondences(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Correspondences out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        Correspondence c;
        if (!(fields >> c.sx)) continue;
        std::string extra;
        if (!(fields >> c.sy >> c.tx >> c.ty) || (fields >> extra)) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'sx sy tx ty'");
        }
        for (double v : {c.sx, c.sy, c.tx, c.ty}) {
            if (!std::isfinite(v)) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
        }
        out.push_back(c);
    }
    return out;
}

PixelShift phase_correlate(const Image& a, const Image& b) {
    if (a.channels() != 1 || b.channels() != 1) throw UsageError("phase_correlate: expects single-channel images");
    require_same_geometry(a, b, "phase_correlate");
    const int w = a.width();
    const int h = a.height();
    if (!is_power_of_two(w) || !is_power_of_two(h) || w < 8 || h < 8) {
        throw UsageError("phase_correlate: sides must be powers of two of at least 8");
    }
    require_finite(a, "phase_correlate");
    require_finite(b, "phase_correlate");

    const auto fa = fft2d_channel(a, 0, w, h);
    const auto fb = fft2d_channel(b, 0, w, h);
    std::vector<Complex> cross(fa.size());
    double peak_mag = 0.0;
    for (std::size_t k = 0; k < cross.size(); ++k) {
        cross[k] = fb[k] * std::conj(fa[k]);
        peak_mag = std::max(peak_mag, std::abs(cross[k]));
    }
    for (Complex& v : cross) {
        const double mag = std::abs(v);
        v = mag > 1e-12 * peak_mag ? v / mag : Complex{};
    }
    const auto surface = fft2d(cross, w, h, FftDirection::Inverse);

    double best = -std::numeric_limits<double>::infinity();
    for (const Complex& v : surface) best = std::max(best, v.real());
    const double tie = 1e-12 * std::max(1.0, std::abs(best));

    PixelShift chosen;
    bool have = false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (surface[std::size_t(y) * std::size_t(w) + std::size_t(x)].real() < best - tie) continue;
            const PixelShift s{x >= w / 2 ? x - w : x, y >= h / 2 ? y - h : y};
            const auto norm2 = [](const PixelShift& p) { return long(p.dx) * p.dx + long(p.dy) * p.dy; };
            if (!have || norm2(s) < norm2(chosen) ||
                (norm2(s) == norm2(chosen) && std::pair(s.dx, s.dy) < std::pair(chosen.dx, chosen.dy))) {
                chosen = s;
                have = true;
            }
        }
    }
    return chosen;
}

AffineTransform estimate_affine(std::span<const Correspondence> pairs) {
    if (pairs.size() < 3) throw UsageError("estimate_affine: need at least 3 correspondences");
    double cx = 0.0, cy = 0.0;
    for (const Correspondence& c : pairs) {
        for (double v : {c.sx, c.sy, c.tx, c.ty}) {
            if (!std::isfinite(v)) throw DomainError("estimate_affine: non-finite correspondence");
        }
        cx += c.sx;
        cy += c.sy;
    }
    cx /= double(pairs.size());
    cy /= double(pairs.size());
    double spread = 0.0;
    for (const Correspondence& c : pairs) spread = std::max({spread, std::abs(c.sx - cx), std::abs(c.sy - cy)});
    if (spread == 0.0) throw DomainError("estimate_affine: degenerate correspondences (all sources coincide)");

    // Fit on centred, scaled source points for conditioning.
    const Eigen::Index n = Eigen::Index(pairs.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd targets(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Correspondence& c = pairs[std::size_t(i)];
        design(i, 0) = (c.sx - cx) / spread;
        design(i, 1) = (c.sy - cy) / spread;
        design(i, 2) = 1.0;
        targets(i, 0) = c.tx;
        targets(i, 1) = c.ty;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw DomainError("estimate_affine: correspondences are collinear");
    const Eigen::MatrixXd sol = qr.solve(targets);  // 3x2

    AffineTransform t;
    for (int r = 0; r < 2; ++r) {
        const double a = sol(0, r) / spread;
        const double b = sol(1, r) / spread;
        t.m[std::size_t(3 * r)] = a;
        t.m[std::size_t(3 * r + 1)] = b;
        t.m[std::size_t(3 * r + 2)] = sol(2, r) - a * cx - b * cy;
    }
    return t;
}

Image warp(const Image& img, const AffineTransform& t) {
    std::vector<AffineTransform> per_channel(std::size_t(img.channels()), t);
    return warp_channels(img, per_channel);
}

Image warp_channels(const Image& img, std::span<const AffineTransform> per_channel) {
    if (img.empty()) throw UsageError("warp: empty image");
    if (per_channel.size() != std::size_t(img.channels())) throw UsageError("warp: need one transform per channel");
    require_finite(img, "warp");
    for (const AffineTransform& t : per_channel) {
        for (double v : t.m) {
            if (!std::isfinite(v)) throw DomainError("warp: non-finite transform");
        }
        if (!(std::abs(t.determinant()) > 1e-6)) throw DomainError("warp: singular transform");
    }
    Image out(img.width(), img.height(), img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        const AffineTransform& t = per_channel[std::size_t(c)];
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const auto [u, v] = t.apply(x, y);
                out.at(x, y, c) = sample_bilinear(img, u, v, c);
            }
        }
    }
    return out;
}

RawPlanes split_raw_planes(const RawMosaic& mosaic) {
    mosaic.validate();
    const int w = mosaic.width / 4;
    const int h = mosaic.height / 4;
    RawPlanes planes;
    for (int p = 0; p < kRawPlanes; ++p) {
        const auto [ox, oy] = plane_offset(p);
        Image img(w, h, 1);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) img.at(x, y) = double(mosaic.at(4 * x + ox, 4 * y + oy)) / 65535.0;
        }
        planes[std::size_t(p)] = std::move(img);
    }
    return planes;
}

RawMosaic merge_raw_planes(const RawPlanes& planes, std::uint8_t layout_id) {
    const int w = planes[0].width();
    const int h = planes[0].height();
    for (const Image& p : planes) {
        if (p.channels() != 1 || p.width() != w || p.height() != h) throw UsageError("merge_raw_planes: plane geometry");
        require_finite(p, "merge_raw_planes");
    }
    RawMosaic mosaic(4 * w, 4 * h, layout_id);
    for (int p = 0; p < kRawPlanes; ++p) {
        const auto [ox, oy] = plane_offset(p);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double q = std::floor(planes[std::size_t(p)].at(x, y) * 65535.0 + 0.5);
                mosaic.at(4 * x + ox, 4 * y + oy) = std::uint16_t(std::clamp(q, 0.0, 65535.0));
            }
        }
    }
    return mosaic;
}

AffineTransform plane_transform(const AffineTransform& t, int plane) {
    const auto [ox, oy] = plane_offset(plane);
    const auto [sx, sy] = t.apply(ox, oy);
    return {{t.m[0], t.m[1], (sx - ox) / 4.0, t.m[3], t.m[4], (sy - oy) / 4.0}};
}

RawTransforms plane_transforms(const AffineTransform& t) {
    RawTransforms out;
    for (int p = 0; p < kRawPlanes; ++p) out[std::size_t(p)] = plane_transform(t, p);
    return out;
}

AffineTransform mosaic_transform(const AffineTransform& pt, int plane) {
    const auto [ox, oy] = plane_offset(plane);
    return {{pt.m[0], pt.m[1], 4.0 * pt.m[2] - (pt.m[0] * ox + pt.m[1] * oy) + ox, pt.m[3], pt.m[4],
             4.0 * pt.m[5] - (pt.m[3] * ox + pt.m[4] * oy) + oy}};
}

RawMosaic warp_raw(const RawMosaic& mosaic, const RawTransforms& transforms) {
    RawPlanes planes = split_raw_planes(mosaic);
    for (int p = 0; p < kRawPlanes; ++p) {
        planes[std::size_t(p)] = warp(planes[std::size_t(p)], transforms[std::size_t(p)]);
    }
    return merge_raw_planes(planes, mosaic.layout_id);
}

RawTransforms estimate_raw_translation(const RawMosaic& reference, const RawMosaic& moving) {
    if (reference.width != moving.width || reference.height != moving.height) {
        throw UsageError("raw alignment: mosaics differ in size");
    }
    const RawPlanes ref = split_raw_planes(reference);
    const RawPlanes mov = split_raw_planes(moving);
    const int w = ref[0].width();
    const int h = ref[0].height();
    const int cw = largest_power_of_two_at_most(w);
    const int ch = largest_power_of_two_at_most(h);
    if (cw < 8 || ch < 8) throw UsageError("raw alignment: mosaic too small for phase correlation (need >= 32x32)");
    const int x0 = (w - cw) / 2;
    const int y0 = (h - ch) / 2;

    RawTransforms out;
    for (int p = 0; p < kRawPlanes; ++p) {
        const PixelShift s = phase_correlate(crop(ref[std::size_t(p)], x0, y0, cw, ch),
                                             crop(mov[std::size_t(p)], x0, y0, cw, ch));
        out[std::size_t(p)] = AffineTransform::translation(s.dx, s.dy);
    }
    return out;
}

}  // namespace polarkit
