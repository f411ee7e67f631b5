#include "polarkit/mosaic.hpp"

#include <algorithm>
#include <string>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

constexpr BayerColor R = BayerColor::Red;
constexpr BayerColor G = BayerColor::Green;
constexpr BayerColor B = BayerColor::Blue;

constexpr BayerPattern kRggb{{{R, G}, {G, B}}};
constexpr BayerPattern kBggr{{{B, G}, {G, R}}};

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace

void MosaicLayout::validate() const {
    std::array<int, 4> seen{};
    for (const auto& row : angle_pattern) {
        for (int a : row) {
            auto it = std::find(kPolarizerAngles.begin(), kPolarizerAngles.end(), a);
            if (it == kPolarizerAngles.end()) throw UsageError("layout: invalid polarizer angle " + std::to_string(a));
            ++seen[std::size_t(it - kPolarizerAngles.begin())];
        }
    }
    if (seen != std::array<int, 4>{1, 1, 1, 1}) throw UsageError("layout: angles must be a permutation of 0/45/90/135");
    std::array<int, 3> colors{};
    for (const auto& row : bayer_pattern) {
        for (BayerColor c : row) ++colors[std::size_t(c)];
    }
    if (colors != std::array<int, 3>{1, 2, 1}) throw UsageError("layout: bayer tile needs one R, two G, one B");
}

std::array<int, 2> MosaicLayout::site_of(int angle_deg) const {
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (angle_pattern[std::size_t(r)][std::size_t(c)] == angle_deg) return {r, c};
        }
    }
    throw UsageError("layout: angle " + std::to_string(angle_deg) + " not present");
}

bool is_known_layout(std::uint8_t id) { return id <= 3; }

MosaicLayout layout_from_id(std::uint8_t id) {
    MosaicLayout layout;
    switch (id) {
        case 0: break;
        case 1: layout.bayer_pattern = kBggr; break;
        case 2: layout.angle_pattern = {{{0, 45}, {135, 90}}}; break;
        case 3:
            layout.angle_pattern = {{{0, 45}, {135, 90}}};
            layout.bayer_pattern = kBggr;
            break;
        default: throw FormatError("unknown layout id " + std::to_string(id));
    }
    return layout;
}

AngleImages split_angles(const RawMosaic& mosaic, const MosaicLayout& layout) {
    if (mosaic.width <= 0 || mosaic.height <= 0 || mosaic.width % 4 != 0 || mosaic.height % 4 != 0) {
        throw UsageError("split_angles: mosaic dimensions must be multiples of 4");
    }
    if (mosaic.samples.size() != std::size_t(mosaic.width) * std::size_t(mosaic.height)) {
        throw UsageError("split_angles: sample count does not match dimensions");
    }
    layout.validate();
    const int w = mosaic.width / 2;
    const int h = mosaic.height / 2;
    AngleImages out;
    for (std::size_t k = 0; k < kPolarizerAngles.size(); ++k) {
        const auto [r, c] = layout.site_of(kPolarizerAngles[k]);
        Image img(w, h, 1);
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) img.at(j, i) = double(mosaic.at(2 * j + c, 2 * i + r)) / 65535.0;
        }
        out[k] = std::move(img);
    }
    return out;
}

Image demosaic_bilinear(const Image& bayer, const BayerPattern& pattern) {
    if (bayer.channels() != 1) throw UsageError("demosaic_bilinear: expects a single-channel Bayer image");
    if (bayer.width() < 2 || bayer.height() < 2) throw UsageError("demosaic_bilinear: image must be at least 2x2");
    require_finite(bayer, "demosaic_bilinear");
    const int w = bayer.width();
    const int h = bayer.height();
    Image rgb(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const BayerColor native = bayer_color(pattern, x, y);
            std::array<double, 3> sum{};
            std::array<int, 3> count{};
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    // Reflect-101 keeps coordinate parity, so the colour at the
                    // virtual position equals the colour at the mirrored one.
                    const BayerColor col = bayer_color(pattern, x + dx, y + dy);
                    sum[std::size_t(col)] += bayer.at(reflect101(x + dx, w), reflect101(y + dy, h));
                    ++count[std::size_t(col)];
                }
            }
            for (int c = 0; c < 3; ++c) {
                rgb.at(x, y, c) = BayerColor(c) == native ? bayer.at(x, y) : sum[std::size_t(c)] / count[std::size_t(c)];
            }
        }
    }
    return rgb;
}

PolarFrame decode_frame(const RawMosaic& mosaic, const MosaicLayout& layout) {
    const AngleImages quarters = split_angles(mosaic, layout);
    return PolarFrame{demosaic_bilinear(quarters[0], layout.bayer_pattern),
                      demosaic_bilinear(quarters[1], layout.bayer_pattern),
                      demosaic_bilinear(quarters[2], layout.bayer_pattern),
                      demosaic_bilinear(quarters[3], layout.bayer_pattern)};
}

}  // namespace polarkit
