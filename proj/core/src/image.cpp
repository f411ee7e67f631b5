#include "polarkit/image.hpp"

#include <cmath>
#include <string>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

void check_geometry(int width, int height, int channels) {
    if (width <= 0 || height <= 0) {
        throw UsageError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw UsageError("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
}

}  // namespace

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    check_geometry(width, height, channels);
    data_.assign(std::size_t(width) * std::size_t(height) * std::size_t(channels), fill);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_geometry(width, height, channels);
    if (data_.size() != std::size_t(width) * std::size_t(height) * std::size_t(channels)) {
        throw UsageError("image data length does not match " + std::to_string(width) + "x" +
                         std::to_string(height) + "x" + std::to_string(channels));
    }
}

Image Image::channel(int c) const {
    if (c < 0 || c >= channels_) throw UsageError("channel index out of range");
    Image out(width_, height_, 1);
    const std::size_t n = pixel_count();
    for (std::size_t i = 0; i < n; ++i) out.data_[i] = data_[i * std::size_t(channels_) + std::size_t(c)];
    return out;
}

Image Image::merge(std::span<const Image> planes) {
    if (planes.size() != 1 && planes.size() != 3) throw UsageError("merge expects 1 or 3 planes");
    for (const Image& p : planes) {
        if (p.channels() != 1 || p.width() != planes[0].width() || p.height() != planes[0].height()) {
            throw UsageError("merge expects equally sized single-channel planes");
        }
    }
    const int nc = int(planes.size());
    Image out(planes[0].width(), planes[0].height(), nc);
    const std::size_t n = out.pixel_count();
    for (int c = 0; c < nc; ++c) {
        auto src = planes[std::size_t(c)].data();
        for (std::size_t i = 0; i < n; ++i) out.data_[i * std::size_t(nc) + std::size_t(c)] = src[i];
    }
    return out;
}

void require_finite(const Image& img, std::string_view what) {
    for (double v : img.data()) {
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite sample");
    }
}

void require_same_geometry(const Image& a, const Image& b, std::string_view what) {
    if (!a.same_geometry(b)) {
        throw UsageError(std::string(what) + ": geometry mismatch (" + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + "x" + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                         std::to_string(b.channels()) + ")");
    }
}

}  // namespace polarkit
