#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace polarkit {

/// Row-major, channel-interleaved image of double samples in linear radiance.
/// Origin is the top-left pixel; y grows downwards.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);
    /// Takes ownership of `data`; throws UsageError if its size does not match
    /// the geometry.
    Image(int width, int height, int channels, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return std::size_t(width_) * std::size_t(height_); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) + std::size_t(c);
    }
    double& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_geometry(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    /// Single-channel copy of channel `c`.
    Image channel(int c) const;
    /// Interleaves equally sized single-channel planes.
    static Image merge(std::span<const Image> planes);

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Throws DomainError naming `what` if any sample is NaN or infinite.
void require_finite(const Image& img, std::string_view what);
/// Throws UsageError if the two images differ in width, height or channels.
void require_same_geometry(const Image& a, const Image& b, std::string_view what);

}  // namespace polarkit
