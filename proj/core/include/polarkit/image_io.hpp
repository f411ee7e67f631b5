#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "polarkit/image.hpp"

namespace polarkit {

enum class ImageFormat { Pgm, Ppm, Pfm };

/// Reads binary PGM (P5), PPM (P6) or PFM (Pf/PF). Integer samples are divided
/// by maxval, PFM floats are taken verbatim. Malformed headers raise
/// FormatError, short payloads raise IoError.
Image read_image(const std::filesystem::path& path);

/// Writes `img` in the requested format. PGM/PPM use maxval 65535 with
/// big-endian samples rounded half up; samples outside [0, 1] are rejected
/// rather than clipped. PFM is written little-endian (scale -1.0), bottom row
/// first, as 32-bit floats.
void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format);

/// Guesses the format from the extension (.pgm, .ppm, .pfm).
ImageFormat format_from_extension(const std::filesystem::path& path);

/// One readout of a polarized colour filter array sensor.
struct RawMosaic {
    int width = 0;
    int height = 0;
    std::uint8_t bit_depth = 16;
    std::uint8_t layout_id = 0;
    std::vector<std::uint16_t> samples;

    RawMosaic() = default;
    RawMosaic(int width, int height, std::uint8_t layout_id, std::uint16_t fill = 0);

    std::uint16_t at(int x, int y) const noexcept { return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
    std::uint16_t& at(int x, int y) noexcept { return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

    /// Throws FormatError unless dimensions are positive multiples of 4, the
    /// sample count matches and the layout id is registered.
    void validate() const;

    bool operator==(const RawMosaic&) const = default;
};

/// Size of the fixed PRAW header in bytes.
inline constexpr std::size_t kRawHeaderSize = 20;

/// PRAW container: "PRAW" | version u8 = 1 | layout_id u8 | width u32 LE |
/// height u32 LE | bit_depth u8 = 16 | 5 zero bytes | u16 LE samples, row-major.
RawMosaic read_raw(const std::filesystem::path& path);
void write_raw(const RawMosaic& mosaic, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_raw(const RawMosaic& mosaic);
RawMosaic decode_raw(const std::vector<std::uint8_t>& bytes);

}  // namespace polarkit
