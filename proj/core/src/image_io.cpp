#include "polarkit/image_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "polarkit/error.hpp"
#include "polarkit/mosaic.hpp"

namespace polarkit {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void spill(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// Whitespace/comment-aware tokenizer over a Netpbm/PFM header.
class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

    std::string token() {
        skip_space_and_comments();
        std::string tok;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            tok.push_back(char(bytes_[pos_++]));
        }
        if (tok.empty()) throw FormatError(name_ + ": truncated header");
        return tok;
    }

    long integer() {
        const std::string tok = token();
        long v = 0;
        auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || end != tok.data() + tok.size()) {
            throw FormatError(name_ + ": expected integer in header, got '" + tok + "'");
        }
        return v;
    }

    double real() {
        const std::string tok = token();
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw FormatError(name_ + ": bad number '" + tok + "'");
            return v;
        } catch (const std::logic_error&) {
            throw FormatError(name_ + ": bad number '" + tok + "'");
        }
    }

    // The raster starts after exactly one whitespace byte.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError(name_ + ": missing separator before raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t get_u32_le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void check_dimensions(long w, long h, const std::string& name) {
    if (w <= 0 || h <= 0 || w > (1 << 24) || h > (1 << 24)) throw FormatError(name + ": invalid dimensions");
}

Image read_netpbm(const std::vector<std::uint8_t>& bytes, int channels, const std::string& name) {
    HeaderReader header(bytes, name);
    header.token();  // magic
    const long w = header.integer();
    const long h = header.integer();
    const long maxval = header.integer();
    check_dimensions(w, h, name);
    if (maxval <= 0 || maxval > 65535) throw FormatError(name + ": maxval out of range");
    const std::size_t start = header.raster_start();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t count = std::size_t(w) * std::size_t(h) * std::size_t(channels);
    if (bytes.size() - start < count * bytes_per_sample) throw IoError(name + ": truncated payload");

    std::vector<double> data(count);
    const double scale = double(maxval);
    const std::uint8_t* p = bytes.data() + start;
    for (std::size_t i = 0; i < count; ++i) {
        unsigned v = bytes_per_sample == 2 ? (unsigned(p[2 * i]) << 8 | p[2 * i + 1]) : p[i];
        if (long(v) > maxval) throw FormatError(name + ": sample exceeds maxval");
        data[i] = double(v) / scale;
    }
    return Image(int(w), int(h), channels, std::move(data));
}

Image read_pfm(const std::vector<std::uint8_t>& bytes, int channels, const std::string& name) {
    HeaderReader header(bytes, name);
    header.token();
    const long w = header.integer();
    const long h = header.integer();
    const double scale = header.real();
    check_dimensions(w, h, name);
    if (scale == 0.0 || !std::isfinite(scale)) throw FormatError(name + ": invalid PFM scale");
    const bool little = scale < 0.0;
    const std::size_t start = header.raster_start();
    const std::size_t row = std::size_t(w) * std::size_t(channels);
    const std::size_t count = row * std::size_t(h);
    if (bytes.size() - start < count * 4) throw IoError(name + ": truncated payload");

    std::vector<double> data(count);
    const std::uint8_t* p = bytes.data() + start;
    for (long y = 0; y < h; ++y) {
        // PFM stores the bottom row first.
        const std::size_t dst_row = std::size_t(h - 1 - y) * row;
        for (std::size_t i = 0; i < row; ++i) {
            const std::uint8_t* q = p + (std::size_t(y) * row + i) * 4;
            std::uint32_t bits = little ? get_u32_le(q)
                                        : (std::uint32_t(q[0]) << 24 | std::uint32_t(q[1]) << 16 |
                                           std::uint32_t(q[2]) << 8 | std::uint32_t(q[3]));
            const float f = std::bit_cast<float>(bits);
            if (!std::isfinite(f)) throw FormatError(name + ": non-finite PFM sample");
            data[dst_row + i] = double(f);
        }
    }
    return Image(int(w), int(h), channels, std::move(data));
}

std::vector<std::uint8_t> header_bytes(const std::string& text) {
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const std::string name = path.string();
    if (bytes.size() < 2) throw FormatError(name + ": file too short");
    const char m0 = char(bytes[0]);
    const char m1 = char(bytes[1]);
    if (m0 == 'P' && m1 == '5') return read_netpbm(bytes, 1, name);
    if (m0 == 'P' && m1 == '6') return read_netpbm(bytes, 3, name);
    if (m0 == 'P' && m1 == 'f') return read_pfm(bytes, 1, name);
    if (m0 == 'P' && m1 == 'F') return read_pfm(bytes, 3, name);
    throw FormatError(name + ": unsupported magic");
}

void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
    if (img.empty()) throw UsageError("write_image: empty image");
    require_finite(img, "write_image");
    std::vector<std::uint8_t> out;
    const std::string dims = std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";

    if (format == ImageFormat::Pgm || format == ImageFormat::Ppm) {
        const int want = format == ImageFormat::Pgm ? 1 : 3;
        if (img.channels() != want) {
            throw UsageError("write_image: " + std::string(want == 1 ? "pgm" : "ppm") + " needs " +
                             std::to_string(want) + " channel(s), image has " + std::to_string(img.channels()));
        }
        out = header_bytes(std::string(want == 1 ? "P5\n" : "P6\n") + dims + "65535\n");
        out.reserve(out.size() + img.size() * 2);
        for (double v : img.data()) {
            if (v < 0.0 || v > 1.0) throw UsageError("write_image: sample outside [0, 1] cannot be quantized");
            const auto q = std::uint16_t(std::floor(v * 65535.0 + 0.5));
            out.push_back(std::uint8_t(q >> 8));
            out.push_back(std::uint8_t(q & 0xff));
        }
    } else {
        out = header_bytes(std::string(img.channels() == 1 ? "Pf\n" : "PF\n") + dims + "-1.0\n");
        const std::size_t row = std::size_t(img.width()) * std::size_t(img.channels());
        const auto data = img.data();
        out.reserve(out.size() + img.size() * 4);
        for (int y = img.height() - 1; y >= 0; --y) {
            for (std::size_t i = 0; i < row; ++i) {
                const float f = float(data[std::size_t(y) * row + i]);
                if (!std::isfinite(f)) throw DomainError("write_image: sample overflows float32");
                put_u32_le(out, std::bit_cast<std::uint32_t>(f));
            }
        }
    }
    spill(path, out);
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& ch : ext) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    if (ext == ".pgm") return ImageFormat::Pgm;
    if (ext == ".ppm") return ImageFormat::Ppm;
    if (ext == ".pfm") return ImageFormat::Pfm;
    throw UsageError("unknown image extension '" + ext + "' (expected .pgm, .ppm or .pfm)");
}

RawMosaic::RawMosaic(int w, int h, std::uint8_t layout, std::uint16_t fill)
    : width(w), height(h), bit_depth(16), layout_id(layout) {
    if (w <= 0 || h <= 0 || w % 4 != 0 || h % 4 != 0) {
        throw UsageError("raw mosaic dimensions must be positive multiples of 4");
    }
    samples.assign(std::size_t(w) * std::size_t(h), fill);
}

void RawMosaic::validate() const {
    if (width <= 0 || height <= 0 || width % 4 != 0 || height % 4 != 0) {
        throw FormatError("raw mosaic dimensions must be positive multiples of 4, got " + std::to_string(width) +
                          "x" + std::to_string(height));
    }
    if (bit_depth != 16) throw FormatError("raw mosaic bit depth must be 16");
    if (samples.size() != std::size_t(width) * std::size_t(height)) {
        throw FormatError("raw mosaic sample count does not match dimensions");
    }
    if (!is_known_layout(layout_id)) throw FormatError("unknown layout id " + std::to_string(layout_id));
}

std::vector<std::uint8_t> encode_raw(const RawMosaic& mosaic) {
    mosaic.validate();
    std::vector<std::uint8_t> out{'P', 'R', 'A', 'W', 1, mosaic.layout_id};
    out.reserve(kRawHeaderSize + mosaic.samples.size() * 2);
    put_u32_le(out, std::uint32_t(mosaic.width));
    put_u32_le(out, std::uint32_t(mosaic.height));
    out.push_back(mosaic.bit_depth);
    out.insert(out.end(), 5, 0);
    for (std::uint16_t s : mosaic.samples) {
        out.push_back(std::uint8_t(s & 0xff));
        out.push_back(std::uint8_t(s >> 8));
    }
    return out;
}

RawMosaic decode_raw(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kRawHeaderSize) throw FormatError("raw: file shorter than header");
    if (std::memcmp(bytes.data(), "PRAW", 4) != 0) throw FormatError("raw: bad magic");
    if (bytes[4] != 1) throw FormatError("raw: unsupported version " + std::to_string(bytes[4]));
    RawMosaic m;
    m.layout_id = bytes[5];
    const std::uint32_t w = get_u32_le(bytes.data() + 6);
    const std::uint32_t h = get_u32_le(bytes.data() + 10);
    m.bit_depth = bytes[14];
    for (std::size_t i = 15; i < kRawHeaderSize; ++i) {
        if (bytes[i] != 0) throw FormatError("raw: reserved header bytes must be zero");
    }
    if (w == 0 || h == 0 || w > (1u << 24) || h > (1u << 24)) throw FormatError("raw: invalid dimensions");
    m.width = int(w);
    m.height = int(h);
    if (!is_known_layout(m.layout_id)) throw FormatError("raw: unknown layout id " + std::to_string(m.layout_id));
    const std::size_t count = std::size_t(w) * std::size_t(h);
    if (bytes.size() != kRawHeaderSize + count * 2) {
        throw FormatError("raw: payload size " + std::to_string(bytes.size() - kRawHeaderSize) +
                          " does not match " + std::to_string(w) + "x" + std::to_string(h));
    }
    m.samples.resize(count);
    const std::uint8_t* p = bytes.data() + kRawHeaderSize;
    for (std::size_t i = 0; i < count; ++i) m.samples[i] = std::uint16_t(p[2 * i] | p[2 * i + 1] << 8);
    m.validate();
    return m;
}

RawMosaic read_raw(const std::filesystem::path& path) {
    try {
        return decode_raw(slurp(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_raw(const RawMosaic& mosaic, const std::filesystem::path& path) { spill(path, encode_raw(mosaic)); }

}  // namespace polarkit
