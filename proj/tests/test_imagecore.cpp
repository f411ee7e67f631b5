#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "polarkit/error.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/keyvalue.hpp"
#include "support/test_support.hpp"

namespace polarkit {
namespace {

using testing::TempDir;
using testing::file_bytes;
using testing::random_image;

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

std::vector<std::uint8_t> with_header(const std::string& header, std::size_t payload, std::uint8_t fill) {
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), payload, fill);
    return bytes;
}

TEST(Image, RejectsBadGeometry) {
    EXPECT_THROW(Image(0, 4, 1), UsageError);
    EXPECT_THROW(Image(4, 4, 2), UsageError);
    EXPECT_THROW(Image(2, 2, 1, std::vector<double>(3)), UsageError);
}

TEST(Image, InterleavedRowMajorIndexing) {
    Image img(3, 2, 3);
    img.at(2, 1, 1) = 7.0;
    EXPECT_EQ(img.data()[(1 * 3 + 2) * 3 + 1], 7.0);
    EXPECT_EQ(img.channel(1).at(2, 1), 7.0);
}

TEST(Image, ChannelMergeRoundTrip) {
    const Image img = random_image(5, 4, 3, 11);
    const std::vector<Image> planes{img.channel(0), img.channel(1), img.channel(2)};
    EXPECT_EQ(Image::merge(planes), img);
}

TEST(Image, RequireFiniteRejectsNanAndInf) {
    Image img(2, 2, 1, 0.5);
    EXPECT_NO_THROW(require_finite(img, "t"));
    img.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(require_finite(img, "t"), DomainError);
    img.at(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(require_finite(img, "t"), DomainError);
}

TEST(ReadImage, FullScaleWhitePgm) {
    TempDir dir;
    write_bytes(dir / "w.pgm", with_header("P5\n2 2\n65535\n", 8, 0xff));
    const Image img = read_image(dir / "w.pgm");
    ASSERT_EQ(img.channels(), 1);
    for (double v : img.data()) EXPECT_EQ(v, 1.0);
}

TEST(ReadImage, PfmFloatPassthrough) {
    TempDir dir;
    std::vector<std::uint8_t> bytes{'P', 'f', '\n', '1', ' ', '1', '\n', '-', '1', '.', '0', '\n'};
    const float quarter = 0.25f;
    std::uint8_t raw[4];
    std::memcpy(raw, &quarter, 4);  // host is little-endian
    bytes.insert(bytes.end(), raw, raw + 4);
    write_bytes(dir / "q.pfm", bytes);
    const Image img = read_image(dir / "q.pfm");
    EXPECT_EQ(img.channels(), 1);
    EXPECT_EQ(img.at(0, 0), 0.25);
}

TEST(ReadImage, BigEndianPfm) {
    TempDir dir;
    std::vector<std::uint8_t> bytes{'P', 'f', '\n', '1', ' ', '1', '\n', '1', '.', '0', '\n'};
    // 0.25f = 0x3e800000
    bytes.insert(bytes.end(), {0x3e, 0x80, 0x00, 0x00});
    write_bytes(dir / "q.pfm", bytes);
    EXPECT_EQ(read_image(dir / "q.pfm").at(0, 0), 0.25);
}

TEST(ReadImage, PpmRoundTripWithinOneStep) {
    TempDir dir;
    const Image img = random_image(7, 5, 3, 3);
    write_image(img, dir / "a.ppm", ImageFormat::Ppm);
    const Image back = read_image(dir / "a.ppm");
    ASSERT_TRUE(back.same_geometry(img));
    EXPECT_LE(testing::max_abs_diff(img, back), 0.5 / 65535.0 + 1e-15);
}

TEST(ReadImage, PfmRoundTripExact) {
    TempDir dir;
    Image img = random_image(6, 3, 3, 4);
    for (double& v : img.data()) v = double(float(v));  // float32-representable
    write_image(img, dir / "a.pfm", ImageFormat::Pfm);
    EXPECT_EQ(read_image(dir / "a.pfm"), img);
    Image mono = random_image(4, 9, 1, 5, -2.0, 3.0);
    for (double& v : mono.data()) v = double(float(v));
    write_image(mono, dir / "b.pfm", ImageFormat::Pfm);
    EXPECT_EQ(read_image(dir / "b.pfm"), mono);
}

TEST(ReadImage, PfmRowsAreBottomUp) {
    TempDir dir;
    Image img(1, 2, 1);
    img.at(0, 0) = 1.0;  // top
    img.at(0, 1) = 2.0;
    write_image(img, dir / "r.pfm", ImageFormat::Pfm);
    const auto bytes = file_bytes(dir / "r.pfm");
    float first = 0.0f;
    std::memcpy(&first, bytes.data() + bytes.size() - 8, 4);
    EXPECT_EQ(first, 2.0f);
}

TEST(ReadImage, MalformedHeaderIsFormatError) {
    TempDir dir;
    write_bytes(dir / "x.pgm", with_header("P5\nfoo 2\n65535\n", 8, 0));
    EXPECT_THROW(read_image(dir / "x.pgm"), FormatError);
    write_bytes(dir / "y.pgm", with_header("P9\n2 2\n65535\n", 8, 0));
    EXPECT_THROW(read_image(dir / "y.pgm"), FormatError);
}

TEST(ReadImage, TruncatedPayloadIsIoError) {
    TempDir dir;
    write_bytes(dir / "t.pgm", with_header("P5\n2 2\n65535\n", 7, 0));
    EXPECT_THROW(read_image(dir / "t.pgm"), IoError);
    write_bytes(dir / "t.pfm", with_header("PF\n2 2\n-1.0\n", 47, 0));
    EXPECT_THROW(read_image(dir / "t.pfm"), IoError);
}

TEST(ReadImage, MissingFileIsIoError) {
    TempDir dir;
    EXPECT_THROW(read_image(dir / "missing.pfm"), IoError);
}

TEST(WriteImage, HalfGrayRoundsHalfUp) {
    TempDir dir;
    write_image(Image(4, 4, 1, 0.5), dir / "g.pgm", ImageFormat::Pgm);
    const auto bytes = file_bytes(dir / "g.pgm");
    const std::string header = "P5\n4 4\n65535\n";
    ASSERT_EQ(bytes.size(), header.size() + 32);
    for (std::size_t k = header.size(); k < bytes.size(); k += 2) {
        EXPECT_EQ(std::uint8_t(bytes[k]), 0x80);
        EXPECT_EQ(std::uint8_t(bytes[k + 1]), 0x00);
    }
}

TEST(WriteImage, NegativeSampleIsUsageError) {
    TempDir dir;
    Image img(2, 2, 1, 0.5);
    img.at(0, 0) = -0.1;
    EXPECT_THROW(write_image(img, dir / "n.pgm", ImageFormat::Pgm), UsageError);
}

TEST(WriteImage, ChannelMismatchIsUsageError) {
    TempDir dir;
    EXPECT_THROW(write_image(Image(2, 2, 3), dir / "a.pgm", ImageFormat::Pgm), UsageError);
    EXPECT_THROW(write_image(Image(2, 2, 1), dir / "a.ppm", ImageFormat::Ppm), UsageError);
}

TEST(WriteImage, PfmScaleLine) {
    TempDir dir;
    write_image(Image(1, 1, 3, 0.5), dir / "c.pfm", ImageFormat::Pfm);
    const auto bytes = file_bytes(dir / "c.pfm");
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 12), "PF\n1 1\n-1.0\n");
}

TEST(WriteImage, NonFiniteRejected) {
    TempDir dir;
    Image img(2, 2, 1, 0.5);
    img.at(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(write_image(img, dir / "n.pfm", ImageFormat::Pfm), DomainError);
    EXPECT_THROW(write_image(img, dir / "n.pgm", ImageFormat::Pgm), DomainError);
}

TEST(WriteImage, UnwritablePathIsIoError) {
    TempDir dir;
    EXPECT_THROW(write_image(Image(1, 1, 1), dir / "no" / "such" / "x.pfm", ImageFormat::Pfm), IoError);
}

TEST(FormatFromExtension, KnownAndUnknown) {
    EXPECT_EQ(format_from_extension("a.PGM"), ImageFormat::Pgm);
    EXPECT_EQ(format_from_extension("a.ppm"), ImageFormat::Ppm);
    EXPECT_EQ(format_from_extension("a.pfm"), ImageFormat::Pfm);
    EXPECT_THROW(format_from_extension("a.png"), UsageError);
}

RawMosaic random_mosaic(int w, int h, std::uint8_t layout, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RawMosaic m(w, h, layout);
    for (auto& s : m.samples) s = std::uint16_t(rng() & 0xffff);
    return m;
}

TEST(RawMosaic, ZeroMosaicPayloadSize) {
    const auto bytes = encode_raw(RawMosaic(4, 4, 0));
    ASSERT_EQ(bytes.size(), kRawHeaderSize + 32);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PRAW");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[14], 16);
}

TEST(RawMosaic, HeaderLayoutIsLittleEndian) {
    RawMosaic m(8, 4, 2);
    m.at(1, 0) = 0x1234;
    const auto bytes = encode_raw(m);
    EXPECT_EQ(bytes[5], 2);
    EXPECT_EQ(bytes[6], 8);
    EXPECT_EQ(bytes[7], 0);
    EXPECT_EQ(bytes[10], 4);
    for (std::size_t k = 15; k < 20; ++k) EXPECT_EQ(bytes[k], 0);
    EXPECT_EQ(bytes[kRawHeaderSize + 2], 0x34);
    EXPECT_EQ(bytes[kRawHeaderSize + 3], 0x12);
}

TEST(RawMosaic, FileRoundTripIsByteIdentical) {
    TempDir dir;
    const RawMosaic m = random_mosaic(16, 12, 1, 9);
    write_raw(m, dir / "a.praw");
    const RawMosaic back = read_raw(dir / "a.praw");
    EXPECT_EQ(back, m);
    write_raw(back, dir / "b.praw");
    EXPECT_EQ(file_bytes(dir / "a.praw"), file_bytes(dir / "b.praw"));
}

TEST(RawMosaic, UnknownLayoutRejected) {
    auto bytes = encode_raw(RawMosaic(4, 4, 0));
    bytes[5] = 255;
    EXPECT_THROW(decode_raw(bytes), FormatError);
}

TEST(RawMosaic, BadMagicAndSizeMismatchRejected) {
    auto bytes = encode_raw(RawMosaic(4, 4, 0));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_raw(bad), FormatError);
    bytes.pop_back();
    EXPECT_THROW(decode_raw(bytes), FormatError);
    EXPECT_THROW(decode_raw({'P', 'R'}), FormatError);
}

TEST(RawMosaic, DimensionsMustBeMultiplesOfFour) {
    EXPECT_THROW(RawMosaic(6, 4, 0), UsageError);
    auto bytes = encode_raw(RawMosaic(8, 4, 0));
    bytes[6] = 6;  // width 6 with the payload of width 8
    EXPECT_THROW(decode_raw(bytes), FormatError);
}

TEST(KeyValues, ParsesCommentsAndWhitespace) {
    const KeyValues kv = parse_key_values("# header\n a = 1 \n\nb=two # trailing\n", "test");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two");
    EXPECT_EQ(kv.size(), 2u);
}

TEST(KeyValues, RejectsDuplicatesAndMissingEquals) {
    EXPECT_THROW(parse_key_values("a=1\na=2\n", "t"), FormatError);
    EXPECT_THROW(parse_key_values("novalue\n", "t"), FormatError);
}

TEST(KeyValues, TypedParsers) {
    EXPECT_EQ(parse_real("1.5e-3", "k"), 1.5e-3);
    EXPECT_THROW(parse_real("abc", "k"), FormatError);
    EXPECT_THROW(parse_real("nan", "k"), FormatError);
    EXPECT_EQ(parse_integer("-12", "k"), -12);
    EXPECT_THROW(parse_integer("1.5", "k"), FormatError);
    EXPECT_TRUE(parse_bool("true", "k"));
    EXPECT_FALSE(parse_bool("false", "k"));
    EXPECT_THROW(parse_bool("yes please", "k"), FormatError);
}

}  // namespace
}  // namespace polarkit
