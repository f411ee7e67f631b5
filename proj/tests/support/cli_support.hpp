#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/keyvalue.hpp"
#include "support/test_support.hpp"

namespace polarkit::testing {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

inline KeyValues read_report(const std::filesystem::path& p) { return read_key_values(p); }

// Writes a textured transmission/reflection pair and returns their paths.
inline std::pair<std::string, std::string> write_scene_pair(const TempDir& dir, int size, int channels,
                                                           std::uint64_t seed) {
    std::vector<Image> t_planes, r_planes;
    for (int c = 0; c < channels; ++c) {
        t_planes.push_back(texture(size, size, 3.0, seed + std::uint64_t(c), 0.1, 0.9));
        r_planes.push_back(texture(size, size, 6.0, seed + 100 + std::uint64_t(c), 0.1, 0.9));
    }
    const std::string t = (dir / "t.pfm").string();
    const std::string r = (dir / "r.pfm").string();
    write_image(Image::merge(t_planes), t, ImageFormat::Pfm);
    write_image(Image::merge(r_planes), r, ImageFormat::Pfm);
    return {t, r};
}

}  // namespace polarkit::testing
