#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "polarkit/diffusion.hpp"
#include "polarkit/keyvalue.hpp"
#include "polarkit/metrics.hpp"
#include "polarkit/optics.hpp"
#include "polarkit/separate.hpp"

namespace polarkit::cli {

struct ConfigKey {
    std::string_view name;
    std::string_view default_value;
    std::string_view help;
};

/// Every key the configuration accepts, with its default.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value configuration. Unknown keys are rejected; unset keys fall
/// back to their documented default.
class PipelineConfig {
public:
    PipelineConfig();

    /// Merges a key=value file on top of the current values.
    void load(const std::filesystem::path& path);
    void set(std::string_view key, std::string value);

    const std::string& text(std::string_view key) const;
    double real(std::string_view key) const;
    long integer(std::string_view key) const;
    bool boolean(std::string_view key) const;

    std::uint8_t layout_id() const;
    /// n1, n2 and theta_deg ("brewster" or degrees).
    InterfaceSpec interface() const;
    double phi_perp() const;
    EdgeSearchOptions edge_search() const;
    DiffusionSchedule schedule() const;
    LossWeights weights() const;
    std::uint64_t seed() const;
    std::vector<std::size_t> latent_shape() const;

private:
    KeyValues values_;
};

}  // namespace polarkit::cli
