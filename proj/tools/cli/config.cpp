#include "cli/config.hpp"

#include <numbers>
#include <sstream>

#include "polarkit/error.hpp"
#include "polarkit/mosaic.hpp"

namespace polarkit::cli {

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"layout_id", "0", "sensor layout id (0-3)"},
        {"n1", "1.0", "refractive index of the incident medium"},
        {"n2", "1.5", "refractive index of the glass"},
        {"theta_deg", "brewster", "angle of incidence in degrees, or 'brewster'"},
        {"phi_perp_deg", "0", "reflection polarization orientation in degrees"},
        {"dolp_t_extra", "0", "lower bound on the transmitted polarized fraction"},
        {"unpolarized_transmission", "false", "force the transmitted layer to be unpolarized"},
        {"misalign_dx", "0", "simulate: shift of the transmission capture, mosaic pixels (even)"},
        {"misalign_dy", "0", "simulate: shift of the transmission capture, mosaic pixels (even)"},
        {"p_reflection", "auto", "brewster separation: reflection DOLP, or 'auto' from the interface"},
        {"alpha_min", "0", "edge search: lower bound of alpha_t"},
        {"alpha_max", "1", "edge search: upper bound of alpha_t"},
        {"alpha_step", "0.01", "edge search: grid step"},
        {"alpha_tolerance", "1e-4", "edge search: golden-section tolerance"},
        {"negativity_weight", "10", "edge search: weight of the negative-reflection penalty"},
        {"diffusion_steps", "1000", "number of diffusion timesteps"},
        {"beta_start", "1e-4", "first beta of the linear schedule"},
        {"beta_end", "0.02", "last beta of the linear schedule"},
        {"diffusion_variance", "beta", "reverse-step variance: beta or posterior"},
        {"diffusion_stochastic", "false", "add sigma_t noise in reverse steps"},
        {"diffusion_denoiser", "oracle", "diffuse demo denoiser: oracle or zero"},
        {"latent_shape", "4x16x16", "diffuse demo latent shape"},
        {"gamma1", "1", "L1 weight"},
        {"gamma2", "0", "perceptual weight (no built-in perceptual term)"},
        {"gamma3", "0.1", "TV weight"},
        {"gamma4", "0.1", "phase weight"},
        {"gamma5", "1", "diffusion loss weight"},
        {"gamma6", "1", "reconstruction loss weight"},
        {"seed", "0", "random seed"},
        {"out_dir", "out", "output directory"},
        {"mixed_raw", "", "pipeline: mixed capture (PRAW)"},
        {"transmission_raw", "", "pipeline: transmission capture (PRAW)"},
        {"correspondences", "phase", "pipeline: 'phase' or a correspondence file"},
        {"reference_transmission", "", "pipeline: optional ground-truth transmission image"},
    };
    return keys;
}

PipelineConfig::PipelineConfig() {
    for (const ConfigKey& k : config_keys()) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void PipelineConfig::load(const std::filesystem::path& path) {
    for (auto& [key, value] : read_key_values(path)) {
        if (!values_.contains(key)) throw FormatError(path.string() + ": unknown config key '" + key + "'");
        values_[key] = value;
    }
}

void PipelineConfig::set(std::string_view key, std::string value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
    it->second = std::move(value);
}

const std::string& PipelineConfig::text(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
    return it->second;
}

double PipelineConfig::real(std::string_view key) const { return parse_real(text(key), key); }
long PipelineConfig::integer(std::string_view key) const { return parse_integer(text(key), key); }
bool PipelineConfig::boolean(std::string_view key) const { return parse_bool(text(key), key); }

std::uint8_t PipelineConfig::layout_id() const {
    const long id = integer("layout_id");
    if (id < 0 || id > 255 || !is_known_layout(std::uint8_t(id))) {
        throw FormatError("layout_id " + std::to_string(id) + " is not a registered layout");
    }
    return std::uint8_t(id);
}

InterfaceSpec PipelineConfig::interface() const {
    InterfaceSpec spec;
    spec.n1 = real("n1");
    spec.n2 = real("n2");
    const std::string& theta = text("theta_deg");
    spec.theta = theta == "brewster" ? brewster_angle(spec.n1, spec.n2) : parse_real(theta, "theta_deg") * std::numbers::pi / 180.0;
    spec.validate();
    return spec;
}

double PipelineConfig::phi_perp() const { return real("phi_perp_deg") * std::numbers::pi / 180.0; }

EdgeSearchOptions PipelineConfig::edge_search() const {
    EdgeSearchOptions o;
    o.alpha_min = real("alpha_min");
    o.alpha_max = real("alpha_max");
    o.grid_step = real("alpha_step");
    o.tolerance = real("alpha_tolerance");
    o.negativity_weight = real("negativity_weight");
    o.validate();
    return o;
}

DiffusionSchedule PipelineConfig::schedule() const {
    const std::string& variance = text("diffusion_variance");
    if (variance != "beta" && variance != "posterior") {
        throw FormatError("diffusion_variance must be 'beta' or 'posterior'");
    }
    const long steps = integer("diffusion_steps");
    if (steps < 1 || steps > 1000000) throw FormatError("diffusion_steps out of range");
    return make_schedule(int(steps), real("beta_start"), real("beta_end"),
                         variance == "beta" ? VarianceChoice::Beta : VarianceChoice::Posterior);
}

LossWeights PipelineConfig::weights() const {
    LossWeights w;
    w.l1 = real("gamma1");
    w.perceptual = real("gamma2");
    w.tv = real("gamma3");
    w.phase = real("gamma4");
    w.diffusion = real("gamma5");
    w.reconstruction = real("gamma6");
    w.validate();
    return w;
}

std::uint64_t PipelineConfig::seed() const {
    const long s = integer("seed");
    if (s < 0) throw FormatError("seed must be non-negative");
    return std::uint64_t(s);
}

std::vector<std::size_t> PipelineConfig::latent_shape() const {
    std::vector<std::size_t> shape;
    std::istringstream in(text("latent_shape"));
    std::string part;
    while (std::getline(in, part, 'x')) {
        const long d = parse_integer(part, "latent_shape");
        if (d < 1 || d > 4096) throw FormatError("latent_shape entries must lie in [1, 4096]");
        shape.push_back(std::size_t(d));
    }
    if (shape.empty()) throw FormatError("latent_shape is empty");
    return shape;
}

}  // namespace polarkit::cli
