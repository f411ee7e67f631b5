#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "cli/config.hpp"
#include "polarkit/align.hpp"
#include "polarkit/diffusion.hpp"
#include "polarkit/image_io.hpp"
#include "polarkit/metrics.hpp"
#include "polarkit/mosaic.hpp"
#include "polarkit/optics.hpp"
#include "polarkit/separate.hpp"
#include "polarkit/stokes.hpp"

namespace polarkit::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Ordered key=value lines.
class Report {
public:
    void add(const std::string& key, double v) { lines_.emplace_back(key, format_real(v)); }
    void add(const std::string& key, long v) { lines_.emplace_back(key, std::to_string(v)); }
    void add(const std::string& key, std::size_t v) { lines_.emplace_back(key, std::to_string(v)); }
    void add(const std::string& key, int v) { lines_.emplace_back(key, std::to_string(v)); }
    void add(const std::string& key, const std::string& v) { lines_.emplace_back(key, v); }
    void add(const std::string& key, const char* v) { lines_.emplace_back(key, v); }

    std::string str() const {
        std::string s;
        for (const auto& [k, v] : lines_) s += k + "=" + v + "\n";
        return s;
    }

    void write(const fs::path& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + path.string());
        f << str();
        if (!f) throw IoError("write failed: " + path.string());
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

struct Globals {
    std::string config_path;
    std::optional<long> seed;
    std::string out_dir;
    bool quiet = false;
};

struct Context {
    PipelineConfig config;
    fs::path out_dir;
    bool quiet = false;
    std::ostream* out = nullptr;

    void note(const std::string& msg) const {
        if (!quiet) *out << msg << "\n";
    }
    fs::path output(const std::string& name) const { return out_dir / name; }
    void write_pfm(const Image& img, const std::string& name) const {
        write_image(img, output(name), ImageFormat::Pfm);
        note("wrote " + output(name).string());
    }
};

Context make_context(const Globals& g, std::ostream& out) {
    Context ctx;
    if (!g.config_path.empty()) ctx.config.load(g.config_path);
    if (g.seed) ctx.config.set("seed", std::to_string(*g.seed));
    if (!g.out_dir.empty()) ctx.config.set("out_dir", g.out_dir);
    ctx.out_dir = ctx.config.text("out_dir");
    ctx.quiet = g.quiet;
    ctx.out = &out;
    return ctx;
}

void ensure_out_dir(const Context& ctx) {
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) throw IoError("cannot create output directory " + ctx.out_dir.string());
}

// Re-raises a failure with the pipeline stage prepended, keeping its kind.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

bool is_raw_path(const fs::path& p) { return p.extension() == ".praw"; }

Image crop(const Image& img, int x0, int y0, int w, int h) {
    Image out(w, h, img.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
        }
    }
    return out;
}

struct Rect {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

Image crop(const Image& img, const Rect& r) { return crop(img, r.x0, r.y0, r.w, r.h); }

// Gray references are compared against every channel of a decoded RGB image.
Image broadcast_channels(const Image& img, int channels) {
    if (img.channels() == channels || img.channels() != 1) return img;
    const std::vector<Image> planes(std::size_t(channels), img);
    return Image::merge(planes);
}

int largest_power_of_two_at_most(int n) {
    int p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

void add_metric_suite(Report& report, const std::string& prefix, const Image& a, const Image& b) {
    report.add(prefix + "l1", l1(a, b));
    report.add(prefix + "tv", tv_loss(a, b));
    report.add(prefix + "phase", phase_loss(a, b));
    report.add(prefix + "psnr", psnr(a, b));
    if (a.width() >= 11 && a.height() >= 11) report.add(prefix + "ssim", ssim(a, b));
}

void write_frame(const Context& ctx, const PolarFrame& f, const std::string& prefix) {
    ctx.write_pfm(f.i0, prefix + "i0.pfm");
    ctx.write_pfm(f.i45, prefix + "i45.pfm");
    ctx.write_pfm(f.i90, prefix + "i90.pfm");
    ctx.write_pfm(f.i135, prefix + "i135.pfm");
}

PolarFrame read_frame(const std::vector<std::string>& paths) {
    if (paths.size() != 4) throw UsageError("--frame needs four images (0, 45, 90, 135 degrees)");
    return PolarFrame{read_image(paths[0]), read_image(paths[1]), read_image(paths[2]), read_image(paths[3])};
}

// Translation summary over the per-plane transforms, in mosaic pixels.
struct ShiftSummary {
    bool translation_only = true;
    bool consistent = true;
    double dx = 0.0;
    double dy = 0.0;
};

ShiftSummary summarize(const RawTransforms& transforms) {
    ShiftSummary s;
    std::map<std::pair<double, double>, int> votes;
    for (int p = 0; p < kRawPlanes; ++p) {
        const AffineTransform m = mosaic_transform(transforms[std::size_t(p)], p);
        if (m.m[0] != 1.0 || m.m[1] != 0.0 || m.m[3] != 0.0 || m.m[4] != 1.0) s.translation_only = false;
        ++votes[{m.m[2], m.m[5]}];
    }
    s.consistent = votes.size() == 1;
    const auto best = std::max_element(votes.begin(), votes.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    s.dx = best->first.first;
    s.dy = best->first.second;
    return s;
}

void report_transforms(Report& report, const RawTransforms& transforms) {
    const ShiftSummary s = summarize(transforms);
    report.add("translation_only", s.translation_only ? "true" : "false");
    report.add("consistent", s.consistent ? "true" : "false");
    report.add("shift_dx", s.dx);
    report.add("shift_dy", s.dy);
    bool identity = true;
    for (const AffineTransform& t : transforms) identity = identity && t.is_identity();
    report.add("identity", identity ? "true" : "false");
    for (int p = 0; p < kRawPlanes; ++p) {
        const AffineTransform& t = transforms[std::size_t(p)];
        std::string row;
        for (std::size_t k = 0; k < 6; ++k) row += (k ? " " : "") + format_real(t.m[k]);
        report.add("plane" + std::to_string(p), row);
    }
}

RawTransforms raw_alignment(const RawMosaic& reference, const RawMosaic& moving, const std::string& correspondences) {
    if (correspondences.empty() || correspondences == "phase") return estimate_raw_translation(reference, moving);
    // File pairs map moving-capture points (source) onto reference points
    // (target); warping needs reference -> moving.
    Correspondences pairs = read_correspondences(correspondences);
    for (Correspondence& c : pairs) {
        std::swap(c.sx, c.tx);
        std::swap(c.sy, c.ty);
    }
    return plane_transforms(estimate_affine(pairs));
}

// Region of a decoded (half mosaic resolution) image unaffected by border
// padding after the plane warps.
Rect valid_region(const RawTransforms& transforms, int plane_w, int plane_h, int image_w, int image_h) {
    double worst = 0.0;
    for (const AffineTransform& t : transforms) {
        for (auto [x, y] : {std::pair{0, 0}, std::pair{plane_w - 1, 0}, std::pair{0, plane_h - 1},
                            std::pair{plane_w - 1, plane_h - 1}}) {
            const auto [u, v] = t.apply(x, y);
            worst = std::max({worst, std::abs(u - x), std::abs(v - y)});
        }
    }
    if (worst == 0.0) return {0, 0, image_w, image_h};
    // One plane pixel spans two decoded pixels; the demosaic stencil adds one.
    const int margin = 2 * int(std::ceil(worst)) + 2;
    if (2 * margin >= image_w || 2 * margin >= image_h) return {0, 0, image_w, image_h};
    return {margin, margin, image_w - 2 * margin, image_h - 2 * margin};
}

// ---------------------------------------------------------------------------

int cmd_decode(const Context& ctx, const std::string& raw_path, std::optional<int> layout_override) {
    const RawMosaic raw = read_raw(raw_path);
    std::uint8_t id = raw.layout_id;
    if (layout_override) {
        if (*layout_override < 0 || *layout_override > 255 || !is_known_layout(std::uint8_t(*layout_override))) {
            throw UsageError("unknown layout id " + std::to_string(*layout_override));
        }
        id = std::uint8_t(*layout_override);
    }
    const PolarFrame frame = decode_frame(raw, layout_from_id(id));
    const StokesMap s = compute_stokes(frame);
    const AolpMap angle = aolp(s);
    Image mask(angle.angle.width(), angle.angle.height(), angle.angle.channels());
    for (std::size_t k = 0; k < angle.degenerate.size(); ++k) mask.data()[k] = angle.degenerate[k];

    ensure_out_dir(ctx);
    write_frame(ctx, frame, "");
    ctx.write_pfm(s.s0, "s0.pfm");
    ctx.write_pfm(dolp(s), "dolp.pfm");
    ctx.write_pfm(angle.angle, "aolp.pfm");
    ctx.write_pfm(mask, "aolp_degenerate.pfm");
    ctx.write_pfm(unpolarized(frame), "unpolarized.pfm");
    return kExitOk;
}

int cmd_simulate(const Context& ctx, const std::string& t_path, const std::string& r_path, bool no_reflection) {
    const PipelineConfig& cfg = ctx.config;
    SceneSpec scene;
    scene.transmission = read_image(t_path);
    if (!r_path.empty()) {
        if (no_reflection) throw UsageError("--no-reflection conflicts with a reflection image");
        scene.reflection = read_image(r_path);
    } else if (no_reflection) {
        scene.reflection = Image(scene.transmission.width(), scene.transmission.height(), scene.transmission.channels());
    } else {
        throw UsageError("simulate needs a reflection image or --no-reflection");
    }
    scene.interface = cfg.interface();
    scene.phi_perp = cfg.phi_perp();
    scene.dolp_t_extra = cfg.real("dolp_t_extra");
    scene.unpolarized_transmission = cfg.boolean("unpolarized_transmission");
    const std::uint8_t layout_id = cfg.layout_id();
    const MosaicLayout layout = layout_from_id(layout_id);
    const long mdx = cfg.integer("misalign_dx");
    const long mdy = cfg.integer("misalign_dy");
    if (mdx % 2 != 0 || mdy % 2 != 0) throw UsageError("misalign_dx/misalign_dy must be even (mosaic pixels)");

    const Synthesis syn = synthesize(scene);
    const RenderedMosaic mixed = render_frame(syn.frame, layout, layout_id);

    // Transmission capture without the glass, with its content moved by the
    // misalignment (half the mosaic shift in scene pixels).
    const Image shifted = warp(scene.transmission, AffineTransform::translation(-double(mdx / 2), -double(mdy / 2)));
    const Image zero(shifted.width(), shifted.height(), shifted.channels());
    const RenderedMosaic capture = render_frame(frame_from_stokes(StokesMap{shifted, zero, zero}), layout, layout_id);

    ensure_out_dir(ctx);
    write_frame(ctx, syn.frame, "mixed_");
    ctx.write_pfm(syn.mixed.s0, "mixed_unpolarized.pfm");
    ctx.write_pfm(syn.transmission_stokes.s0, "transmission_component.pfm");
    ctx.write_pfm(syn.reflection_stokes.s0, "reflection_component.pfm");
    write_raw(mixed.mosaic, ctx.output("mixed.praw"));
    ctx.note("wrote " + ctx.output("mixed.praw").string());
    write_raw(capture.mosaic, ctx.output("transmission.praw"));
    ctx.note("wrote " + ctx.output("transmission.praw").string());

    Report gt;
    gt.add("alpha_t", syn.alpha_t);
    gt.add("alpha_r", syn.alpha_r);
    gt.add("dolp_reflection", syn.dolp_reflection);
    gt.add("dolp_transmission", syn.dolp_transmission);
    gt.add("rs", syn.coefficients.rs);
    gt.add("rp", syn.coefficients.rp);
    gt.add("ts", syn.coefficients.ts);
    gt.add("tp", syn.coefficients.tp);
    gt.add("theta_deg", scene.interface.theta * kRadToDeg);
    gt.add("brewster_deg", brewster_angle(scene.interface.n1, scene.interface.n2) * kRadToDeg);
    gt.add("phi_perp_deg", scene.phi_perp * kRadToDeg);
    gt.add("layout_id", int(layout_id));
    gt.add("misalign_dx", mdx);
    gt.add("misalign_dy", mdy);
    gt.add("clipped_mixed", mixed.clipped);
    gt.add("clipped_transmission", capture.clipped);
    gt.write(ctx.output("ground_truth.txt"));
    ctx.note("wrote " + ctx.output("ground_truth.txt").string());
    return kExitOk;
}

struct SeparateArgs {
    std::string method;
    std::vector<std::string> frame;
    std::string raw;
    std::string mixed;
    std::string transmission;
    std::string reference;
};

int cmd_separate(const Context& ctx, const SeparateArgs& a) {
    Report report;
    SeparationResult result;
    report.add("method", a.method);
    if (a.method == "brewster") {
        PolarFrame frame;
        if (!a.raw.empty()) {
            const RawMosaic raw = read_raw(a.raw);
            frame = decode_frame(raw, layout_from_id(raw.layout_id));
        } else if (!a.frame.empty()) {
            frame = read_frame(a.frame);
        } else {
            throw UsageError("brewster separation needs --frame I0 I45 I90 I135 or --raw FILE");
        }
        const std::string& p_text = ctx.config.text("p_reflection");
        const double p = p_text == "auto" ? reflection_dolp(fresnel(ctx.config.interface()))
                                          : parse_real(p_text, "p_reflection");
        report.add("p_reflection", p);
        result = separate_brewster(compute_stokes(frame), p);
    } else if (a.method == "edge-search") {
        if (a.mixed.empty() || a.transmission.empty()) {
            throw UsageError("edge-search needs --mixed and --transmission (aligned reference)");
        }
        result = search_alpha_edge(read_image(a.mixed), read_image(a.transmission), ctx.config.edge_search());
    } else {
        throw UsageError("unknown method '" + a.method + "' (valid methods: brewster, edge-search)");
    }
    report.add("alpha_t", result.alpha_t);
    report.add("alpha_r", result.alpha_r);
    report.add("objective", result.objective_value);
    report.add("clipped", result.clipped);
    report.add("clip_fraction", result.clip_fraction);
    if (!a.reference.empty()) {
        const Image ref = read_image(a.reference);
        // Edge search returns the reference itself as t_hat; its transmission
        // component is alpha_t * t_hat.
        const Image component = a.method == "edge-search" ? mix(result.t_hat, result.t_hat, result.alpha_t, 0.0)
                                                          : result.t_hat;
        add_metric_suite(report, "t_hat_", component, ref);
    }

    ensure_out_dir(ctx);
    ctx.write_pfm(result.t_hat, "t_hat.pfm");
    ctx.write_pfm(result.r_hat, "r_hat.pfm");
    report.write(ctx.output("separation_report.txt"));
    ctx.note(report.str());
    return kExitOk;
}

int cmd_align(const Context& ctx, const std::string& reference, const std::string& moving,
              const std::string& correspondences) {
    Report report;
    ensure_out_dir(ctx);
    if (is_raw_path(reference) && is_raw_path(moving)) {
        const RawMosaic ref = read_raw(reference);
        const RawMosaic mov = read_raw(moving);
        const RawTransforms transforms = raw_alignment(ref, mov, correspondences);
        write_raw(warp_raw(mov, transforms), ctx.output("aligned.praw"));
        ctx.note("wrote " + ctx.output("aligned.praw").string());
        report.add("domain", "raw");
        report_transforms(report, transforms);
    } else {
        const Image ref = read_image(reference);
        const Image mov = read_image(moving);
        require_same_geometry(ref, mov, "align");
        std::vector<AffineTransform> per_channel;
        if (correspondences.empty() || correspondences == "phase") {
            const int cw = largest_power_of_two_at_most(ref.width());
            const int ch = largest_power_of_two_at_most(ref.height());
            const int x0 = (ref.width() - cw) / 2;
            const int y0 = (ref.height() - ch) / 2;
            for (int c = 0; c < ref.channels(); ++c) {
                const PixelShift s = phase_correlate(crop(ref.channel(c), x0, y0, cw, ch), crop(mov.channel(c), x0, y0, cw, ch));
                per_channel.push_back(AffineTransform::translation(s.dx, s.dy));
            }
        } else {
            Correspondences pairs = read_correspondences(correspondences);
            for (Correspondence& c : pairs) {
                std::swap(c.sx, c.tx);
                std::swap(c.sy, c.ty);
            }
            per_channel.assign(std::size_t(ref.channels()), estimate_affine(pairs));
        }
        ctx.write_pfm(warp_channels(mov, per_channel), "aligned.pfm");
        report.add("domain", "image");
        for (std::size_t c = 0; c < per_channel.size(); ++c) {
            std::string row;
            for (std::size_t k = 0; k < 6; ++k) row += (k ? " " : "") + format_real(per_channel[c].m[k]);
            report.add("channel" + std::to_string(c), row);
        }
    }
    report.write(ctx.output("alignment.txt"));
    ctx.note(report.str());
    return kExitOk;
}

int cmd_metrics(const Context& ctx, const std::string& a_path, const std::string& b_path) {
    const Image a = read_image(a_path);
    const Image b = read_image(b_path);
    require_same_geometry(a, b, "metrics");
    Report report;
    add_metric_suite(report, "", a, b);
    const LossBreakdown loss = stage1_loss(a, b, ctx.config.weights());
    report.add("stage1", loss.total);
    *ctx.out << report.str();
    return kExitOk;
}

int cmd_diffuse(const Context& ctx, std::string denoiser_name) {
    const PipelineConfig& cfg = ctx.config;
    if (denoiser_name.empty()) denoiser_name = cfg.text("diffusion_denoiser");
    const DiffusionSchedule schedule = cfg.schedule();
    const std::vector<std::size_t> shape = cfg.latent_shape();
    const std::uint64_t seed = cfg.seed();
    const bool stochastic = cfg.boolean("diffusion_stochastic");

    // Clean latent drawn from a stream separate from the sampler's.
    std::mt19937_64 fixture_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Latent z0 = standard_normal(shape, fixture_rng);
    Denoiser denoiser;
    if (denoiser_name == "oracle") denoiser = oracle_denoiser(z0, schedule);
    else if (denoiser_name == "zero") denoiser = zero_denoiser();
    else throw UsageError("unknown denoiser '" + denoiser_name + "' (valid: oracle, zero)");

    const auto stats = [&](const Latent& z) {
        double mean = 0.0, sq = 0.0, err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            mean += z.values[i];
            sq += z.values[i] * z.values[i];
            err += (z.values[i] - z0.values[i]) * (z.values[i] - z0.values[i]);
            ref += z0.values[i] * z0.values[i];
        }
        const double n = double(z.size());
        mean /= n;
        return std::array<double, 3>{mean, std::sqrt(std::max(0.0, sq / n - mean * mean)), std::sqrt(err / ref)};
    };

    std::ostringstream trajectory;
    trajectory << "# t alpha_bar mean std relative_error_to_z0\n";
    std::mt19937_64 rng(seed);
    Latent z = standard_normal(shape, rng);
    const DiffusionCondition condition;
    for (int t = schedule.steps; t >= 1; --t) {
        const auto [mean, sd, rel] = stats(z);
        trajectory << t << " " << format_real(schedule.alpha_bar[std::size_t(t)]) << " " << format_real(mean) << " "
                   << format_real(sd) << " " << format_real(rel) << "\n";
        if (stochastic && t > 1) {
            const Latent noise = standard_normal(shape, rng);
            z = reverse_step(z, t, denoiser, condition, schedule, &noise);
        } else {
            z = reverse_step(z, t, denoiser, condition, schedule, nullptr);
        }
    }
    const auto [mean, sd, rel] = stats(z);
    trajectory << 0 << " " << format_real(1.0) << " " << format_real(mean) << " " << format_real(sd) << " "
               << format_real(rel) << "\n";

    Report summary;
    summary.add("steps", schedule.steps);
    summary.add("denoiser", denoiser_name);
    summary.add("stochastic", stochastic ? "true" : "false");
    summary.add("seed", std::to_string(seed));
    summary.add("alpha_bar_final", schedule.alpha_bar[std::size_t(schedule.steps)]);
    summary.add("final_mean", mean);
    summary.add("final_std", sd);
    summary.add("final_relative_error", rel);

    ensure_out_dir(ctx);
    {
        std::ofstream f(ctx.output("trajectory.txt"), std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + ctx.output("trajectory.txt").string());
        f << trajectory.str();
        if (!f) throw IoError("write failed: " + ctx.output("trajectory.txt").string());
    }
    summary.write(ctx.output("diffusion_summary.txt"));
    *ctx.out << summary.str();
    return kExitOk;
}

int cmd_pipeline(const Context& ctx) {
    const PipelineConfig& cfg = ctx.config;
    const std::string mixed_path = cfg.text("mixed_raw");
    const std::string transmission_path = cfg.text("transmission_raw");
    if (mixed_path.empty()) throw UsageError("pipeline: config key 'mixed_raw' is required");
    if (transmission_path.empty()) throw UsageError("pipeline: config key 'transmission_raw' is required");

    const RawMosaic mixed_raw = stage("read", [&] { return read_raw(mixed_path); });
    const RawMosaic transmission_raw = stage("read", [&] { return read_raw(transmission_path); });
    if (mixed_raw.width != transmission_raw.width || mixed_raw.height != transmission_raw.height) {
        throw UsageError("read: mixed and transmission captures differ in size");
    }
    ensure_out_dir(ctx);

    const RawTransforms transforms =
        stage("align", [&] { return raw_alignment(mixed_raw, transmission_raw, cfg.text("correspondences")); });
    const RawMosaic aligned = stage("align", [&] { return warp_raw(transmission_raw, transforms); });
    write_raw(aligned, ctx.output("aligned_transmission.praw"));
    Report alignment;
    report_transforms(alignment, transforms);
    alignment.write(ctx.output("alignment.txt"));

    const PolarFrame mixed_frame =
        stage("decode", [&] { return decode_frame(mixed_raw, layout_from_id(mixed_raw.layout_id)); });
    const PolarFrame transmission_frame =
        stage("decode", [&] { return decode_frame(aligned, layout_from_id(aligned.layout_id)); });
    write_frame(ctx, mixed_frame, "mixed_");

    const StokesMap stokes = stage("stokes", [&] { return compute_stokes(mixed_frame); });
    ctx.write_pfm(dolp(stokes), "mixed_dolp.pfm");
    ctx.write_pfm(aolp(stokes).angle, "mixed_aolp.pfm");

    const Image mixed = stage("unpolarized", [&] { return unpolarized(mixed_frame); });
    const Image transmission = stage("unpolarized", [&] { return unpolarized(transmission_frame); });
    ctx.write_pfm(mixed, "mixed.pfm");
    ctx.write_pfm(transmission, "transmission.pfm");

    const Rect valid = valid_region(transforms, mixed_raw.width / 4, mixed_raw.height / 4, mixed.width(), mixed.height());
    const SeparationResult sep = stage("separate", [&] {
        return search_alpha_edge(crop(mixed, valid), crop(transmission, valid), cfg.edge_search());
    });
    const ReflectionEstimate reflection =
        stage("separate", [&] { return estimate_reflection(mixed, transmission, sep.alpha_t, 1.0); });
    ctx.write_pfm(reflection.reflection, "reflection.pfm");

    Report report;
    const ShiftSummary shift = summarize(transforms);
    report.add("shift_dx", shift.dx);
    report.add("shift_dy", shift.dy);
    report.add("shift_consistent", shift.consistent ? "true" : "false");
    report.add("valid_x0", valid.x0);
    report.add("valid_y0", valid.y0);
    report.add("valid_width", valid.w);
    report.add("valid_height", valid.h);
    report.add("alpha_t", sep.alpha_t);
    report.add("alpha_r", sep.alpha_r);
    report.add("objective", sep.objective_value);
    report.add("clip_fraction", reflection.clip_fraction);
    const std::string reference = cfg.text("reference_transmission");
    if (!reference.empty()) {
        stage("metrics", [&] {
            const Image ref = broadcast_channels(read_image(reference), transmission.channels());
            require_same_geometry(ref, transmission, "reference_transmission");
            add_metric_suite(report, "transmission_", crop(transmission, valid), crop(ref, valid));
            return 0;
        });
    }
    report.write(ctx.output("pipeline_report.txt"));
    ctx.note(report.str());
    return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage:
        case ErrorKind::Format: return kExitUsage;
        case ErrorKind::Io: return kExitIo;
        case ErrorKind::Domain: return kExitDomain;
    }
    return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Polarization reflection-separation toolkit", "polarkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals globals;
    app.add_option("--config", globals.config_path, "key=value configuration file");
    app.add_option("--seed", globals.seed, "random seed (overrides config)");
    app.add_option("--out", globals.out_dir, "output directory (overrides config)");
    app.add_flag("--quiet", globals.quiet, "suppress progress output");

    std::function<int(const Context&)> action;

    auto* decode = app.add_subcommand("decode", "decode a PRAW mosaic into per-angle frames and Stokes maps");
    std::string decode_raw_path;
    std::optional<int> decode_layout;
    decode->add_option("raw", decode_raw_path, "PRAW file")->required();
    decode->add_option("--layout", decode_layout, "layout id override");
    decode->callback([&] { action = [&](const Context& c) { return cmd_decode(c, decode_raw_path, decode_layout); }; });

    auto* simulate = app.add_subcommand("simulate", "synthesize a labelled polarized mixture");
    std::string sim_t, sim_r;
    bool sim_no_reflection = false;
    simulate->add_option("transmission", sim_t, "transmission image")->required();
    simulate->add_option("reflection", sim_r, "reflection image");
    simulate->add_flag("--no-reflection", sim_no_reflection, "use a zero reflection layer");
    simulate->callback([&] {
        action = [&](const Context& c) { return cmd_simulate(c, sim_t, sim_r, sim_no_reflection); };
    });

    auto* separate = app.add_subcommand("separate", "separate transmission and reflection");
    SeparateArgs sep;
    separate->add_option("--method", sep.method, "brewster or edge-search")->required();
    separate->add_option("--frame", sep.frame, "four polarizer-angle images (0 45 90 135)")->expected(4);
    separate->add_option("--raw", sep.raw, "PRAW mixed capture (brewster)");
    separate->add_option("--mixed", sep.mixed, "mixed image (edge-search)");
    separate->add_option("--transmission", sep.transmission, "aligned transmission image (edge-search)");
    separate->add_option("--reference", sep.reference, "ground-truth transmission component for metrics");
    separate->callback([&] { action = [&](const Context& c) { return cmd_separate(c, sep); }; });

    auto* align = app.add_subcommand("align", "align a moving capture onto a reference");
    std::string align_ref, align_mov, align_corr;
    align->add_option("--reference", align_ref, "reference image or PRAW")->required();
    align->add_option("--moving", align_mov, "moving image or PRAW")->required();
    align->add_option("--correspondences", align_corr, "correspondence file (default: phase correlation)");
    align->callback([&] { action = [&](const Context& c) { return cmd_align(c, align_ref, align_mov, align_corr); }; });

    auto* metrics = app.add_subcommand("metrics", "compare two images");
    std::string met_a, met_b;
    metrics->add_option("a", met_a, "first image")->required();
    metrics->add_option("b", met_b, "second image")->required();
    metrics->callback([&] { action = [&](const Context& c) { return cmd_metrics(c, met_a, met_b); }; });

    auto* diffuse = app.add_subcommand("diffuse", "run the diffusion sampler and report trajectory statistics");
    std::string diff_denoiser;
    diffuse->add_option("--denoiser", diff_denoiser, "oracle or zero (overrides config)");
    diffuse->callback([&] { action = [&](const Context& c) { return cmd_diffuse(c, diff_denoiser); }; });

    auto* pipeline = app.add_subcommand("pipeline", "align, decode, reconstruct and estimate the reflection");
    pipeline->callback([&] { action = [](const Context& c) { return cmd_pipeline(c); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "polarkit: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        const Context ctx = make_context(globals, out);
        return action(ctx);
    } catch (const Error& e) {
        err << "polarkit: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "polarkit: internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace polarkit::cli
