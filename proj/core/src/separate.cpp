#include "polarkit/separate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

// Objectives closer than this are treated as equal.
constexpr double kTieTolerance = 1e-12;

double ncc(std::span<const double> a, std::span<const double> b) {
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

void check_pair(const Image& m, const Image& t, const char* what) {
    if (m.empty()) throw UsageError(std::string(what) + ": empty image");
    require_same_geometry(m, t, what);
    require_finite(m, what);
    require_finite(t, what);
}

// Evaluates the objective with the transmission edge map precomputed.
class EdgeObjective {
public:
    EdgeObjective(const Image& m, const Image& t, double weight) : m_(m), t_(t), weight_(weight), t_edges_(edge_map(t)) {}

    bool transmission_is_flat() const {
        const auto e = t_edges_.data();
        return std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
    }

    double operator()(double alpha_t) const {
        const Image residual = reflection_residual(m_, t_, alpha_t, 1.0);
        double negative = 0.0;
        for (double v : residual.data()) negative += std::max(0.0, -v);
        negative /= double(residual.size());
        // |grad(alpha t)| = alpha |grad t| and the correlation is scale free,
        // so alpha = 0 takes the limit from above.
        return ncc(t_edges_.data(), edge_map(residual).data()) + weight_ * negative;
    }

private:
    const Image& m_;
    const Image& t_;
    double weight_;
    Image t_edges_;
};

}  // namespace

Image mix(const Image& t, const Image& r, double alpha_t, double alpha_r) {
    check_pair(t, r, "mix");
    if (!(alpha_t >= 0.0) || !(alpha_r >= 0.0) || !std::isfinite(alpha_t) || !std::isfinite(alpha_r)) {
        throw DomainError("mix: coefficients must be finite and non-negative");
    }
    Image out(t.width(), t.height(), t.channels());
    auto a = t.data();
    auto b = r.data();
    auto o = out.data();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = alpha_t * a[k] + alpha_r * b[k];
    return out;
}

Image reflection_residual(const Image& m, const Image& t, double alpha_t, double alpha_r) {
    check_pair(m, t, "estimate_reflection");
    if (!(alpha_r > 0.0) || !std::isfinite(alpha_r) || !std::isfinite(alpha_t)) {
        throw DomainError("estimate_reflection: alpha_r must be positive");
    }
    Image out(m.width(), m.height(), m.channels());
    auto mm = m.data();
    auto tt = t.data();
    auto o = out.data();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = (mm[k] - alpha_t * tt[k]) / alpha_r;
    return out;
}

ReflectionEstimate estimate_reflection(const Image& m, const Image& t, double alpha_t, double alpha_r) {
    ReflectionEstimate est{reflection_residual(m, t, alpha_t, alpha_r), 0, 0.0};
    for (double& v : est.reflection.data()) {
        if (v < 0.0) {
            v = 0.0;
            ++est.clipped;
        }
    }
    est.clip_fraction = double(est.clipped) / double(est.reflection.size());
    return est;
}

void EdgeSearchOptions::validate() const {
    if (!(alpha_min >= 0.0 && alpha_min < alpha_max && alpha_max <= 1.0)) {
        throw UsageError("edge search: need 0 <= alpha_min < alpha_max <= 1");
    }
    if (!(grid_step > 0.0 && grid_step <= alpha_max - alpha_min)) throw UsageError("edge search: invalid grid step");
    if (!(tolerance > 0.0)) throw UsageError("edge search: tolerance must be positive");
    if (!(negativity_weight >= 0.0) || !std::isfinite(negativity_weight)) {
        throw UsageError("edge search: negativity weight must be non-negative");
    }
}

Image edge_map(const Image& img) {
    if (img.width() < 2 || img.height() < 2) throw UsageError("edge_map: image must be at least 2x2");
    Image out(img.width() - 1, img.height() - 1, 1);
    for (int y = 0; y + 1 < img.height(); ++y) {
        for (int x = 0; x + 1 < img.width(); ++x) {
            double sum = 0.0;
            for (int c = 0; c < img.channels(); ++c) {
                const double gx = img.at(x + 1, y, c) - img.at(x, y, c);
                const double gy = img.at(x, y + 1, c) - img.at(x, y, c);
                sum += std::sqrt(gx * gx + gy * gy);
            }
            out.at(x, y) = sum;
        }
    }
    return out;
}

double edge_objective(const Image& m, const Image& t, double alpha_t, double negativity_weight) {
    check_pair(m, t, "edge_objective");
    return EdgeObjective(m, t, negativity_weight)(alpha_t);
}

SeparationResult search_alpha_edge(const Image& m, const Image& t, const EdgeSearchOptions& options) {
    options.validate();
    check_pair(m, t, "search_alpha_edge");
    const EdgeObjective objective(m, t, options.negativity_weight);
    if (objective.transmission_is_flat()) throw DomainError("search_alpha_edge: transmission has no gradients");

    const double span = options.alpha_max - options.alpha_min;
    const long cells = std::max(1L, std::lround(span / options.grid_step));
    double best_alpha = options.alpha_min;
    double best_value = std::numeric_limits<double>::infinity();
    for (long k = 0; k <= cells; ++k) {
        const double alpha = options.alpha_min + span * double(k) / double(cells);
        const double value = objective(alpha);
        // Ascending sweep, so accepting ties moves toward larger alpha.
        if (value <= best_value + kTieTolerance) {
            best_alpha = alpha;
            best_value = value;
        }
    }

    // Golden-section refinement over the neighbouring cells.
    const double cell = span / double(cells);
    double lo = std::max(options.alpha_min, best_alpha - cell);
    double hi = std::min(options.alpha_max, best_alpha + cell);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (hi - lo > options.tolerance) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        }
    }
    const double refined_alpha = 0.5 * (lo + hi);
    const double refined_value = objective(refined_alpha);

    SeparationResult result;
    if (refined_value < best_value - kTieTolerance) {
        result.alpha_t = refined_alpha;
        result.objective_value = refined_value;
    } else {
        result.alpha_t = best_alpha;
        result.objective_value = best_value;
    }
    result.alpha_r = 1.0;
    ReflectionEstimate est = estimate_reflection(m, t, result.alpha_t, 1.0);
    result.r_hat = std::move(est.reflection);
    result.clipped = est.clipped;
    result.clip_fraction = est.clip_fraction;
    result.t_hat = t;
    return result;
}

SeparationResult separate_brewster(const StokesMap& mixed, double p_reflection) {
    if (!(p_reflection > 0.0 && p_reflection <= 1.0)) {
        throw DomainError("separate_brewster: reflection DOLP must lie in (0, 1]");
    }
    mixed.validate();
    const Image& s0 = mixed.s0;
    SeparationResult result;
    result.t_hat = Image(s0.width(), s0.height(), s0.channels());
    result.r_hat = Image(s0.width(), s0.height(), s0.channels());
    auto a0 = s0.data();
    auto a1 = mixed.s1.data();
    auto a2 = mixed.s2.data();
    auto t = result.t_hat.data();
    auto r = result.r_hat.data();
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double total = std::max(0.0, a0[k]);
        double refl = std::hypot(a1[k], a2[k]) / p_reflection;
        if (refl > total) {
            refl = total;
            ++result.clipped;
        }
        r[k] = refl;
        t[k] = a0[k] - refl;
    }
    result.alpha_t = 1.0;
    result.alpha_r = 1.0;
    result.clip_fraction = double(result.clipped) / double(t.size());
    return result;
}

}  // namespace polarkit
