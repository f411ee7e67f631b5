#include "polarkit/diffusion.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "polarkit/error.hpp"

namespace polarkit {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_step(int t, const DiffusionSchedule& schedule) {
    if (t < 1 || t > schedule.steps) {
        throw UsageError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(schedule.steps) + "]");
    }
}

void check_shapes(const Latent& a, const Latent& b, const char* what) {
    if (!a.same_shape(b) || a.size() != b.size()) throw UsageError(std::string(what) + ": shape mismatch");
}

void check_finite(const Latent& z, const char* what) {
    for (double v : z.values) {
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite latent entry");
    }
}

}  // namespace

Latent::Latent(std::vector<std::size_t> s, double fill) : shape(std::move(s)), values(element_count(shape), fill) {}

Latent::Latent(std::vector<std::size_t> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (values.size() != element_count(shape)) throw UsageError("latent: value count does not match shape");
}

DiffusionSchedule make_schedule(int steps, double beta_start, double beta_end, VarianceChoice variance) {
    if (steps < 1) throw UsageError("schedule: need at least one step");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw UsageError("schedule: need 0 < beta_start <= beta_end < 1");
    }
    DiffusionSchedule s;
    s.steps = steps;
    const std::size_t n = std::size_t(steps) + 1;
    s.beta.assign(n, 0.0);
    s.alpha.assign(n, 1.0);
    s.alpha_bar.assign(n, 1.0);
    s.sigma.assign(n, 0.0);
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps == 1 ? 0.0 : double(t - 1) / double(steps - 1);
        const double beta = steps == 1 ? beta_start : t == steps ? beta_end : beta_start + (beta_end - beta_start) * frac;
        s.beta[std::size_t(t)] = beta;
        s.alpha[std::size_t(t)] = 1.0 - beta;
        s.alpha_bar[std::size_t(t)] = s.alpha_bar[std::size_t(t - 1)] * (1.0 - beta);
    }
    for (int t = 1; t <= steps; ++t) {
        const auto i = std::size_t(t);
        s.sigma[i] = variance == VarianceChoice::Beta
                         ? std::sqrt(s.beta[i])
                         : std::sqrt(s.beta[i] * (1.0 - s.alpha_bar[i - 1]) / (1.0 - s.alpha_bar[i]));
    }
    return s;
}

Latent q_sample(const Latent& z0, int t, const Latent& eps, const DiffusionSchedule& schedule) {
    check_step(t, schedule);
    check_shapes(z0, eps, "q_sample");
    check_finite(z0, "q_sample");
    check_finite(eps, "q_sample");
    const double a = std::sqrt(schedule.alpha_bar[std::size_t(t)]);
    const double b = std::sqrt(1.0 - schedule.alpha_bar[std::size_t(t)]);
    Latent out(z0.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a * z0.values[i] + b * eps.values[i];
    return out;
}

Latent step_sample(const Latent& z_prev, int t, const Latent& eps, const DiffusionSchedule& schedule) {
    check_step(t, schedule);
    check_shapes(z_prev, eps, "step_sample");
    check_finite(z_prev, "step_sample");
    check_finite(eps, "step_sample");
    const double a = std::sqrt(1.0 - schedule.beta[std::size_t(t)]);
    const double b = std::sqrt(schedule.beta[std::size_t(t)]);
    Latent out(z_prev.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a * z_prev.values[i] + b * eps.values[i];
    return out;
}

Latent reverse_step(const Latent& z_t, int t, const Denoiser& denoiser, const DiffusionCondition& condition,
                    const DiffusionSchedule& schedule, const Latent* noise) {
    check_step(t, schedule);
    check_finite(z_t, "reverse_step");
    if (!denoiser) throw UsageError("reverse_step: no denoiser");
    const Latent eps_hat = denoiser(z_t, t, condition);
    check_shapes(z_t, eps_hat, "reverse_step (denoiser output)");
    check_finite(eps_hat, "reverse_step (denoiser output)");
    const auto i = std::size_t(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha[i]);
    const double eps_coeff = schedule.beta[i] / std::sqrt(1.0 - schedule.alpha_bar[i]);
    const bool add_noise = noise != nullptr && t > 1;
    if (add_noise) {
        check_shapes(z_t, *noise, "reverse_step (noise)");
        check_finite(*noise, "reverse_step (noise)");
    }
    Latent out(z_t.shape);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double v = inv_sqrt_alpha * (z_t.values[k] - eps_coeff * eps_hat.values[k]);
        if (add_noise) v += schedule.sigma[i] * noise->values[k];
        out.values[k] = v;
    }
    return out;
}

Latent generate(const Denoiser& denoiser, const DiffusionCondition& condition, const DiffusionSchedule& schedule,
                std::vector<std::size_t> shape, std::uint64_t seed, bool stochastic) {
    if (schedule.steps < 1) throw UsageError("generate: empty schedule");
    std::mt19937_64 rng(seed);
    Latent z = standard_normal(shape, rng);
    for (int t = schedule.steps; t >= 1; --t) {
        if (stochastic && t > 1) {
            const Latent noise = standard_normal(shape, rng);
            z = reverse_step(z, t, denoiser, condition, schedule, &noise);
        } else {
            z = reverse_step(z, t, denoiser, condition, schedule, nullptr);
        }
    }
    return z;
}

double ddpm_loss(const Latent& predicted, const Latent& truth) {
    check_shapes(predicted, truth, "ddpm_loss");
    check_finite(predicted, "ddpm_loss");
    check_finite(truth, "ddpm_loss");
    if (predicted.size() == 0) throw UsageError("ddpm_loss: empty tensors");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted.values[i] - truth.values[i];
        sum += d * d;
    }
    return sum / double(predicted.size());
}

Latent standard_normal(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    Latent out(std::move(shape));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out.values) v = normal(rng);
    return out;
}

Denoiser oracle_denoiser(Latent z0, DiffusionSchedule schedule) {
    return [z0 = std::move(z0), schedule = std::move(schedule)](const Latent& z_t, int t, const DiffusionCondition&) {
        check_shapes(z_t, z0, "oracle denoiser");
        const double a = std::sqrt(schedule.alpha_bar[std::size_t(t)]);
        const double b = std::sqrt(1.0 - schedule.alpha_bar[std::size_t(t)]);
        Latent eps(z_t.shape);
        for (std::size_t i = 0; i < eps.size(); ++i) eps.values[i] = (z_t.values[i] - a * z0.values[i]) / b;
        return eps;
    };
}

Denoiser zero_denoiser() {
    return [](const Latent& z_t, int, const DiffusionCondition&) { return Latent(z_t.shape, 0.0); };
}

}  // namespace polarkit
