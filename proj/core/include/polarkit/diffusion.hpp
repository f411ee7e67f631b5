#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "polarkit/image.hpp"

namespace polarkit {

/// Opaque real tensor with a caller-chosen shape.
struct Latent {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Latent() = default;
    explicit Latent(std::vector<std::size_t> shape, double fill = 0.0);
    Latent(std::vector<std::size_t> shape, std::vector<double> values);

    std::size_t size() const noexcept { return values.size(); }
    bool same_shape(const Latent& other) const noexcept { return shape == other.shape; }
    bool operator==(const Latent&) const = default;
};

enum class VarianceChoice {
    Beta,       // sigma_t^2 = beta_t
    Posterior,  // sigma_t^2 = beta_t (1 - abar_{t-1}) / (1 - abar_t)
};

/// Linear beta schedule. Index t runs 1..steps; entry 0 is padding except
/// alpha_bar[0] = 1.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    std::vector<double> sigma;
};

DiffusionSchedule make_schedule(int steps, double beta_start, double beta_end,
                                VarianceChoice variance = VarianceChoice::Beta);

/// Conditioning images handed to the denoiser: polarizer-angle frames, AOLP,
/// DOLP and the RGB mixture. Any of them may be left empty.
struct DiffusionCondition {
    std::vector<Image> polar;
    Image aolp;
    Image dolp;
    Image rgb;
};

/// Predicts the noise in z_t. Must return a tensor shaped like z_t.
using Denoiser = std::function<Latent(const Latent& z_t, int t, const DiffusionCondition& condition)>;

/// sqrt(abar_t) z0 + sqrt(1 - abar_t) eps.
Latent q_sample(const Latent& z0, int t, const Latent& eps, const DiffusionSchedule& schedule);

/// Single forward step: sqrt(1 - beta_t) z_{t-1} + sqrt(beta_t) eps.
Latent step_sample(const Latent& z_prev, int t, const Latent& eps, const DiffusionSchedule& schedule);

/// z_{t-1} = (z_t - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t z.
/// `noise` may be null for a deterministic step and is ignored at t = 1.
Latent reverse_step(const Latent& z_t, int t, const Denoiser& denoiser, const DiffusionCondition& condition,
                    const DiffusionSchedule& schedule, const Latent* noise = nullptr);

/// Draws z_T from a standard normal stream seeded with `seed` and runs the
/// reverse chain down to t = 1. In stochastic mode each step t > 1 draws its
/// noise from the same stream.
Latent generate(const Denoiser& denoiser, const DiffusionCondition& condition, const DiffusionSchedule& schedule,
                std::vector<std::size_t> shape, std::uint64_t seed, bool stochastic = true);

/// Mean squared error between predicted and true noise.
double ddpm_loss(const Latent& predicted, const Latent& truth);

Latent standard_normal(std::vector<std::size_t> shape, std::mt19937_64& rng);

/// Denoiser that returns the exact noise for a known clean latent `z0`:
/// (z_t - sqrt(abar_t) z0) / sqrt(1 - abar_t).
Denoiser oracle_denoiser(Latent z0, DiffusionSchedule schedule);

/// Always predicts zero noise.
Denoiser zero_denoiser();

}  // namespace polarkit
