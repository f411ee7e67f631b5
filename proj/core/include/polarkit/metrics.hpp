#pragma once

#include <functional>
#include <limits>

#include "polarkit/image.hpp"

namespace polarkit {

/// Mean absolute difference.
double l1(const Image& a, const Image& b);

/// Mean absolute difference of forward-difference gradients, x and y stacked;
/// differences that would cross the border are not formed.
double tv_loss(const Image& a, const Image& b);

/// Mean wrapped phase difference in [0, pi] between the 2-D DFTs of `a` and
/// `b`, per channel, after zero-padding each side to a power of two.
/// Frequencies where either magnitude is below 1e-9 are skipped; if none
/// remain the loss is 0.
double phase_loss(const Image& a, const Image& b);

inline constexpr double kPhaseMagnitudeFloor = 1e-9;

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over valid window positions and then
/// over channels.
double ssim(const Image& a, const Image& b);

struct LossWeights {
    double l1 = 1.0;
    double perceptual = 0.0;
    double tv = 0.1;
    double phase = 0.1;
    double diffusion = 1.0;
    double reconstruction = 1.0;

    /// Throws UsageError on negative or non-finite weights.
    void validate() const;
};

/// Optional perceptual term; without one the slot contributes 0.
using PerceptualLoss = std::function<double(const Image& predicted, const Image& target)>;

struct LossBreakdown {
    double l1 = 0.0;
    double perceptual = 0.0;
    double tv = 0.0;
    double phase = 0.0;
    double diffusion = 0.0;
    double reconstruction = 0.0;
    double total = 0.0;
};

/// First stage: w.l1*L1 + w.perceptual*P + w.tv*TV + w.phase*phase. Terms
/// with zero weight are not evaluated.
LossBreakdown stage1_loss(const Image& predicted, const Image& target, const LossWeights& w,
                          const PerceptualLoss& perceptual = {});

/// Second stage: w.diffusion * diffusion_loss + w.reconstruction * recon.
LossBreakdown stage2_loss(double diffusion_loss, double reconstruction_loss, const LossWeights& w);

/// Second stage with the reconstruction term computed as stage1_loss(...).total.
LossBreakdown stage2_loss(double diffusion_loss, const Image& predicted, const Image& target, const LossWeights& w,
                          const PerceptualLoss& perceptual = {});

}  // namespace polarkit
