#include "polarkit/metrics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "polarkit/error.hpp"
#include "polarkit/fft.hpp"

namespace polarkit {

namespace {

void check_pair(const Image& a, const Image& b, const char* what) {
    if (a.empty()) throw UsageError(std::string(what) + ": empty image");
    require_same_geometry(a, b, what);
    require_finite(a, what);
    require_finite(b, what);
}

constexpr int kSsimWindow = 11;

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = double(i - kSsimWindow / 2);
        taps[std::size_t(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += taps[std::size_t(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable "valid" Gaussian filter of a w x h plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h) {
    static const auto taps = gaussian_taps();
    const int ow = w - kSsimWindow + 1;
    const int oh = h - kSsimWindow + 1;
    std::vector<double> rows(std::size_t(ow) * std::size_t(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) s += taps[std::size_t(k)] * plane[std::size_t(y) * std::size_t(w) + std::size_t(x + k)];
            rows[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = s;
        }
    }
    std::vector<double> out(std::size_t(ow) * std::size_t(oh));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) s += taps[std::size_t(k)] * rows[std::size_t(y + k) * std::size_t(ow) + std::size_t(x)];
            out[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = s;
        }
    }
    return out;
}

}  // namespace

double l1(const Image& a, const Image& b) {
    check_pair(a, b, "l1");
    double sum = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t k = 0; k < x.size(); ++k) sum += std::abs(x[k] - y[k]);
    return sum / double(x.size());
}

double tv_loss(const Image& a, const Image& b) {
    check_pair(a, b, "tv_loss");
    if (a.width() < 2 || a.height() < 2) throw UsageError("tv_loss: images must be at least 2x2");
    double sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels(); ++c) {
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x + 1 < a.width(); ++x) {
                sum += std::abs((a.at(x + 1, y, c) - a.at(x, y, c)) - (b.at(x + 1, y, c) - b.at(x, y, c)));
                ++count;
            }
        }
        for (int y = 0; y + 1 < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) {
                sum += std::abs((a.at(x, y + 1, c) - a.at(x, y, c)) - (b.at(x, y + 1, c) - b.at(x, y, c)));
                ++count;
            }
        }
    }
    return sum / double(count);
}

double phase_loss(const Image& a, const Image& b) {
    check_pair(a, b, "phase_loss");
    const int pw = next_power_of_two(a.width());
    const int ph = next_power_of_two(a.height());
    double sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels(); ++c) {
        const auto fa = fft2d_channel(a, c, pw, ph);
        const auto fb = fft2d_channel(b, c, pw, ph);
        for (std::size_t k = 0; k < fa.size(); ++k) {
            if (std::abs(fa[k]) < kPhaseMagnitudeFloor || std::abs(fb[k]) < kPhaseMagnitudeFloor) continue;
            // arg(fa * conj(fb)) is the phase difference wrapped to (-pi, pi].
            sum += std::abs(std::arg(fa[k] * std::conj(fb[k])));
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / double(count);
}

double psnr(const Image& a, const Image& b, double peak) {
    check_pair(a, b, "psnr");
    if (!(peak > 0.0) || !std::isfinite(peak)) throw UsageError("psnr: peak must be positive");
    double sum = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        sum += d * d;
    }
    const double mse = sum / double(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& a, const Image& b) {
    check_pair(a, b, "ssim");
    if (a.width() < kSsimWindow || a.height() < kSsimWindow) throw UsageError("ssim: images must be at least 11x11");
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const int w = a.width();
    const int h = a.height();
    const std::size_t n = a.pixel_count();
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = a.data()[i * std::size_t(a.channels()) + std::size_t(c)];
            y[i] = b.data()[i * std::size_t(a.channels()) + std::size_t(c)];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, w, h);
        const auto my = filter_valid(y, w, h);
        const auto mxx = filter_valid(xx, w, h);
        const auto myy = filter_valid(yy, w, h);
        const auto mxy = filter_valid(xy, w, h);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = mxx[i] - mx[i] * mx[i];
            const double vy = myy[i] - my[i] * my[i];
            const double cov = mxy[i] - mx[i] * my[i];
            sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += sum / double(mx.size());
    }
    return total / double(a.channels());
}

void LossWeights::validate() const {
    for (double v : {l1, perceptual, tv, phase, diffusion, reconstruction}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError("loss weights must be finite and non-negative");
    }
}

LossBreakdown stage1_loss(const Image& predicted, const Image& target, const LossWeights& w,
                          const PerceptualLoss& perceptual) {
    w.validate();
    check_pair(predicted, target, "stage1_loss");
    LossBreakdown out;
    if (w.l1 != 0.0) out.l1 = l1(predicted, target);
    if (w.perceptual != 0.0 && perceptual) out.perceptual = perceptual(predicted, target);
    if (w.tv != 0.0) out.tv = tv_loss(predicted, target);
    if (w.phase != 0.0) out.phase = phase_loss(predicted, target);
    out.total = w.l1 * out.l1 + w.perceptual * out.perceptual + w.tv * out.tv + w.phase * out.phase;
    return out;
}

LossBreakdown stage2_loss(double diffusion_loss, double reconstruction_loss, const LossWeights& w) {
    w.validate();
    if (!std::isfinite(diffusion_loss) || !std::isfinite(reconstruction_loss)) {
        throw DomainError("stage2_loss: non-finite loss term");
    }
    LossBreakdown out;
    out.diffusion = diffusion_loss;
    out.reconstruction = reconstruction_loss;
    out.total = w.diffusion * diffusion_loss + w.reconstruction * reconstruction_loss;
    return out;
}

LossBreakdown stage2_loss(double diffusion_loss, const Image& predicted, const Image& target, const LossWeights& w,
                          const PerceptualLoss& perceptual) {
    return stage2_loss(diffusion_loss, stage1_loss(predicted, target, w, perceptual).total, w);
}

}  // namespace polarkit
