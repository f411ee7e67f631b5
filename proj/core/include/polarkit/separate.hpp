#pragma once

#include <cstddef>

#include "polarkit/image.hpp"
#include "polarkit/stokes.hpp"

namespace polarkit {

struct SeparationResult {
    Image t_hat;
    Image r_hat;
    double alpha_t = 1.0;
    double alpha_r = 1.0;
    double objective_value = 0.0;
    std::size_t clipped = 0;     // samples of r_hat forced into range
    double clip_fraction = 0.0;  // clipped / r_hat.size()
};

/// alpha_t * t + alpha_r * r.
Image mix(const Image& t, const Image& r, double alpha_t, double alpha_r);

/// (m - alpha_t * t) / alpha_r without clipping.
Image reflection_residual(const Image& m, const Image& t, double alpha_t, double alpha_r);

struct ReflectionEstimate {
    Image reflection;
    std::size_t clipped = 0;
    double clip_fraction = 0.0;
};

/// reflection_residual with negative samples set to zero and counted.
ReflectionEstimate estimate_reflection(const Image& m, const Image& t, double alpha_t, double alpha_r);

struct EdgeSearchOptions {
    double alpha_min = 0.0;
    double alpha_max = 1.0;
    double grid_step = 0.01;
    double tolerance = 1e-4;
    double negativity_weight = 10.0;

    void validate() const;
};

/// Forward-difference gradient magnitude summed over channels, over the
/// (width-1) x (height-1) region where both differences exist.
Image edge_map(const Image& img);

/// Edge-space objective for a candidate alpha_t with alpha_r fixed to 1:
/// NCC(|grad(alpha_t t)|, |grad(m - alpha_t t)|) + weight * mean(max(0, -(m - alpha_t t))).
/// The correlation term is 0 when either edge map is constant.
double edge_objective(const Image& m, const Image& t, double alpha_t, double negativity_weight = 10.0);

/// Grid search over alpha_t followed by golden-section refinement inside the
/// best cell. alpha_r is fixed to 1 so the reflection scale lives in r_hat;
/// t_hat is t. Equal objectives prefer the larger alpha_t. A constant t raises
/// DomainError.
SeparationResult search_alpha_edge(const Image& m, const Image& t, const EdgeSearchOptions& options = {});

/// Splits a mixture whose transmission is unpolarized and whose reflection is
/// linearly polarized with degree `p_reflection`: r_hat = |(s1, s2)| / p,
/// clamped to [0, s0], and t_hat = s0 - r_hat. Both coefficients are reported
/// as 1 because they are already folded into the radiances.
SeparationResult separate_brewster(const StokesMap& mixed, double p_reflection);

}  // namespace polarkit
