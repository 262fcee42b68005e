#pragma once

#include <functional>
#include <vector>

#include "ccedit/types.hpp"

namespace ccedit {

// Diffusion timestep constants. Timesteps run 1..T; alpha_bars[t-1] is the
// cumulative product for step t.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    double alpha_bar(int t) const;  // t in [0, T]; alpha_bar(0) = 1
};

struct Timestep {
    int t = 1;  // in [1, T]
};

struct GuidanceConfig {
    double scale = 9.0;  // classifier-free guidance magnitude
};

// Linear beta ramp. Throws on invalid range.
NoiseSchedule build_schedule(int T, double beta_min, double beta_max);

// Closed-form forward noising: z_t = sqrt(abar_t) z0 + sqrt(1-abar_t) eps.
// Noise is supplied by the caller so sampling stays reproducible.
LatentClip q_sample(const LatentClip& z0, Timestep t, const LatentClip& eps,
                    const NoiseSchedule& schedule);

// Mean squared error over all elements.
double denoise_loss(const Tensor& eps_true, const Tensor& eps_pred);

// eps_uncond + w * (eps_cond - eps_uncond).
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double w);

// Model callback: (z_t, t) -> epsilon prediction. Conditioning is baked
// into the closure by the caller.
using EpsModel = std::function<Tensor(const LatentClip& z_t, Timestep t)>;

// Evenly spaced timestep subset of the given size, descending, always
// including T; the final update targets t = 0 (alpha_bar = 1).
std::vector<int> ddim_timesteps(int T, int steps);

// Deterministic DDIM (eta = 0). Throws if the model emits non-finite values,
// naming the offending timestep.
LatentClip ddim_sample(const EpsModel& model, const LatentClip& z_T,
                       const NoiseSchedule& schedule, int steps);

}  // namespace ccedit
