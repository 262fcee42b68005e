#include "ccedit/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace ccedit {

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > T) throw std::out_of_range("alpha_bar: t outside [0,T]");
    if (t == 0) return 1.0;
    return alpha_bars[static_cast<size_t>(t - 1)];
}

NoiseSchedule build_schedule(int T, double beta_min, double beta_max) {
    if (T < 2) throw std::invalid_argument("build_schedule: T must be >= 2");
    if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
        throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(static_cast<size_t>(T));
    s.alphas.resize(static_cast<size_t>(T));
    s.alpha_bars.resize(static_cast<size_t>(T));
    double prod = 1.0;
    for (int i = 0; i < T; ++i) {
        double beta = beta_min + (beta_max - beta_min) * static_cast<double>(i) /
                                     static_cast<double>(T - 1);
        s.betas[static_cast<size_t>(i)] = beta;
        s.alphas[static_cast<size_t>(i)] = 1.0 - beta;
        prod *= 1.0 - beta;
        s.alpha_bars[static_cast<size_t>(i)] = prod;
    }
    return s;
}

LatentClip q_sample(const LatentClip& z0, Timestep t, const LatentClip& eps,
                    const NoiseSchedule& schedule) {
    if (t.t < 1 || t.t > schedule.T) throw std::out_of_range("q_sample: t outside [1,T]");
    if (!z0.data.same_shape(eps.data))
        throw std::invalid_argument("q_sample: noise shape " + eps.data.shape_str() +
                                    " != latent shape " + z0.data.shape_str());
    double ab = schedule.alpha_bar(t.t);
    double a = std::sqrt(ab);
    double b = std::sqrt(1.0 - ab);
    Tensor out = z0.data;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = a * out.data[i] + b * eps.data.data[i];
    return LatentClip(std::move(out));
}

double denoise_loss(const Tensor& eps_true, const Tensor& eps_pred) {
    if (!eps_true.same_shape(eps_pred))
        throw std::invalid_argument("denoise_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < eps_true.data.size(); ++i) {
        double d = eps_true.data[i] - eps_pred.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(eps_true.data.size());
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double w) {
    if (!eps_uncond.same_shape(eps_cond))
        throw std::invalid_argument("cfg_combine: shape mismatch");
    if (w == 0.0) return eps_uncond;  // exact endpoints of the affine path
    if (w == 1.0) return eps_cond;
    Tensor out = eps_uncond;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += w * (eps_cond.data[i] - out.data[i]);
    return out;
}

std::vector<int> ddim_timesteps(int T, int steps) {
    if (steps < 1 || steps > T)
        throw std::invalid_argument("ddim_timesteps: steps must lie in [1,T]");
    std::vector<int> ts(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i)
        ts[static_cast<size_t>(i)] = T - (i * T) / steps;  // descending, starts at T
    return ts;
}

LatentClip ddim_sample(const EpsModel& model, const LatentClip& z_T,
                       const NoiseSchedule& schedule, int steps) {
    std::vector<int> ts = ddim_timesteps(schedule.T, steps);
    LatentClip z = z_T;
    for (size_t k = 0; k < ts.size(); ++k) {
        int t = ts[k];
        int t_prev = (k + 1 < ts.size()) ? ts[k + 1] : 0;
        Tensor eps = model(z, Timestep{t});
        if (!eps.all_finite())
            throw std::runtime_error("ddim_sample: non-finite model output at t=" +
                                     std::to_string(t));
        if (!eps.same_shape(z.data))
            throw std::invalid_argument("ddim_sample: model output shape mismatch at t=" +
                                        std::to_string(t));
        double ab = schedule.alpha_bar(t);
        double ab_prev = schedule.alpha_bar(t_prev);
        double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
        double pa = std::sqrt(ab_prev), pb = std::sqrt(1.0 - ab_prev);
        Tensor next = z.data;
        for (size_t i = 0; i < next.data.size(); ++i) {
            double z0_hat = (z.data.data[i] - sb * eps.data[i]) / sa;
            next.data[i] = pa * z0_hat + pb * eps.data[i];
        }
        z = LatentClip(std::move(next));
        if (!z.data.all_finite())
            throw std::runtime_error("ddim_sample: non-finite latent after t=" +
                                     std::to_string(t));
    }
    return z;
}

}  // namespace ccedit
