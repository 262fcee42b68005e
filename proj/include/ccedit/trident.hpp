#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccedit/checkpoint.hpp"
#include "ccedit/conditioning.hpp"
#include "ccedit/diffusion.hpp"
#include "ccedit/nn.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

// Denoiser architecture description. The UNet has two resolution levels
// (channels c0, c1), one residual conv block plus one attention block per
// level, a middle block, and text cross-attention inside spatial attention
// blocks. Temporal layers sit behind zero-initialized projections.
struct TridentConfig {
    int frames_per_run = 5;  // l = L + 1
    int c_latent = 4;
    int c0 = 32;
    int c1 = 64;
    int time_dim = 32;
    TextEncoderConfig text;
    double s_struct = 1.0;  // structure-injection scale default
    double s_app = 1.0;     // appearance-injection scale default
    std::string mode = "edit";  // "edit" | "interpolate"

    // Interpolation models run with a softer structure scale.
    static TridentConfig interpolation(TridentConfig base) {
        base.mode = "interpolate";
        base.s_struct = 0.5;
        return base;
    }

    nlohmann::json to_json() const;
    static TridentConfig from_json(const nlohmann::json& j);
};

// Three-branch denoiser: main text-to-video UNet with pseudo-3D blocks,
// structure branch injecting per-frame structure features into the decoder,
// appearance branch injecting reference-frame features into the encoder at
// the reference's own temporal index.
class TridentModel {
public:
    // Spatial UNet + text table only; the pretraining target that later
    // seeds the full model.
    static TridentModel create_t2i(const TridentConfig& cfg, int vocab_size, uint64_t seed);

    // Full model from a trained T2I checkpoint: spatial weights copied
    // bitwise, temporal layers randomly initialized with zeroed projections,
    // structure/appearance bodies copied from the main encoder (appearance
    // drops cross-attention). Freeze partition: spatial + structure + text
    // frozen, temporal + appearance trainable.
    static TridentModel init_from_t2i(const Checkpoint& t2i, const TridentConfig& cfg,
                                      uint64_t seed);

    static TridentModel from_checkpoint(const Checkpoint& ck);
    Checkpoint to_checkpoint() const;

    struct Conditions {
        std::vector<int> prompt_ids;                        // length n_tokens
        const StructureSequence* structure = nullptr;       // pixel-res maps, pooled inside
        std::vector<std::pair<Tensor, int>> app_latents;    // encoded reference (c,h,w) + index
        double s_struct = 1.0;
        double s_app = 1.0;
    };

    // Full trident epsilon prediction over an (l,c,h,w) latent clip.
    Tensor forward(const LatentClip& z_t, int t, const Conditions& cond) const;
    ad::Var forward_var(const ad::Var& z_t, int t, const Conditions& cond) const;

    // Bare per-frame spatial prediction (temporal and branch paths off);
    // the leading axis is an independent batch of frames. Available on both
    // T2I-only and full models.
    Tensor forward_t2i(const Tensor& z, int t, const std::vector<int>& prompt_ids) const;
    ad::Var forward_t2i_var(const ad::Var& z, int t, const std::vector<int>& prompt_ids) const;

    // Replace main.spatial.* from another trained T2I checkpoint; every
    // other branch stays bitwise untouched.
    void swap_spatial_weights(const Checkpoint& t2i);

    bool has_branches() const { return has_branches_; }
    const TridentConfig& config() const { return cfg_; }
    int vocab_size() const { return vocab_size_; }
    const TextEncoder& text_encoder() const { return text_; }
    nn::ParamStore& store() { return store_; }
    const nn::ParamStore& store() const { return store_; }

private:
    TridentModel() = default;
    void bind_all();
    ad::Var unet_fwd(const ad::Var& z, int t, const Conditions& cond, bool video);

    TridentConfig cfg_;
    int vocab_size_ = 0;
    bool has_branches_ = false;
    nn::ParamStore store_;
    TextEncoder text_;
};

// Average-pool a pixel-resolution structure map stack down to the latent
// grid: (l maps of h,w) -> (l, 1, h/f, w/f).
Tensor pool_structure_maps(const StructureSequence& seq, int h_latent, int w_latent);

}  // namespace ccedit
