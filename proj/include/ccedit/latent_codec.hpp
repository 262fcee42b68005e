#pragma once

#include <optional>
#include <vector>

#include "ccedit/checkpoint.hpp"
#include "ccedit/nn.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

struct CodecConfig {
    int f = 4;         // spatial downsample factor (two stride-2 stages)
    int c_latent = 4;  // latent channels
    int width = 16;    // hidden channel width
    uint64_t seed = 0;

    nlohmann::json to_json() const;
    static CodecConfig from_json(const nlohmann::json& j);
};

// Toy perceptual compression model: deterministic encoder E and decoder D
// bridging pixel space and the latent space the diffusion model works in.
// Decoder output is clamped to [-1, 1].
class LatentCodec {
public:
    static LatentCodec create(const CodecConfig& cfg);
    static LatentCodec from_checkpoint(const Checkpoint& ck);
    Checkpoint to_checkpoint() const;

    LatentFrame encode(const PixelFrame& frame) const;
    PixelFrame decode(const LatentFrame& latent) const;
    LatentClip encode_clip(const VideoClip& clip) const;
    VideoClip decode_clip(const LatentClip& clip, double fps) const;

    // Differentiable paths over (l,3,h,w) / (l,c,hz,wz) batches.
    ad::Var encode_var(const ad::Var& x) const;
    ad::Var decode_var(const ad::Var& z) const;

    const CodecConfig& config() const { return cfg_; }
    nn::ParamStore& store() { return store_; }
    const nn::ParamStore& store() const { return store_; }

private:
    LatentCodec() = default;
    void bind_layers();

    CodecConfig cfg_;
    nn::ParamStore store_;
    nn::Conv2d enc_in_, enc_d1_, enc_d2_, enc_out_;
    nn::Conv2d dec_in_, dec_u1_, dec_u2_, dec_out_;
};

struct CodecTrainConfig {
    int steps = 500;
    int batch = 8;
    double lr = 1e-3;
    uint64_t seed = 0;
    std::string optimizer = "adam";  // "sgd" | "adam"
    int log_every = 25;
};

struct TrainLogEntry {
    int step;
    double loss;
};

// Pixel-wise squared-error training of the codec. Throws on non-finite loss.
LatentCodec train_codec(const std::vector<PixelFrame>& dataset, const CodecConfig& cfg,
                        const CodecTrainConfig& train,
                        std::vector<TrainLogEntry>* log = nullptr);

}  // namespace ccedit
