#pragma once

#include <string>
#include <vector>

#include "ccedit/conditioning.hpp"
#include "ccedit/diffusion.hpp"
#include "ccedit/latent_codec.hpp"
#include "ccedit/trident.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

// Moving-shapes clip generator. Every clip is fully described by its four
// attribute tokens (color, shape, motion, background), which double as the
// training prompt.
struct SyntheticSpec {
    int canvas = 32;       // square frames, divisible by the codec factor
    int frames = 5;        // clip length l
    double fps = 4.0;
    int corpus_size = 512;
    uint64_t seed = 0;
};

struct SyntheticClip {
    VideoClip clip;
    std::vector<std::string> tokens;  // color, shape, motion, background
};

std::vector<SyntheticClip> generate_synthetic_corpus(const SyntheticSpec& spec);

// Canonical still frame for a prompt: the named shape/color/background
// rendered centered (motion ignored). Serves as the text-side exemplar for
// the toy joint embedder.
PixelFrame render_prompt_exemplar(const std::vector<std::string>& tokens, int canvas);

// Desk-scale diffusion constants used by all training stages. The ramp
// starts at 0.02 so even the smallest timestep carries recoverable noise
// at T = 50 (a 1e-4 floor is tuned for T = 1000).
inline NoiseSchedule default_schedule(int T) { return build_schedule(T, 0.02, 0.3); }

struct TrainConfig {
    std::string stage;  // "t2i" | "structure" | "temporal_appearance" | "interpolation"
    double lr = 1e-3;
    int steps = 200;
    int T = 50;
    uint64_t seed = 0;
    std::string optimizer = "adam";  // "sgd" is the plain baseline
    double uncond_prob = 0.1;        // classifier-free dropout during T2I pretraining
    int log_every = 10;
};

struct StageLogEntry {
    int step;
    std::string stage;
    double loss;
    double lr;
    uint64_t seed;
};

// Line-oriented append: "step=<n> stage=<s> loss=<v> lr=<v> seed=<n>".
void append_training_log(const std::string& path, const std::vector<StageLogEntry>& entries);

// Stage A: spatial UNet + text table on single frames (the clip's frames form
// the batch so they share one prompt).
TridentModel pretrain_t2i(const std::vector<SyntheticClip>& corpus, const LatentCodec& codec,
                          const Vocabulary& vocab, const TridentConfig& mcfg,
                          const TrainConfig& cfg, std::vector<StageLogEntry>* log = nullptr);

// Stage B: structure branch on top of the frozen T2I weights; the branch is
// frozen permanently when the stage finishes and the usual partition
// (temporal + appearance trainable) is restored.
TridentModel pretrain_structure_branch(const std::vector<SyntheticClip>& corpus,
                                       const LatentCodec& codec, const Vocabulary& vocab,
                                       const Checkpoint& t2i, const TridentConfig& mcfg,
                                       const TrainConfig& cfg,
                                       std::vector<StageLogEntry>* log = nullptr);

// Stage C (and the interpolation variant): temporal and appearance parameters
// under the full conditioning. Edit stage references the clip's own center
// frame; interpolation references both endpoints with s_struct = 0.5.
void train_temporal_appearance(const std::vector<SyntheticClip>& corpus,
                               const LatentCodec& codec, const Vocabulary& vocab,
                               TridentModel& model, const TrainConfig& cfg,
                               std::vector<StageLogEntry>* log = nullptr);

}  // namespace ccedit
