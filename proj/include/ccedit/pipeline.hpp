#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccedit/conditioning.hpp"
#include "ccedit/diffusion.hpp"
#include "ccedit/latent_codec.hpp"
#include "ccedit/trident.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

// One editing run: a frames_per_run-length source clip plus everything
// needed to condition and reproduce the edit.
struct EditRequest {
    VideoClip source;
    std::vector<std::string> prompt;
    StructureKind structure = StructureKind::kEdge;
    AppearanceReference reference;  // empty entries = unconditioned appearance
    std::optional<double> s_struct; // default: model config value
    std::optional<double> s_app;
    double guidance = 9.0;
    int steps = 30;
    double alpha = 0.03;  // anchor prior strength
    uint64_t seed = 0;

    // Parameter record with content hashes standing in for pixel payloads.
    nlohmann::json params_json() const;
    uint64_t hash() const;
};

struct EditResult {
    VideoClip edited;
    LatentClip edited_latents;
    nlohmann::json provenance;  // request params, request hash, seed, checkpoint ids
};

// Start-noise shaping: every frame gets the SAME alpha-scaled key latent
// added on top of its own unit-Gaussian noise. alpha = 0 returns the input
// unchanged (bitwise). Throws on spatial shape mismatch.
LatentClip anchor_prior_noise(const LatentClip& eps_individual, const LatentFrame& latent_key,
                              double alpha);

// Content hash of every named array in a store; recorded as checkpoint id.
uint64_t store_hash(const nn::ParamStore& store);

// Full single-run edit: extract structure, encode reference(s), draw seeded
// frame-major noise, apply the anchor prior (skipped when no reference or
// alpha = 0), run guided DDIM through the trident model, decode. Stage
// failures rethrow prefixed with the stage name. Deterministic given seed.
EditResult edit_clip(const EditRequest& req, const TridentModel& trident, const LatentCodec& codec,
                     const NoiseSchedule& schedule, const Vocabulary& vocab);

}  // namespace ccedit
