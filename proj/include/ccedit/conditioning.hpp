#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccedit/autodiff.hpp"
#include "ccedit/nn.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

// Token list, line-ordered = id order. Row 0 is the unconditional token,
// row 1 the padding token; the rest enumerate the synthetic corpus grammar.
class Vocabulary {
public:
    static constexpr int kUncond = 0;
    static constexpr int kPad = 1;

    static Vocabulary synthetic_default();
    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    explicit Vocabulary(std::vector<std::string> tokens);
    Vocabulary() = default;

    int id(const std::string& token) const;  // throws on unknown token
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }

private:
    std::vector<std::string> tokens_;
};

struct PromptEmbedding {
    std::vector<int> tokens;  // padded/truncated to n_tokens
    Tensor embedding;         // (n_tokens, d_text)
};

struct TextEncoderConfig {
    int n_tokens = 6;
    int d_text = 16;
};

// Learned lookup table plus fixed sinusoidal positional encoding. Trained
// jointly with T2I pretraining, frozen afterwards.
class TextEncoder {
public:
    static TextEncoder create(nn::ParamStore& ps, int vocab_size, TextEncoderConfig cfg,
                              Rng& rng);
    static TextEncoder bind(nn::ParamStore& ps, TextEncoderConfig cfg);

    // Pads with kPad / truncates to n_tokens; the empty prompt becomes the
    // dedicated unconditional sequence.
    std::vector<int> tokenize(const std::vector<std::string>& words, const Vocabulary& vocab) const;
    std::vector<int> uncond_ids() const;

    ad::Var embed_ids(const std::vector<int>& ids) const;  // differentiable
    PromptEmbedding embed(const std::vector<std::string>& words, const Vocabulary& vocab) const;

    const TextEncoderConfig& config() const { return cfg_; }

private:
    TextEncoderConfig cfg_;
    ad::Var table_;
    Tensor positional_;  // (n_tokens, d_text), constant
};

enum class StructureKind { kEdge, kDepthProxy };

StructureKind structure_kind_from_string(const std::string& s);
std::string to_string(StructureKind k);

struct StructureSequence {
    std::vector<Tensor> maps;  // one (h, w) map per frame, values in [0,1]
    StructureKind kind = StructureKind::kEdge;
};

// Per-frame structure extraction: edge = normalized Sobel gradient magnitude
// of grayscale; depth_proxy = box-blurred luminance. Map i depends only on
// frame i.
StructureSequence extract_structure(const VideoClip& clip, StructureKind kind);
Tensor extract_structure_frame(const PixelFrame& frame, StructureKind kind);

enum class ReferenceMode { kEdit, kInterpolate };

// Edited keyframe(s) with their temporal indices inside a run.
struct AppearanceReference {
    std::vector<std::pair<PixelFrame, int>> entries;
};

// edit mode: exactly one frame; interpolate mode: exactly two frames at the
// run endpoints {0, l-1}. Indices must be strictly increasing and in range.
AppearanceReference make_reference(const std::vector<PixelFrame>& frames,
                                   const std::vector<int>& indices, ReferenceMode mode,
                                   int run_length);

// Center-frame default for edit mode: floor(l/2).
int default_reference_index(int run_length);

}  // namespace ccedit
