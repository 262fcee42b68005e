#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccedit/latent_codec.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

struct EditSpec {
    std::string edit_type;  // StyleChange | ObjectChange | BackgroundChange | CompoundChange
    std::string target_prompt;
    int fantasy_level = 1;  // 1..3
};

// One benchmark video: its rating attributes plus exactly one edit of each
// of the four types.
struct BalanceCCRecord {
    std::string id;
    std::string path;
    std::string category;  // Human | Animal | Object | Landscape
    std::string description;
    int scene_complexity = 1;  // 1..3
    int camera_motion = 1;
    int object_motion = 1;
    std::vector<EditSpec> edits;
};

struct ValidationIssue {
    std::string record_id;
    std::string field;
    std::string message;
};

// Validation is total: every record either passes or contributes its full
// list of violations.
struct ValidationReport {
    std::vector<BalanceCCRecord> records;
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

ValidationReport validate_records(const nlohmann::json& file);
ValidationReport load_and_validate(const std::string& path);

nlohmann::json records_to_json(const std::vector<BalanceCCRecord>& records);

// Per-attribute histograms (counts and percentages). Throws on empty input.
struct CorpusStats {
    std::map<std::string, std::map<std::string, int>> counts;
    std::map<std::string, std::map<std::string, double>> percentages;

    std::string table() const;  // flat tab-separated table
};

CorpusStats corpus_stats(const std::vector<BalanceCCRecord>& records);

// Frame (and optionally text) to unit-L2-norm vectors; deterministic.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Tensor embed_frame(const PixelFrame& frame) const = 0;
    virtual bool supports_text() const { return false; }
    virtual Tensor embed_text(const std::vector<std::string>& prompt) const;
};

// Shipped joint embedder: frames map to mean-pooled codec latents, unit
// normalized; a prompt maps to the embedding of its rendered exemplar
// frame, so both sides share one space.
class ToyJointEmbedder : public Embedder {
public:
    ToyJointEmbedder(const LatentCodec& codec, int canvas);
    Tensor embed_frame(const PixelFrame& frame) const override;
    bool supports_text() const override { return true; }
    Tensor embed_text(const std::vector<std::string>& prompt) const override;

private:
    const LatentCodec& codec_;
    int canvas_;
};

struct MetricsReport {
    double tem_con = 0.0;
    double tex_ali = 0.0;
    std::vector<double> pair_detail;  // successive-pair cosines

    nlohmann::json to_json() const;
    std::string table() const;
};

// Mean cosine similarity over successive frame pairs (i, i+1). Exactly 1.0
// when all embeddings coincide bitwise. Throws on clips shorter than 2.
double temporal_consistency(const VideoClip& clip, const Embedder& embedder,
                            std::vector<double>* pair_detail = nullptr);

// Mean over frames of cosine(frame embedding, prompt embedding). Throws if
// the embedder has no text side.
double text_alignment(const VideoClip& clip, const std::vector<std::string>& prompt,
                      const Embedder& embedder);

MetricsReport evaluate_clip(const VideoClip& clip, const std::vector<std::string>& prompt,
                            const Embedder& embedder);

// Structural fidelity: mean over frames of the cosine overlap between the
// two clips' edge maps. In [0,1] up to rounding; 1.0 for identical edges.
double edge_overlap(const VideoClip& a, const VideoClip& b);

}  // namespace ccedit
