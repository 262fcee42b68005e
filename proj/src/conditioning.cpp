#include "ccedit/conditioning.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace ccedit {

namespace ad = ccedit::ad;

// The synthetic generator's attribute grammar; see training.cpp.
Vocabulary Vocabulary::synthetic_default() {
    return Vocabulary({
        "<uncond>", "<pad>",
        // shapes
        "circle", "square", "triangle",
        // colors
        "red", "green", "blue", "yellow",
        // motions
        "static", "linear", "circular",
        // backgrounds
        "dark", "light", "gray",
    });
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2 || tokens_[0] != "<uncond>" || tokens_[1] != "<pad>")
        throw std::invalid_argument("vocabulary: rows 0/1 must be <uncond>/<pad>");
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("vocabulary: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("vocabulary: cannot write " + path);
    for (const auto& t : tokens_) os << t << "\n";
}

int Vocabulary::id(const std::string& token) const {
    for (size_t i = 0; i < tokens_.size(); ++i)
        if (tokens_[i] == token) return static_cast<int>(i);
    throw std::out_of_range("vocabulary: unknown token '" + token + "'");
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("vocabulary: id out of range");
    return tokens_[static_cast<size_t>(id)];
}

namespace {

Tensor positional_encoding(int n_tokens, int d) {
    Tensor p({n_tokens, d});
    for (int i = 0; i < n_tokens; ++i)
        for (int j = 0; j < d; ++j) {
            double freq = std::pow(10000.0, -2.0 * (j / 2) / static_cast<double>(d));
            p.at2(i, j) = (j % 2 == 0) ? std::sin(i * freq) : std::cos(i * freq);
        }
    return p;
}

}  // namespace

TextEncoder TextEncoder::create(nn::ParamStore& ps, int vocab_size, TextEncoderConfig cfg,
                                Rng& rng) {
    TextEncoder e;
    e.cfg_ = cfg;
    Tensor init = rng.normal_tensor({vocab_size, cfg.d_text});
    for (double& v : init.data) v *= 0.5;
    e.table_ = ps.create("text.table", std::move(init));
    e.positional_ = positional_encoding(cfg.n_tokens, cfg.d_text);
    return e;
}

TextEncoder TextEncoder::bind(nn::ParamStore& ps, TextEncoderConfig cfg) {
    TextEncoder e;
    e.cfg_ = cfg;
    e.table_ = ps.get("text.table");
    e.positional_ = positional_encoding(cfg.n_tokens, cfg.d_text);
    return e;
}

std::vector<int> TextEncoder::tokenize(const std::vector<std::string>& words,
                                       const Vocabulary& vocab) const {
    std::vector<int> ids;
    if (words.empty()) {
        ids.push_back(Vocabulary::kUncond);
    } else {
        for (const auto& w : words) ids.push_back(vocab.id(w));
    }
    ids.resize(static_cast<size_t>(cfg_.n_tokens), Vocabulary::kPad);
    return ids;
}

std::vector<int> TextEncoder::uncond_ids() const {
    std::vector<int> ids(static_cast<size_t>(cfg_.n_tokens), Vocabulary::kPad);
    ids[0] = Vocabulary::kUncond;
    return ids;
}

ad::Var TextEncoder::embed_ids(const std::vector<int>& ids) const {
    if (static_cast<int>(ids.size()) != cfg_.n_tokens)
        throw std::invalid_argument("embed_ids: expected " + std::to_string(cfg_.n_tokens) +
                                    " token ids");
    return ad::add(ad::embedding_rows(table_, ids), ad::constant(positional_));
}

PromptEmbedding TextEncoder::embed(const std::vector<std::string>& words,
                                   const Vocabulary& vocab) const {
    PromptEmbedding p;
    p.tokens = tokenize(words, vocab);
    p.embedding = embed_ids(p.tokens).value();
    return p;
}

StructureKind structure_kind_from_string(const std::string& s) {
    if (s == "edge") return StructureKind::kEdge;
    if (s == "depth_proxy") return StructureKind::kDepthProxy;
    throw std::invalid_argument("unsupported structure kind '" + s + "'");
}

std::string to_string(StructureKind k) {
    return k == StructureKind::kEdge ? "edge" : "depth_proxy";
}

namespace {

// Grayscale in [0,1] from a [-1,1] RGB frame.
Tensor luminance(const PixelFrame& f) {
    int h = f.height(), w = f.width();
    Tensor g({h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double m = (f.data.at3(0, i, j) + f.data.at3(1, i, j) + f.data.at3(2, i, j)) / 3.0;
            g.at2(i, j) = (m + 1.0) * 0.5;
        }
    return g;
}

double clamped(const Tensor& g, int i, int j) {
    int h = g.dim(0), w = g.dim(1);
    i = std::min(h - 1, std::max(0, i));
    j = std::min(w - 1, std::max(0, j));
    return g.at2(i, j);
}

Tensor sobel_edges(const Tensor& g) {
    int h = g.dim(0), w = g.dim(1);
    Tensor out({h, w});
    const double norm = 1.0 / (4.0 * std::sqrt(2.0));  // max |grad| for unit range
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            // Sums of row/column differences so flat regions give exact zeros.
            double gx = (clamped(g, i - 1, j + 1) - clamped(g, i - 1, j - 1)) +
                        2 * (clamped(g, i, j + 1) - clamped(g, i, j - 1)) +
                        (clamped(g, i + 1, j + 1) - clamped(g, i + 1, j - 1));
            double gy = (clamped(g, i + 1, j - 1) - clamped(g, i - 1, j - 1)) +
                        2 * (clamped(g, i + 1, j) - clamped(g, i - 1, j)) +
                        (clamped(g, i + 1, j + 1) - clamped(g, i - 1, j + 1));
            out.at2(i, j) = std::min(1.0, std::sqrt(gx * gx + gy * gy) * norm);
        }
    return out;
}

Tensor box_blur(const Tensor& g) {
    int h = g.dim(0), w = g.dim(1);
    Tensor out({h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) acc += clamped(g, i + di, j + dj);
            out.at2(i, j) = acc / 9.0;
        }
    return out;
}

}  // namespace

Tensor extract_structure_frame(const PixelFrame& frame, StructureKind kind) {
    Tensor g = luminance(frame);
    if (kind == StructureKind::kEdge) return sobel_edges(g);
    return box_blur(box_blur(g));
}

StructureSequence extract_structure(const VideoClip& clip, StructureKind kind) {
    clip.validate();
    StructureSequence seq;
    seq.kind = kind;
    seq.maps.reserve(clip.frames.size());
    for (const auto& f : clip.frames) seq.maps.push_back(extract_structure_frame(f, kind));
    return seq;
}

int default_reference_index(int run_length) { return run_length / 2; }

AppearanceReference make_reference(const std::vector<PixelFrame>& frames,
                                   const std::vector<int>& indices, ReferenceMode mode,
                                   int run_length) {
    if (frames.size() != indices.size())
        throw std::invalid_argument("make_reference: frames/indices count mismatch");
    if (mode == ReferenceMode::kEdit && frames.size() != 1)
        throw std::invalid_argument("make_reference: edit mode takes exactly 1 frame, got " +
                                    std::to_string(frames.size()));
    if (mode == ReferenceMode::kInterpolate) {
        if (frames.size() != 2)
            throw std::invalid_argument("make_reference: interpolate mode takes exactly 2 frames");
        if (indices[0] != 0 || indices[1] != run_length - 1)
            throw std::invalid_argument(
                "make_reference: interpolate references must sit at run endpoints {0, l-1}");
    }
    int prev = -1;
    for (int idx : indices) {
        if (idx < 0 || idx >= run_length)
            throw std::out_of_range("make_reference: index " + std::to_string(idx) +
                                    " outside run [0," + std::to_string(run_length) + ")");
        if (idx <= prev)
            throw std::invalid_argument("make_reference: indices must be strictly increasing");
        prev = idx;
    }
    AppearanceReference ref;
    for (size_t i = 0; i < frames.size(); ++i) ref.entries.emplace_back(frames[i], indices[i]);
    return ref;
}

}  // namespace ccedit
