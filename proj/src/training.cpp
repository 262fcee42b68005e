#include "ccedit/training.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ccedit {

namespace ad = ccedit::ad;

namespace {

struct Rgb {
    double r, g, b;
};

Rgb color_value(const std::string& c) {
    if (c == "red") return {0.9, -0.7, -0.7};
    if (c == "green") return {-0.7, 0.9, -0.7};
    if (c == "blue") return {-0.7, -0.7, 0.9};
    return {0.9, 0.9, -0.7};  // yellow
}

double background_value(const std::string& b) {
    if (b == "dark") return -0.6;
    if (b == "light") return 0.6;
    return 0.0;  // gray
}

bool inside_shape(const std::string& shape, int i, int j, int ci, int cj, int r) {
    int di = i - ci, dj = j - cj;
    if (shape == "circle") return di * di + dj * dj <= r * r;
    if (shape == "square") return std::abs(di) <= r && std::abs(dj) <= r;
    // triangle: downward-narrowing wedge
    return di >= -r && di <= r && std::abs(dj) <= (r - di) / 2 + r / 2;
}

PixelFrame render_frame(int canvas, const std::string& shape, Rgb col, double bg, int ci,
                        int cj, int r) {
    Tensor t({3, canvas, canvas});
    for (int i = 0; i < canvas; ++i)
        for (int j = 0; j < canvas; ++j) {
            bool in = inside_shape(shape, i, j, ci, cj, r);
            t.at3(0, i, j) = in ? col.r : bg;
            t.at3(1, i, j) = in ? col.g : bg;
            t.at3(2, i, j) = in ? col.b : bg;
        }
    return PixelFrame(std::move(t));
}

}  // namespace

std::vector<SyntheticClip> generate_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.canvas < 16)
        throw std::invalid_argument("synthetic corpus: canvas " + std::to_string(spec.canvas) +
                                    " too small for the shape grammar (needs >= 16)");
    if (spec.frames < 1 || spec.corpus_size < 1)
        throw std::invalid_argument("synthetic corpus: frames and corpus_size must be positive");

    const std::vector<std::string> shapes = {"circle", "square", "triangle"};
    const std::vector<std::string> colors = {"red", "green", "blue", "yellow"};
    const std::vector<std::string> motions = {"static", "linear", "circular"};
    const std::vector<std::string> bgs = {"dark", "light", "gray"};

    Rng rng(spec.seed);
    std::vector<SyntheticClip> corpus;
    corpus.reserve(static_cast<size_t>(spec.corpus_size));
    int r = spec.canvas / 6;
    for (int n = 0; n < spec.corpus_size; ++n) {
        const std::string& shape = shapes[static_cast<size_t>(rng.uniform_int(0, 2))];
        const std::string& color = colors[static_cast<size_t>(rng.uniform_int(0, 3))];
        const std::string& motion = motions[static_cast<size_t>(rng.uniform_int(0, 2))];
        const std::string& bg = bgs[static_cast<size_t>(rng.uniform_int(0, 2))];

        // Start position keeps the shape inside the canvas for every frame:
        // circular motion wanders +-3 pixels, linear moves +1 per frame.
        int max_dx = std::max(3, spec.frames - 1);
        int ilo = r + 4, ihi = spec.canvas - 1 - (r + 4);
        int jlo = r + 4, jhi = spec.canvas - 1 - (r + max_dx + 1);
        if (ihi < ilo || jhi < jlo)
            throw std::invalid_argument("synthetic corpus: canvas too small for " +
                                        std::to_string(spec.frames) + " frames of motion");
        int ci = rng.uniform_int(ilo, ihi);
        int cj = rng.uniform_int(jlo, jhi);

        SyntheticClip sc;
        sc.tokens = {color, shape, motion, bg};
        sc.clip.fps = spec.fps;
        Rgb col = color_value(color);
        double bgv = background_value(bg);
        for (int f = 0; f < spec.frames; ++f) {
            int fi = ci, fj = cj;
            if (motion == "linear") {
                fj = cj + f;  // one pixel per frame along +x
            } else if (motion == "circular") {
                double ang = 2.0 * M_PI * f / std::max(4, spec.frames);
                fi = ci + static_cast<int>(std::lround(3.0 * std::sin(ang)));
                fj = cj + static_cast<int>(std::lround(3.0 * std::cos(ang)));
            }
            sc.clip.frames.push_back(render_frame(spec.canvas, shape, col, bgv, fi, fj, r));
        }
        corpus.push_back(std::move(sc));
    }
    return corpus;
}

PixelFrame render_prompt_exemplar(const std::vector<std::string>& tokens, int canvas) {
    if (canvas < 16)
        throw std::invalid_argument("render_prompt_exemplar: canvas too small (needs >= 16)");
    std::string shape = "circle", color = "red", bg = "gray";
    for (const auto& t : tokens) {
        if (t == "circle" || t == "square" || t == "triangle") shape = t;
        if (t == "red" || t == "green" || t == "blue" || t == "yellow") color = t;
        if (t == "dark" || t == "light" || t == "gray") bg = t;
    }
    int c = canvas / 2;
    return render_frame(canvas, shape, color_value(color), background_value(bg), c, c, canvas / 6);
}

void append_training_log(const std::string& path, const std::vector<StageLogEntry>& entries) {
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("training log: cannot open " + path);
    for (const auto& e : entries)
        os << "step=" << e.step << " stage=" << e.stage << " loss=" << e.loss << " lr=" << e.lr
           << " seed=" << e.seed << "\n";
}

namespace {

struct Optim {
    nn::Sgd sgd;
    nn::Adam adam;
    bool use_adam;

    Optim(const TrainConfig& cfg) : use_adam(cfg.optimizer == "adam") {
        if (!use_adam && cfg.optimizer != "sgd")
            throw std::invalid_argument("training: unknown optimizer " + cfg.optimizer);
        sgd.lr = cfg.lr;
        adam.lr = cfg.lr;
    }
    void step(nn::ParamStore& ps) {
        if (use_adam)
            adam.step(ps);
        else
            sgd.step(ps);
    }
};

// Latents and structure maps are deterministic per clip; cache them.
struct ClipCache {
    const std::vector<SyntheticClip>& corpus;
    const LatentCodec& codec;
    std::vector<LatentClip> latents;
    std::vector<StructureSequence> structures;
    std::vector<bool> ready;

    ClipCache(const std::vector<SyntheticClip>& c, const LatentCodec& cd)
        : corpus(c), codec(cd), latents(c.size()), structures(c.size()), ready(c.size(), false) {}

    void ensure(size_t i) {
        if (ready[i]) return;
        latents[i] = codec.encode_clip(corpus[i].clip);
        structures[i] = extract_structure(corpus[i].clip, StructureKind::kEdge);
        ready[i] = true;
    }
};

double diffusion_step(TridentModel& model, const LatentClip& z0, int t,
                      const NoiseSchedule& schedule, const TridentModel::Conditions& cond,
                      bool video, Rng& rng, Optim& opt, double lr) {
    LatentClip eps(rng.normal_tensor(z0.data.shape));
    LatentClip z_t = q_sample(z0, Timestep{t}, eps, schedule);
    ad::Var pred = video ? model.forward_var(ad::constant(z_t.data), t, cond)
                         : model.forward_t2i_var(ad::constant(z_t.data), t, cond.prompt_ids);
    ad::Var loss = ad::mse_loss(pred, eps.data);
    double lv = loss.value().data[0];
    if (!std::isfinite(lv)) throw std::runtime_error("training: non-finite loss");
    model.store().zero_grad();
    loss.backward();
    if (lr != 0.0) opt.step(model.store());
    return lv;
}

}  // namespace

TridentModel pretrain_t2i(const std::vector<SyntheticClip>& corpus, const LatentCodec& codec,
                          const Vocabulary& vocab, const TridentConfig& mcfg,
                          const TrainConfig& cfg, std::vector<StageLogEntry>* log) {
    if (corpus.empty()) throw std::invalid_argument("pretrain_t2i: empty corpus");
    TridentModel model = TridentModel::create_t2i(mcfg, vocab.size(), cfg.seed);
    NoiseSchedule schedule = default_schedule(cfg.T);
    ClipCache cache(corpus, codec);
    Rng rng(cfg.seed + 1);
    Optim opt(cfg);
    for (int step = 0; step < cfg.steps; ++step) {
        size_t ci = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(corpus.size()) - 1));
        cache.ensure(ci);
        TridentModel::Conditions cond;
        cond.prompt_ids = rng.uniform() < cfg.uncond_prob
                              ? model.text_encoder().uncond_ids()
                              : model.text_encoder().tokenize(corpus[ci].tokens, vocab);
        int t = rng.uniform_int(1, cfg.T);
        double lv = diffusion_step(model, cache.latents[ci], t, schedule, cond, /*video=*/false,
                                   rng, opt, cfg.lr);
        if (log && (step % cfg.log_every == 0 || step == cfg.steps - 1))
            log->push_back({step, "t2i", lv, cfg.lr, cfg.seed});
    }
    return model;
}

TridentModel pretrain_structure_branch(const std::vector<SyntheticClip>& corpus,
                                       const LatentCodec& codec, const Vocabulary& vocab,
                                       const Checkpoint& t2i, const TridentConfig& mcfg,
                                       const TrainConfig& cfg,
                                       std::vector<StageLogEntry>* log) {
    if (corpus.empty()) throw std::invalid_argument("pretrain_structure_branch: empty corpus");
    TridentModel model = TridentModel::init_from_t2i(t2i, mcfg, cfg.seed);
    // Stage B trains the structure branch alone.
    model.store().freeze_prefix("main.temporal.");
    model.store().freeze_prefix("appearance.");
    model.store().freeze_prefix("structure.", false);

    NoiseSchedule schedule = default_schedule(cfg.T);
    ClipCache cache(corpus, codec);
    Rng rng(cfg.seed + 2);
    Optim opt(cfg);
    for (int step = 0; step < cfg.steps; ++step) {
        size_t ci = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(corpus.size()) - 1));
        cache.ensure(ci);
        TridentModel::Conditions cond;
        cond.prompt_ids = model.text_encoder().tokenize(corpus[ci].tokens, vocab);
        cond.structure = &cache.structures[ci];
        cond.s_struct = 1.0;
        cond.s_app = 0.0;
        int t = rng.uniform_int(1, cfg.T);
        double lv = diffusion_step(model, cache.latents[ci], t, schedule, cond, /*video=*/true,
                                   rng, opt, cfg.lr);
        if (log && (step % cfg.log_every == 0 || step == cfg.steps - 1))
            log->push_back({step, "structure", lv, cfg.lr, cfg.seed});
    }
    // Permanent freeze; restore the temporal/appearance training partition.
    model.store().freeze_prefix("structure.");
    model.store().freeze_prefix("main.temporal.", false);
    model.store().freeze_prefix("appearance.", false);
    return model;
}

void train_temporal_appearance(const std::vector<SyntheticClip>& corpus,
                               const LatentCodec& codec, const Vocabulary& vocab,
                               TridentModel& model, const TrainConfig& cfg,
                               std::vector<StageLogEntry>* log) {
    if (corpus.empty()) throw std::invalid_argument("train_temporal_appearance: empty corpus");
    if (!model.has_branches())
        throw std::invalid_argument("train_temporal_appearance: model has no branches");
    bool interp = cfg.stage == "interpolation";
    double s_struct = interp ? 0.5 : 1.0;

    NoiseSchedule schedule = default_schedule(cfg.T);
    ClipCache cache(corpus, codec);
    Rng rng(cfg.seed + 3);
    Optim opt(cfg);
    const std::string stage_name = interp ? "interpolation" : "temporal_appearance";
    for (int step = 0; step < cfg.steps; ++step) {
        size_t ci = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(corpus.size()) - 1));
        cache.ensure(ci);
        int l = cache.latents[ci].length();
        TridentModel::Conditions cond;
        cond.prompt_ids = model.text_encoder().tokenize(corpus[ci].tokens, vocab);
        cond.structure = &cache.structures[ci];
        cond.s_struct = s_struct;
        cond.s_app = 1.0;
        if (interp) {
            cond.app_latents = {{cache.latents[ci].frame(0).data, 0},
                                {cache.latents[ci].frame(l - 1).data, l - 1}};
        } else {
            int j = default_reference_index(l);
            cond.app_latents = {{cache.latents[ci].frame(j).data, j}};
        }
        int t = rng.uniform_int(1, cfg.T);
        double lv = diffusion_step(model, cache.latents[ci], t, schedule, cond, /*video=*/true,
                                   rng, opt, cfg.lr);
        if (log && (step % cfg.log_every == 0 || step == cfg.steps - 1))
            log->push_back({step, stage_name, lv, cfg.lr, cfg.seed});
    }
}

}  // namespace ccedit
