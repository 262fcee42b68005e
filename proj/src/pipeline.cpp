#include "ccedit/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "ccedit/io.hpp"

namespace ccedit {

namespace {

// Rethrows any stage failure with the stage name prefixed.
template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

nlohmann::json EditRequest::params_json() const {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& [frame, idx] : reference.entries)
        refs.push_back({{"index", idx}, {"frame_hash", hash_tensor(frame.data)}});
    nlohmann::json j{{"prompt", prompt},
                     {"structure", to_string(structure)},
                     {"reference", refs},
                     {"guidance", guidance},
                     {"steps", steps},
                     {"alpha", alpha},
                     {"seed", seed},
                     {"source_hash", hash_clip(source)},
                     {"source_frames", source.length()},
                     {"fps", source.fps}};
    j["s_struct"] = s_struct ? nlohmann::json(*s_struct) : nlohmann::json(nullptr);
    j["s_app"] = s_app ? nlohmann::json(*s_app) : nlohmann::json(nullptr);
    return j;
}

uint64_t EditRequest::hash() const {
    std::string s = params_json().dump();
    return fnv1a(s.data(), s.size());
}

uint64_t store_hash(const nn::ParamStore& store) {
    uint64_t h = 1469598103934665603ull;
    for (const auto& name : store.names()) {
        h = fnv1a(name.data(), name.size(), h);
        const Tensor& t = store.get(name).value();
        h = fnv1a(t.data.data(), t.data.size() * sizeof(double), h);
    }
    return h;
}

LatentClip anchor_prior_noise(const LatentClip& eps_individual, const LatentFrame& latent_key,
                              double alpha) {
    if (alpha < 0) throw std::invalid_argument("anchor_prior_noise: alpha must be nonnegative");
    const Tensor& e = eps_individual.data;
    const Tensor& k = latent_key.data;
    if (e.dim(1) != k.dim(0) || e.dim(2) != k.dim(1) || e.dim(3) != k.dim(2))
        throw std::invalid_argument("anchor_prior_noise: key shape " + k.shape_str() +
                                    " does not match noise frames " + e.shape_str());
    if (alpha == 0.0) return eps_individual;
    Tensor out = e;
    int64_t per = k.size();
    for (int i = 0; i < e.dim(0); ++i)
        for (int64_t j = 0; j < per; ++j) out.data[i * per + j] += alpha * k.data[j];
    return LatentClip(std::move(out));
}

EditResult edit_clip(const EditRequest& req, const TridentModel& trident, const LatentCodec& codec,
                     const NoiseSchedule& schedule, const Vocabulary& vocab) {
    const TridentConfig& mcfg = trident.config();

    stage("validate", [&] {
        req.source.validate();
        if (req.source.length() != mcfg.frames_per_run)
            throw std::invalid_argument("source has " + std::to_string(req.source.length()) +
                                        " frames, model expects " +
                                        std::to_string(mcfg.frames_per_run));
        if (req.alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
        if (req.steps < 1 || req.steps > schedule.T)
            throw std::invalid_argument("steps must be in [1, T]");
        if (req.reference.entries.size() > 2)
            throw std::invalid_argument("at most two appearance references per run");
        for (const auto& [frame, idx] : req.reference.entries) {
            if (idx < 0 || idx >= mcfg.frames_per_run)
                throw std::invalid_argument("reference index " + std::to_string(idx) +
                                            " out of range");
            if (frame.height() != req.source.frames[0].height() ||
                frame.width() != req.source.frames[0].width())
                throw std::invalid_argument("reference frame size differs from source");
        }
    });

    double s_struct = req.s_struct.value_or(mcfg.s_struct);
    double s_app = req.s_app.value_or(mcfg.s_app);
    if (req.reference.entries.empty()) s_app = 0.0;

    StructureSequence structure;
    bool use_struct = s_struct != 0.0;
    if (use_struct)
        structure = stage("structure", [&] { return extract_structure(req.source, req.structure); });

    std::vector<std::pair<Tensor, int>> app_latents;
    stage("reference", [&] {
        for (const auto& [frame, idx] : req.reference.entries)
            app_latents.emplace_back(codec.encode(frame).data, idx);
    });

    const CodecConfig& ccfg = codec.config();
    int hz = req.source.frames[0].height() / ccfg.f;
    int wz = req.source.frames[0].width() / ccfg.f;

    LatentClip z_T = stage("noise", [&] {
        Rng rng(req.seed);
        Tensor eps({mcfg.frames_per_run, ccfg.c_latent, hz, wz});
        int64_t per = static_cast<int64_t>(ccfg.c_latent) * hz * wz;
        for (int i = 0; i < mcfg.frames_per_run; ++i) {
            Tensor f = rng.normal_tensor({ccfg.c_latent, hz, wz});
            std::copy(f.data.begin(), f.data.end(), eps.data.begin() + i * per);
        }
        LatentClip noise(std::move(eps));
        if (req.reference.entries.empty() || req.alpha == 0.0) return noise;
        // Interpolation runs carry two references; the anchor is their mean.
        Tensor key = app_latents[0].first;
        for (size_t r = 1; r < app_latents.size(); ++r) key = key + app_latents[r].first;
        key = (1.0 / static_cast<double>(app_latents.size())) * key;
        return anchor_prior_noise(noise, LatentFrame(std::move(key)), req.alpha);
    });

    LatentClip z0 = stage("sample", [&] {
        TridentModel::Conditions cond;
        cond.prompt_ids = trident.text_encoder().tokenize(req.prompt, vocab);
        cond.structure = use_struct ? &structure : nullptr;
        cond.app_latents = app_latents;
        cond.s_struct = s_struct;
        cond.s_app = s_app;
        TridentModel::Conditions uncond = cond;
        uncond.prompt_ids = trident.text_encoder().uncond_ids();
        double w = req.guidance;
        EpsModel model = [&](const LatentClip& z, Timestep t) {
            if (w == 1.0) return trident.forward(z, t.t, cond);
            if (w == 0.0) return trident.forward(z, t.t, uncond);
            Tensor eps_u = trident.forward(z, t.t, uncond);
            Tensor eps_c = trident.forward(z, t.t, cond);
            return cfg_combine(eps_u, eps_c, w);
        };
        return ddim_sample(model, z_T, schedule, req.steps);
    });

    VideoClip edited = stage("decode", [&] { return codec.decode_clip(z0, req.source.fps); });

    EditResult res;
    res.edited = std::move(edited);
    res.edited_latents = std::move(z0);
    res.provenance = {{"request", req.params_json()},
                      {"request_hash", req.hash()},
                      {"seed", req.seed},
                      {"model_hash", store_hash(trident.store())},
                      {"codec_hash", store_hash(codec.store())},
                      {"schedule_T", schedule.T}};
    return res;
}

}  // namespace ccedit
