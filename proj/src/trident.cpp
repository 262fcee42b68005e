#include "ccedit/trident.hpp"

#include <cmath>
#include <stdexcept>

namespace ccedit {

namespace ad = ccedit::ad;

nlohmann::json TridentConfig::to_json() const {
    return {{"frames_per_run", frames_per_run},
            {"c_latent", c_latent},
            {"c0", c0},
            {"c1", c1},
            {"time_dim", time_dim},
            {"n_tokens", text.n_tokens},
            {"d_text", text.d_text},
            {"s_struct", s_struct},
            {"s_app", s_app},
            {"mode", mode}};
}

TridentConfig TridentConfig::from_json(const nlohmann::json& j) {
    TridentConfig c;
    c.frames_per_run = j.at("frames_per_run").get<int>();
    c.c_latent = j.at("c_latent").get<int>();
    c.c0 = j.at("c0").get<int>();
    c.c1 = j.at("c1").get<int>();
    c.time_dim = j.at("time_dim").get<int>();
    c.text.n_tokens = j.at("n_tokens").get<int>();
    c.text.d_text = j.at("d_text").get<int>();
    c.s_struct = j.at("s_struct").get<double>();
    c.s_app = j.at("s_app").get<double>();
    c.mode = j.at("mode").get<std::string>();
    return c;
}

namespace {

using nn::ParamStore;

// ---- parameter creation -------------------------------------------------

void create_res(ParamStore& ps, const std::string& p, int c, int tdim, Rng& rng) {
    nn::ChanNorm::create(ps, p + ".n1", c);
    nn::Conv2d::create(ps, p + ".c1", c, c, 3, 1, 1, rng);
    nn::Linear::create(ps, p + ".time", tdim, c, rng);                     // shift
    nn::Linear::create(ps, p + ".times", tdim, c, rng, /*zero_init=*/true);  // gain, starts at 1
    nn::ChanNorm::create(ps, p + ".n2", c);
    nn::Conv2d::create(ps, p + ".c2", c, c, 3, 1, 1, rng);
}

void create_attn(ParamStore& ps, const std::string& p, int c, int d_text, bool cross, Rng& rng) {
    nn::ChanNorm::create(ps, p + ".n1", c);
    for (const char* n : {".q", ".k", ".v", ".o"})
        nn::Linear::create(ps, p + n, c, c, rng);
    if (cross) {
        nn::ChanNorm::create(ps, p + ".n2", c);
        nn::Linear::create(ps, p + ".cq", c, c, rng);
        nn::Linear::create(ps, p + ".ck", d_text, c, rng);
        nn::Linear::create(ps, p + ".cv", d_text, c, rng);
        nn::Linear::create(ps, p + ".co", c, c, rng);
    }
}

void create_temporal_res(ParamStore& ps, const std::string& p, int c, Rng& rng) {
    nn::ChanNorm::create(ps, p + ".n", c);
    nn::Conv1dT::create(ps, p + ".conv", c, c, rng);
    nn::Linear::create(ps, p + ".proj", c, c, rng, /*zero_init=*/true);
}

void create_temporal_attn(ParamStore& ps, const std::string& p, int c, Rng& rng) {
    nn::ChanNorm::create(ps, p + ".n", c);
    for (const char* n : {".q", ".k", ".v", ".o"})
        nn::Linear::create(ps, p + n, c, c, rng);
    nn::Linear::create(ps, p + ".proj", c, c, rng, /*zero_init=*/true);
}

void create_spatial_unet(ParamStore& ps, const TridentConfig& cfg, Rng& rng) {
    const std::string m = "main.spatial";
    nn::Conv2d::create(ps, m + ".conv_in", cfg.c_latent, cfg.c0, 3, 1, 1, rng);
    create_res(ps, m + ".enc0.res", cfg.c0, cfg.time_dim, rng);
    create_attn(ps, m + ".enc0.attn", cfg.c0, cfg.text.d_text, true, rng);
    nn::Conv2d::create(ps, m + ".down", cfg.c0, cfg.c1, 3, 2, 1, rng);
    create_res(ps, m + ".enc1.res", cfg.c1, cfg.time_dim, rng);
    create_attn(ps, m + ".enc1.attn", cfg.c1, cfg.text.d_text, true, rng);
    create_res(ps, m + ".mid.res", cfg.c1, cfg.time_dim, rng);
    create_attn(ps, m + ".mid.attn", cfg.c1, cfg.text.d_text, true, rng);
    create_res(ps, m + ".dec1.res", cfg.c1, cfg.time_dim, rng);
    create_attn(ps, m + ".dec1.attn", cfg.c1, cfg.text.d_text, true, rng);
    nn::Conv2d::create(ps, m + ".up", cfg.c1, cfg.c0, 3, 1, 1, rng);
    create_res(ps, m + ".dec0.res", cfg.c0, cfg.time_dim, rng);
    create_attn(ps, m + ".dec0.attn", cfg.c0, cfg.text.d_text, true, rng);
    nn::ChanNorm::create(ps, m + ".out.norm", cfg.c0);
    nn::Conv2d::create(ps, m + ".out.conv", cfg.c0, cfg.c_latent, 3, 1, 1, rng);
    nn::Linear::create(ps, m + ".time.l1", cfg.time_dim, cfg.time_dim, rng);
}

// ---- forward helpers (layers bound on the fly) ---------------------------

Tensor time_sinusoid(int t, int d) {
    Tensor p({1, d});
    for (int j = 0; j < d; ++j) {
        double freq = std::pow(10000.0, -2.0 * (j / 2) / static_cast<double>(d));
        p.at2(0, j) = (j % 2 == 0) ? std::sin(t * freq) : std::cos(t * freq);
    }
    return p;
}

ad::Var res_fwd(ParamStore& ps, const std::string& p, const ad::Var& x, const ad::Var& temb) {
    auto n1 = nn::ChanNorm::bind(ps, p + ".n1");
    auto c1 = nn::Conv2d::bind(ps, p + ".c1", 1, 1);
    auto time = nn::Linear::bind(ps, p + ".time");
    auto times = nn::Linear::bind(ps, p + ".times");
    auto n2 = nn::ChanNorm::bind(ps, p + ".n2");
    auto c2 = nn::Conv2d::bind(ps, p + ".c2", 1, 1);
    auto h = c1(ad::silu(n1(x)));
    int c = h.value().dim(1);
    // timestep modulation: per-channel gain (1 + s) and shift
    auto gain = ad::add(ad::reshape(times(temb), {c}), ad::constant(Tensor::full({c}, 1.0)));
    h = ad::add_channel_bias(ad::mul_channel(h, gain), ad::reshape(time(temb), {c}));
    h = c2(ad::silu(n2(h)));
    return ad::add(x, h);
}

ad::Var attn_fwd(ParamStore& ps, const std::string& p, ad::Var x, const ad::Var* text) {
    int l = x.value().dim(0), h = x.value().dim(2), w = x.value().dim(3);
    auto n1 = nn::ChanNorm::bind(ps, p + ".n1");
    auto q = nn::Linear::bind(ps, p + ".q");
    auto k = nn::Linear::bind(ps, p + ".k");
    auto v = nn::Linear::bind(ps, p + ".v");
    auto o = nn::Linear::bind(ps, p + ".o");
    auto tok = ad::frames_to_tokens(n1(x));
    auto a = ad::attention(q(tok), k(tok), v(tok), l);
    x = ad::add(x, ad::tokens_to_frames(o(a), l, h, w));
    if (text && ps.has(p + ".cq.w")) {
        auto n2 = nn::ChanNorm::bind(ps, p + ".n2");
        auto cq = nn::Linear::bind(ps, p + ".cq");
        auto ck = nn::Linear::bind(ps, p + ".ck");
        auto cv = nn::Linear::bind(ps, p + ".cv");
        auto co = nn::Linear::bind(ps, p + ".co");
        auto t2 = ad::frames_to_tokens(n2(x));
        auto a2 = ad::attention(cq(t2), ck(*text), cv(*text), 1, /*shared_kv=*/true);
        x = ad::add(x, ad::tokens_to_frames(co(a2), l, h, w));
    }
    return x;
}

// Temporal paths: spatial output + zero-projected temporal features.
ad::Var temporal_res_fwd(ParamStore& ps, const std::string& p, const ad::Var& v) {
    int l = v.value().dim(0), h = v.value().dim(2), w = v.value().dim(3);
    auto n = nn::ChanNorm::bind(ps, p + ".n");
    auto conv = nn::Conv1dT::bind(ps, p + ".conv");
    auto proj = nn::Linear::bind(ps, p + ".proj");
    auto y = ad::silu(conv(n(v)));
    y = ad::tokens_to_frames(proj(ad::frames_to_tokens(y)), l, h, w);
    return ad::add(v, y);
}

ad::Var temporal_attn_fwd(ParamStore& ps, const std::string& p, const ad::Var& v) {
    int l = v.value().dim(0), h = v.value().dim(2), w = v.value().dim(3);
    auto n = nn::ChanNorm::bind(ps, p + ".n");
    auto q = nn::Linear::bind(ps, p + ".q");
    auto k = nn::Linear::bind(ps, p + ".k");
    auto vv = nn::Linear::bind(ps, p + ".v");
    auto o = nn::Linear::bind(ps, p + ".o");
    auto proj = nn::Linear::bind(ps, p + ".proj");
    auto tok = ad::positions_to_tokens(n(v));
    auto a = ad::attention(q(tok), k(tok), vv(tok), h * w);
    auto y = ad::tokens_to_positions(o(a), l, h, w);
    y = ad::tokens_to_frames(proj(ad::frames_to_tokens(y)), l, h, w);
    return ad::add(v, y);
}

struct EncFeats {
    ad::Var x0;  // full resolution, c0 channels (after enc0 blocks)
    ad::Var x1;  // half resolution, c1 channels (after enc1 blocks)
};

// Shared encoder walk for the structure and appearance branch bodies.
EncFeats branch_encoder_fwd(ParamStore& ps, const std::string& pre, ad::Var x,
                            const ad::Var& temb, const ad::Var* text) {
    auto conv_in = nn::Conv2d::bind(ps, pre + ".conv_in", 1, 1);
    auto down = nn::Conv2d::bind(ps, pre + ".down", 2, 1);
    x = conv_in(x);
    x = res_fwd(ps, pre + ".enc0.res", x, temb);
    x = attn_fwd(ps, pre + ".enc0.attn", x, text);
    EncFeats f;
    f.x0 = x;
    x = down(x);
    x = res_fwd(ps, pre + ".enc1.res", x, temb);
    x = attn_fwd(ps, pre + ".enc1.attn", x, text);
    f.x1 = x;
    return f;
}

}  // namespace

Tensor pool_structure_maps(const StructureSequence& seq, int h_latent, int w_latent) {
    if (seq.maps.empty()) throw std::invalid_argument("structure: empty map sequence");
    int h = seq.maps[0].dim(0), w = seq.maps[0].dim(1);
    if (h % h_latent != 0 || w % w_latent != 0)
        throw std::invalid_argument("structure: map size " + std::to_string(h) + "x" +
                                    std::to_string(w) + " not divisible by latent grid " +
                                    std::to_string(h_latent) + "x" + std::to_string(w_latent));
    int fh = h / h_latent, fw = w / w_latent;
    int l = static_cast<int>(seq.maps.size());
    Tensor out({l, 1, h_latent, w_latent});
    for (int i = 0; i < l; ++i) {
        const Tensor& m = seq.maps[static_cast<size_t>(i)];
        if (m.dim(0) != h || m.dim(1) != w)
            throw std::invalid_argument("structure: map " + std::to_string(i) + " size mismatch");
        for (int a = 0; a < h_latent; ++a)
            for (int b = 0; b < w_latent; ++b) {
                double acc = 0.0;
                for (int da = 0; da < fh; ++da)
                    for (int db = 0; db < fw; ++db) acc += m.at2(a * fh + da, b * fw + db);
                out.at4(i, 0, a, b) = acc / (fh * fw);
            }
    }
    return out;
}

TridentModel TridentModel::create_t2i(const TridentConfig& cfg, int vocab_size, uint64_t seed) {
    TridentModel m;
    m.cfg_ = cfg;
    m.vocab_size_ = vocab_size;
    m.has_branches_ = false;
    Rng rng(seed);
    m.text_ = TextEncoder::create(m.store_, vocab_size, cfg.text, rng);
    create_spatial_unet(m.store_, cfg, rng);
    return m;
}

TridentModel TridentModel::init_from_t2i(const Checkpoint& t2i, const TridentConfig& cfg,
                                         uint64_t seed) {
    if (!t2i.arrays.count("main.spatial.conv_in.w") || !t2i.arrays.count("text.table"))
        throw std::invalid_argument("init_from_t2i: checkpoint lacks a trained spatial UNet");
    TridentConfig src = TridentConfig::from_json(t2i.config.at("trident"));
    if (src.c_latent != cfg.c_latent || src.c0 != cfg.c0 || src.c1 != cfg.c1 ||
        src.time_dim != cfg.time_dim || src.text.n_tokens != cfg.text.n_tokens ||
        src.text.d_text != cfg.text.d_text)
        throw std::invalid_argument("init_from_t2i: architecture mismatch between checkpoint (" +
                                    src.to_json().dump() + ") and requested config");

    TridentModel m;
    m.cfg_ = cfg;
    m.vocab_size_ = t2i.config.at("vocab_size").get<int>();
    m.has_branches_ = true;
    for (const auto& [name, entry] : t2i.arrays) m.store_.create(name, entry.tensor);

    Rng rng(seed);
    const std::string t = "main.temporal";
    create_temporal_res(m.store_, t + ".enc0.res", cfg.c0, rng);
    create_temporal_attn(m.store_, t + ".enc0.attn", cfg.c0, rng);
    create_temporal_res(m.store_, t + ".enc1.res", cfg.c1, rng);
    create_temporal_attn(m.store_, t + ".enc1.attn", cfg.c1, rng);
    create_temporal_res(m.store_, t + ".mid.res", cfg.c1, rng);
    create_temporal_attn(m.store_, t + ".mid.attn", cfg.c1, rng);
    create_temporal_res(m.store_, t + ".dec1.res", cfg.c1, rng);
    create_temporal_attn(m.store_, t + ".dec1.attn", cfg.c1, rng);
    create_temporal_res(m.store_, t + ".dec0.res", cfg.c0, rng);
    create_temporal_attn(m.store_, t + ".dec0.attn", cfg.c0, rng);

    // Structure branch: encoder copy (cross-attention kept) + zero convs.
    // Appearance branch: encoder copy with cross-attention dropped.
    for (const auto& name : m.store_.names_with_prefix("main.spatial.")) {
        std::string suffix = name.substr(std::string("main.spatial.").size());
        bool encoder_part = suffix.rfind("conv_in.", 0) == 0 || suffix.rfind("enc0.", 0) == 0 ||
                            suffix.rfind("down.", 0) == 0 || suffix.rfind("enc1.", 0) == 0;
        if (!encoder_part) continue;
        Tensor value = m.store_.get(name).value();
        m.store_.create("structure." + suffix, value);
        bool cross_part = suffix.find(".attn.n2.") != std::string::npos ||
                          suffix.find(".attn.cq.") != std::string::npos ||
                          suffix.find(".attn.ck.") != std::string::npos ||
                          suffix.find(".attn.cv.") != std::string::npos ||
                          suffix.find(".attn.co.") != std::string::npos;
        if (!cross_part) m.store_.create("appearance." + suffix, value);
    }
    nn::Conv2d::create(m.store_, "structure.zin", 1, cfg.c_latent, 1, 1, 0, rng, true);
    nn::Conv2d::create(m.store_, "structure.zmid", cfg.c1, cfg.c1, 1, 1, 0, rng, true);
    nn::Conv2d::create(m.store_, "structure.z1", cfg.c1, cfg.c1, 1, 1, 0, rng, true);
    nn::Conv2d::create(m.store_, "structure.z0", cfg.c0, cfg.c0, 1, 1, 0, rng, true);
    nn::Conv2d::create(m.store_, "appearance.z1", cfg.c1, cfg.c1, 1, 1, 0, rng, true);
    nn::Conv2d::create(m.store_, "appearance.z0", cfg.c0, cfg.c0, 1, 1, 0, rng, true);

    m.store_.freeze_prefix("main.spatial.");
    m.store_.freeze_prefix("structure.");
    m.store_.set_frozen("text.table", true);
    m.bind_all();
    return m;
}

TridentModel TridentModel::from_checkpoint(const Checkpoint& ck) {
    TridentModel m;
    m.cfg_ = TridentConfig::from_json(ck.config.at("trident"));
    m.vocab_size_ = ck.config.at("vocab_size").get<int>();
    m.has_branches_ = ck.config.at("kind").get<std::string>() == "trident";
    ck.into_store(m.store_);
    m.bind_all();
    return m;
}

Checkpoint TridentModel::to_checkpoint() const {
    nlohmann::json cfg = {{"kind", has_branches_ ? "trident" : "t2i"},
                          {"trident", cfg_.to_json()},
                          {"vocab_size", vocab_size_}};
    return Checkpoint::from_store(store_, std::move(cfg));
}

void TridentModel::bind_all() { text_ = TextEncoder::bind(store_, cfg_.text); }

void TridentModel::swap_spatial_weights(const Checkpoint& t2i) {
    TridentConfig src = TridentConfig::from_json(t2i.config.at("trident"));
    if (src.c_latent != cfg_.c_latent || src.c0 != cfg_.c0 || src.c1 != cfg_.c1 ||
        src.time_dim != cfg_.time_dim || src.text.n_tokens != cfg_.text.n_tokens ||
        src.text.d_text != cfg_.text.d_text)
        throw std::invalid_argument("swap_spatial_weights: architecture mismatch");
    int replaced = 0;
    for (const auto& [name, entry] : t2i.arrays) {
        if (name.rfind("main.spatial.", 0) != 0) continue;
        if (!store_.has(name))
            throw std::invalid_argument("swap_spatial_weights: unexpected array " + name);
        store_.set(name, entry.tensor);
        ++replaced;
    }
    if (replaced == 0)
        throw std::invalid_argument("swap_spatial_weights: checkpoint has no spatial weights");
}

ad::Var TridentModel::forward_t2i_var(const ad::Var& z, int t,
                                      const std::vector<int>& prompt_ids) const {
    Conditions cond;
    cond.prompt_ids = prompt_ids;
    cond.s_struct = 0.0;
    cond.s_app = 0.0;
    // Temporal layers off: the leading axis is an independent frame batch.
    return const_cast<TridentModel*>(this)->unet_fwd(z, t, cond, /*video=*/false);
}

Tensor TridentModel::forward_t2i(const Tensor& z, int t,
                                 const std::vector<int>& prompt_ids) const {
    return forward_t2i_var(ad::constant(z), t, prompt_ids).value();
}

ad::Var TridentModel::forward_var(const ad::Var& z_t, int t, const Conditions& cond) const {
    if (!has_branches_)
        throw std::logic_error("trident forward: model holds only the spatial UNet");
    return const_cast<TridentModel*>(this)->unet_fwd(z_t, t, cond, /*video=*/true);
}

Tensor TridentModel::forward(const LatentClip& z_t, int t, const Conditions& cond) const {
    return forward_var(ad::constant(z_t.data), t, cond).value();
}

ad::Var TridentModel::unet_fwd(const ad::Var& z, int t, const Conditions& cond, bool video) {
    if (z.value().ndim() != 4 || z.value().dim(1) != cfg_.c_latent)
        throw std::invalid_argument("main: latent shape " + z.value().shape_str() +
                                    " incompatible with c_latent=" +
                                    std::to_string(cfg_.c_latent));
    int l = z.value().dim(0), hz = z.value().dim(2), wz = z.value().dim(3);

    auto l1 = nn::Linear::bind(store_, "main.spatial.time.l1");
    ad::Var temb = ad::silu(l1(ad::constant(time_sinusoid(t, cfg_.time_dim))));
    ad::Var text = text_.embed_ids(cond.prompt_ids);

    // Branch features, computed only when their scale is live so that a
    // zero scale is bitwise invariant to the condition's content.
    bool use_struct = video && cond.s_struct != 0.0;
    bool use_app = video && cond.s_app != 0.0 && !cond.app_latents.empty();
    ad::Var sf0, sf1, sfmid;
    if (use_struct) {
        if (!cond.structure)
            throw std::invalid_argument("structure: scale is nonzero but no maps supplied");
        if (static_cast<int>(cond.structure->maps.size()) != l)
            throw std::invalid_argument("structure: " +
                                        std::to_string(cond.structure->maps.size()) +
                                        " maps for " + std::to_string(l) + " frames");
        Tensor pooled = pool_structure_maps(*cond.structure, hz, wz);
        auto zin = nn::Conv2d::bind(store_, "structure.zin", 1, 0);
        ad::Var xs = ad::add(z, zin(ad::constant(std::move(pooled))));
        EncFeats f = branch_encoder_fwd(store_, "structure", xs, temb, &text);
        sf0 = nn::Conv2d::bind(store_, "structure.z0", 1, 0)(f.x0);
        sf1 = nn::Conv2d::bind(store_, "structure.z1", 1, 0)(f.x1);
        sfmid = nn::Conv2d::bind(store_, "structure.zmid", 1, 0)(f.x1);
    }
    std::vector<std::pair<EncFeats, int>> app;
    if (use_app) {
        for (const auto& [latent, idx] : cond.app_latents) {
            if (idx < 0 || idx >= l)
                throw std::out_of_range("appearance: reference index " + std::to_string(idx) +
                                        " outside run [0," + std::to_string(l) + ")");
            if (latent.ndim() != 3 || latent.dim(0) != cfg_.c_latent || latent.dim(1) != hz ||
                latent.dim(2) != wz)
                throw std::invalid_argument("appearance: reference latent " + latent.shape_str() +
                                            " incompatible with clip latents");
            Tensor batched({1, cfg_.c_latent, hz, wz});
            batched.data = latent.data;
            EncFeats f =
                branch_encoder_fwd(store_, "appearance", ad::constant(std::move(batched)), temb,
                                   nullptr);
            f.x0 = nn::Conv2d::bind(store_, "appearance.z0", 1, 0)(f.x0);
            f.x1 = nn::Conv2d::bind(store_, "appearance.z1", 1, 0)(f.x1);
            app.emplace_back(std::move(f), idx);
        }
    }

    const std::string m = "main.spatial", tp = "main.temporal";
    auto conv_in = nn::Conv2d::bind(store_, m + ".conv_in", 1, 1);
    auto down = nn::Conv2d::bind(store_, m + ".down", 2, 1);
    auto up = nn::Conv2d::bind(store_, m + ".up", 1, 1);
    auto out_norm = nn::ChanNorm::bind(store_, m + ".out.norm");
    auto out_conv = nn::Conv2d::bind(store_, m + ".out.conv", 1, 1);

    ad::Var x = conv_in(z);
    x = res_fwd(store_, m + ".enc0.res", x, temb);
    if (video) x = temporal_res_fwd(store_, tp + ".enc0.res", x);
    x = attn_fwd(store_, m + ".enc0.attn", x, &text);
    if (video) x = temporal_attn_fwd(store_, tp + ".enc0.attn", x);
    for (const auto& [f, idx] : app) x = ad::add_at_frame(x, f.x0, idx, cond.s_app);
    ad::Var skip0 = x;

    x = down(x);
    x = res_fwd(store_, m + ".enc1.res", x, temb);
    if (video) x = temporal_res_fwd(store_, tp + ".enc1.res", x);
    x = attn_fwd(store_, m + ".enc1.attn", x, &text);
    if (video) x = temporal_attn_fwd(store_, tp + ".enc1.attn", x);
    for (const auto& [f, idx] : app) x = ad::add_at_frame(x, f.x1, idx, cond.s_app);
    ad::Var skip1 = x;

    x = res_fwd(store_, m + ".mid.res", x, temb);
    if (video) x = temporal_res_fwd(store_, tp + ".mid.res", x);
    x = attn_fwd(store_, m + ".mid.attn", x, &text);
    if (video) x = temporal_attn_fwd(store_, tp + ".mid.attn", x);
    if (use_struct) x = ad::add_scaled(x, sfmid, cond.s_struct);

    x = ad::add(x, skip1);
    x = res_fwd(store_, m + ".dec1.res", x, temb);
    if (video) x = temporal_res_fwd(store_, tp + ".dec1.res", x);
    x = attn_fwd(store_, m + ".dec1.attn", x, &text);
    if (video) x = temporal_attn_fwd(store_, tp + ".dec1.attn", x);
    if (use_struct) x = ad::add_scaled(x, sf1, cond.s_struct);

    x = up(ad::upsample_nearest2x(x));
    x = ad::add(x, skip0);
    x = res_fwd(store_, m + ".dec0.res", x, temb);
    if (video) x = temporal_res_fwd(store_, tp + ".dec0.res", x);
    x = attn_fwd(store_, m + ".dec0.attn", x, &text);
    if (video) x = temporal_attn_fwd(store_, tp + ".dec0.attn", x);
    if (use_struct) x = ad::add_scaled(x, sf0, cond.s_struct);

    return out_conv(ad::silu(out_norm(x)));
}

}  // namespace ccedit
