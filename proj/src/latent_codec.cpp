#include "ccedit/latent_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace ccedit {

namespace ad = ccedit::ad;

nlohmann::json CodecConfig::to_json() const {
    return {{"f", f}, {"c_latent", c_latent}, {"width", width}, {"seed", seed}};
}

CodecConfig CodecConfig::from_json(const nlohmann::json& j) {
    CodecConfig c;
    c.f = j.at("f").get<int>();
    c.c_latent = j.at("c_latent").get<int>();
    c.width = j.at("width").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

LatentCodec LatentCodec::create(const CodecConfig& cfg) {
    if (cfg.f != 4) throw std::invalid_argument("codec: only downsample factor 4 is supported");
    LatentCodec c;
    c.cfg_ = cfg;
    Rng rng(cfg.seed);
    int w = cfg.width;
    c.enc_in_ = nn::Conv2d::create(c.store_, "enc.in", 3, w, 3, 1, 1, rng);
    c.enc_d1_ = nn::Conv2d::create(c.store_, "enc.d1", w, w, 3, 2, 1, rng);
    c.enc_d2_ = nn::Conv2d::create(c.store_, "enc.d2", w, w, 3, 2, 1, rng);
    c.enc_out_ = nn::Conv2d::create(c.store_, "enc.out", w, cfg.c_latent, 3, 1, 1, rng);
    c.dec_in_ = nn::Conv2d::create(c.store_, "dec.in", cfg.c_latent, w, 3, 1, 1, rng);
    c.dec_u1_ = nn::Conv2d::create(c.store_, "dec.u1", w, w, 3, 1, 1, rng);
    c.dec_u2_ = nn::Conv2d::create(c.store_, "dec.u2", w, w, 3, 1, 1, rng);
    c.dec_out_ = nn::Conv2d::create(c.store_, "dec.out", w, 3, 3, 1, 1, rng);
    return c;
}

void LatentCodec::bind_layers() {
    enc_in_ = nn::Conv2d::bind(store_, "enc.in", 1, 1);
    enc_d1_ = nn::Conv2d::bind(store_, "enc.d1", 2, 1);
    enc_d2_ = nn::Conv2d::bind(store_, "enc.d2", 2, 1);
    enc_out_ = nn::Conv2d::bind(store_, "enc.out", 1, 1);
    dec_in_ = nn::Conv2d::bind(store_, "dec.in", 1, 1);
    dec_u1_ = nn::Conv2d::bind(store_, "dec.u1", 1, 1);
    dec_u2_ = nn::Conv2d::bind(store_, "dec.u2", 1, 1);
    dec_out_ = nn::Conv2d::bind(store_, "dec.out", 1, 1);
}

LatentCodec LatentCodec::from_checkpoint(const Checkpoint& ck) {
    LatentCodec c;
    c.cfg_ = CodecConfig::from_json(ck.config.at("codec"));
    ck.into_store(c.store_);
    c.bind_layers();
    return c;
}

Checkpoint LatentCodec::to_checkpoint() const {
    return Checkpoint::from_store(store_, {{"kind", "codec"}, {"codec", cfg_.to_json()}});
}

ad::Var LatentCodec::encode_var(const ad::Var& x) const {
    auto h = ad::silu(enc_in_(x));
    h = ad::silu(enc_d1_(h));
    h = ad::silu(enc_d2_(h));
    return enc_out_(h);
}

ad::Var LatentCodec::decode_var(const ad::Var& z) const {
    auto h = ad::silu(dec_in_(z));
    h = ad::silu(dec_u1_(ad::upsample_nearest2x(h)));
    h = ad::silu(dec_u2_(ad::upsample_nearest2x(h)));
    return ad::clamp(dec_out_(h), -1.0, 1.0);
}

LatentFrame LatentCodec::encode(const PixelFrame& frame) const {
    if (frame.height() % cfg_.f != 0 || frame.width() % cfg_.f != 0)
        throw std::invalid_argument(
            "codec encode: frame " + std::to_string(frame.height()) + "x" +
            std::to_string(frame.width()) + " not divisible by downsample factor " +
            std::to_string(cfg_.f));
    Tensor batched({1, 3, frame.height(), frame.width()});
    batched.data = frame.data.data;
    ad::Var z = encode_var(ad::constant(std::move(batched)));
    Tensor out({z.value().dim(1), z.value().dim(2), z.value().dim(3)});
    out.data = z.value().data;
    return LatentFrame(std::move(out));
}

PixelFrame LatentCodec::decode(const LatentFrame& latent) const {
    if (latent.data.dim(0) != cfg_.c_latent)
        throw std::invalid_argument("codec decode: latent channels " +
                                    std::to_string(latent.data.dim(0)) + " != c_latent " +
                                    std::to_string(cfg_.c_latent));
    Tensor batched({1, latent.data.dim(0), latent.data.dim(1), latent.data.dim(2)});
    batched.data = latent.data.data;
    ad::Var x = decode_var(ad::constant(std::move(batched)));
    Tensor out({3, x.value().dim(2), x.value().dim(3)});
    out.data = x.value().data;
    return PixelFrame(std::move(out));
}

LatentClip LatentCodec::encode_clip(const VideoClip& clip) const {
    clip.validate();
    std::vector<LatentFrame> lat;
    lat.reserve(clip.frames.size());
    for (size_t i = 0; i < clip.frames.size(); ++i) {
        try {
            lat.push_back(encode(clip.frames[i]));
        } catch (const std::exception& e) {
            throw std::invalid_argument("encode_clip: frame " + std::to_string(i) + ": " +
                                        e.what());
        }
    }
    Tensor data({clip.length(), lat[0].data.dim(0), lat[0].data.dim(1), lat[0].data.dim(2)});
    LatentClip out(std::move(data));
    for (int i = 0; i < clip.length(); ++i) out.set_frame(i, lat[static_cast<size_t>(i)]);
    return out;
}

VideoClip LatentCodec::decode_clip(const LatentClip& clip, double fps) const {
    VideoClip out;
    out.fps = fps;
    for (int i = 0; i < clip.length(); ++i) {
        try {
            out.frames.push_back(decode(clip.frame(i)));
        } catch (const std::exception& e) {
            throw std::invalid_argument("decode_clip: frame " + std::to_string(i) + ": " +
                                        e.what());
        }
    }
    return out;
}

LatentCodec train_codec(const std::vector<PixelFrame>& dataset, const CodecConfig& cfg,
                        const CodecTrainConfig& train, std::vector<TrainLogEntry>* log) {
    if (dataset.empty()) throw std::invalid_argument("train_codec: empty dataset");
    LatentCodec codec = LatentCodec::create(cfg);
    Rng rng(train.seed);
    nn::Sgd sgd{train.lr};
    nn::Adam adam;
    adam.lr = train.lr;
    bool use_adam = train.optimizer == "adam";
    if (!use_adam && train.optimizer != "sgd")
        throw std::invalid_argument("train_codec: unknown optimizer " + train.optimizer);

    int h = dataset[0].height(), w = dataset[0].width();
    for (int step = 0; step < train.steps; ++step) {
        int b = std::min<int>(train.batch, static_cast<int>(dataset.size()));
        Tensor batch({b, 3, h, w});
        int64_t per = static_cast<int64_t>(3) * h * w;
        for (int i = 0; i < b; ++i) {
            int idx = rng.uniform_int(0, static_cast<int>(dataset.size()) - 1);
            std::copy(dataset[static_cast<size_t>(idx)].data.data.begin(),
                      dataset[static_cast<size_t>(idx)].data.data.end(),
                      batch.data.begin() + i * per);
        }
        ad::Var x = ad::constant(batch);
        ad::Var recon = codec.decode_var(codec.encode_var(x));
        ad::Var loss = ad::mse_loss(recon, batch);
        double lv = loss.value().data[0];
        if (!std::isfinite(lv))
            throw std::runtime_error("train_codec: non-finite loss at step " +
                                     std::to_string(step) + " (lr=" + std::to_string(train.lr) +
                                     ")");
        codec.store().zero_grad();
        loss.backward();
        if (train.lr != 0.0) {
            if (use_adam)
                adam.step(codec.store());
            else
                sgd.step(codec.store());
        }
        if (log && (step % train.log_every == 0 || step == train.steps - 1))
            log->push_back({step, lv});
    }
    return codec;
}

}  // namespace ccedit
