// Acceptance harness: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria that need the overfit synthetic model share one fixture,
// built once and reported separately.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "ccedit/benchmark.hpp"
#include "ccedit/io.hpp"
#include "ccedit/long_video.hpp"
#include "ccedit/pipeline.hpp"
#include "ccedit/training.hpp"

using namespace ccedit;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int g_failures = 0;

void run_criterion(int id, const std::string& name, double budget_s,
                   const std::function<void()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    double secs = seconds_since(t0);
    if (ok && secs > budget_s) {
        ok = false;
        detail = "exceeded runtime budget of " + std::to_string(budget_s) + " s";
    }
    std::printf("[%s] %02d %s (%.2fs)\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs);
    if (!ok) {
        std::printf("       %s\n", detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

// ---- shared small-model helpers -------------------------------------------

TridentConfig micro_config(int l = 3, int c = 8) {
    TridentConfig cfg;
    cfg.frames_per_run = l;
    cfg.c_latent = 4;
    cfg.c0 = c;
    cfg.c1 = c;
    cfg.time_dim = c;
    cfg.text.n_tokens = 4;
    cfg.text.d_text = 8;
    return cfg;
}

TridentModel fresh_trident(const TridentConfig& cfg, uint64_t seed) {
    TridentModel t2i = TridentModel::create_t2i(cfg, Vocabulary::synthetic_default().size(), seed);
    return TridentModel::init_from_t2i(t2i.to_checkpoint(), cfg, seed + 100);
}

// ---- overfit fixture -------------------------------------------------------

struct Overfit {
    Vocabulary vocab = Vocabulary::synthetic_default();
    std::vector<SyntheticClip> corpus;
    LatentCodec codec;
    std::unique_ptr<TridentModel> model;  // stage-C edit model
    NoiseSchedule schedule = default_schedule(50);

    Overfit() : codec(LatentCodec::create(CodecConfig{})) {
        SyntheticSpec spec;
        spec.canvas = 32;
        spec.frames = 3;
        spec.corpus_size = 8;
        spec.seed = 20;
        corpus = generate_synthetic_corpus(spec);

        std::vector<PixelFrame> frames;
        for (const auto& c : corpus)
            for (const auto& f : c.clip.frames) frames.push_back(f);
        CodecConfig ccfg;
        ccfg.width = 12;
        CodecTrainConfig ct;
        ct.steps = 700;
        ct.batch = 8;
        ct.lr = 3e-3;
        ct.seed = 2;
        codec = train_codec(frames, ccfg, ct);

        TridentConfig mcfg = micro_config(3, 16);
        mcfg.text.n_tokens = 6;
        mcfg.text.d_text = 16;
        TrainConfig tc;
        tc.stage = "t2i";
        tc.steps = 4000;
        tc.lr = 2e-3;
        tc.seed = 21;
        TridentModel t2i = pretrain_t2i(corpus, codec, vocab, mcfg, tc, nullptr);

        tc.stage = "structure";
        tc.steps = 300;
        TridentModel full =
            pretrain_structure_branch(corpus, codec, vocab, t2i.to_checkpoint(), mcfg, tc, nullptr);

        tc.stage = "temporal_appearance";
        tc.steps = 2000;
        train_temporal_appearance(corpus, codec, vocab, full, tc, nullptr);
        model = std::make_unique<TridentModel>(std::move(full));
    }
};

// Rotate channels (r,g,b) -> (g,b,r): red->blue, green->red, blue->green;
// gray backgrounds are invariant.
PixelFrame recolor(const PixelFrame& f) {
    Tensor t = f.data;
    for (int i = 0; i < f.height(); ++i)
        for (int j = 0; j < f.width(); ++j) {
            t.at3(0, i, j) = f.data.at3(1, i, j);
            t.at3(1, i, j) = f.data.at3(2, i, j);
            t.at3(2, i, j) = f.data.at3(0, i, j);
        }
    return PixelFrame(std::move(t));
}

double mae(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / double(a.data.size());
}

// ---- scheduler brute-force checker ----------------------------------------

void check_schedule_oracle(const KeyframeSchedule& s) {
    int L = s.L, l = L + 1;
    expect(s.padded_N >= s.N && (s.padded_N - 1) % L == 0, "padding arithmetic");
    std::vector<int> keys;
    for (int i = 0; i < s.padded_N; i += L) keys.push_back(i);
    expect(s.keyframe_indices == keys && keys.back() == s.padded_N - 1, "keyframe placement");
    std::set<int> keyset(keys.begin(), keys.end());
    bool degenerate = s.N <= l;
    if (degenerate)
        expect(s.padded_N == l, "degenerate padding");
    else
        expect((s.padded_N - 1) % (L * L) == 0 && s.padded_N - s.N < L * L, "minimal padding");

    std::map<int, int> edited_by, key_owner;
    int prev_last = -1, keyruns = 0;
    for (size_t ri = 0; ri < s.runs.size(); ++ri) {
        const RunPlan& r = s.runs[ri];
        expect(r.index == int(ri) && int(r.frame_indices.size()) == l, "run shape");
        for (int f : r.frame_indices) expect(f >= 0 && f < s.padded_N, "frame range");
        if (r.mode == RunPlan::Mode::kInitial) {
            expect(ri == 0, "initial first");
            expect(r.reference_runs == std::vector<int>{-1} &&
                       r.reference_positions == std::vector<int>{default_reference_index(l)},
                   "initial reference");
            for (int p = 0; p <= L; ++p) {
                int f = r.frame_indices[size_t(p)];
                expect(edited_by.emplace(f, r.index).second, "uniqueness");
                key_owner[f] = r.index;
                if (!degenerate) expect(keyset.count(f) == 1, "initial edits keyframes");
            }
            prev_last = r.frame_indices.back();
            ++keyruns;
        } else if (r.mode == RunPlan::Mode::kExtension) {
            expect(!degenerate && int(ri) == keyruns, "extension order");
            expect(r.frame_indices.front() == prev_last, "chaining");
            expect(r.reference_positions == std::vector<int>{0} &&
                       r.reference_runs == std::vector<int>{r.index - 1},
                   "extension reference");
            for (int p = 1; p <= L; ++p) {
                int f = r.frame_indices[size_t(p)];
                expect(keyset.count(f) == 1 && edited_by.emplace(f, r.index).second,
                       "extension coverage");
                key_owner[f] = r.index;
            }
            prev_last = r.frame_indices.back();
            ++keyruns;
        } else {
            expect(!degenerate && L >= 2, "interpolation applicability");
            int a = r.frame_indices.front();
            expect(keyset.count(a) == 1 && keyset.count(a + L) == 1, "interpolation endpoints");
            for (int p = 0; p <= L; ++p)
                expect(r.frame_indices[size_t(p)] == a + p, "interpolation contiguity");
            expect(r.reference_positions == std::vector<int>({0, L}), "interpolation refs");
            expect(r.reference_runs[0] == key_owner.at(a) &&
                       r.reference_runs[1] == key_owner.at(a + L) && r.reference_runs[0] < r.index &&
                       r.reference_runs[1] < r.index,
                   "interpolation provenance");
            for (int p = 1; p < L; ++p)
                expect(edited_by.emplace(r.frame_indices[size_t(p)], r.index).second,
                       "interior uniqueness");
        }
    }
    expect(int(edited_by.size()) == s.padded_N, "full coverage");
}

nlohmann::json conformant_record(const std::string& id) {
    nlohmann::json edits = nlohmann::json::array();
    for (const char* t : {"StyleChange", "ObjectChange", "BackgroundChange", "CompoundChange"})
        edits.push_back({{"edit_type", t}, {"target_prompt", "x"}, {"fantasy_level", 2}});
    return {{"id", id},          {"path", "v.mp4"},        {"category", "Object"},
            {"description", "d"}, {"scene_complexity", 1}, {"camera_motion", 1},
            {"object_motion", 1}, {"edits", edits}};
}

}  // namespace

int main() {
    // -- 1: zero-init transparency --------------------------------------
    run_criterion(1, "zero-init transparency on 20 fixtures (bitwise)", 10.0, [] {
        TridentConfig cfg = micro_config();
        TridentModel tri = fresh_trident(cfg, 1);
        Rng rng(2);
        for (int rep = 0; rep < 20; ++rep) {
            Tensor z = rng.normal_tensor({3, 4, 8, 8});
            std::vector<int> ids = {rng.uniform_int(0, 14), 2, 1, 1};
            StructureSequence seq;
            for (int i = 0; i < 3; ++i) seq.maps.push_back(rng.uniform_tensor({32, 32}, 0.0, 1.0));
            TridentModel::Conditions cond;
            cond.prompt_ids = ids;
            cond.s_struct = 0.0;
            cond.structure = &seq;
            cond.s_app = 1.0;
            cond.app_latents = {{rng.normal_tensor({4, 8, 8}), rng.uniform_int(0, 2)}};
            int t = rng.uniform_int(1, 50);
            Tensor video = tri.forward(LatentClip(z), t, cond);
            Tensor frames = tri.forward_t2i(z, t, ids);
            expect(video.bitwise_equal(frames), "fixture " + std::to_string(rep) + " not bitwise");
        }
    });

    // -- 2: gradient correctness -----------------------------------------
    run_criterion(2, "finite-difference gradients, >=50 params, rel err < 1e-3", 60.0, [] {
        TridentConfig cfg = micro_config();
        TridentModel tri = fresh_trident(cfg, 5);
        Rng rng(6);
        // Move zero-initialized layers off zero so their gradients are live.
        for (const auto& name : tri.store().names()) {
            if (tri.store().frozen(name)) continue;
            if (name.find(".proj.") == std::string::npos && name.rfind("appearance.z", 0) != 0)
                continue;
            Tensor t = tri.store().get(name).value();
            for (double& v : t.data) v += 0.05 * rng.normal();
            tri.store().set(name, t);
        }

        LatentClip z0(rng.normal_tensor({3, 4, 8, 8}));
        LatentClip eps(rng.normal_tensor({3, 4, 8, 8}));
        NoiseSchedule sched = default_schedule(50);
        StructureSequence seq;
        for (int i = 0; i < 3; ++i) seq.maps.push_back(rng.uniform_tensor({32, 32}, 0.0, 1.0));
        TridentModel::Conditions cond;
        cond.prompt_ids = {3, 7, 1, 1};
        cond.structure = &seq;
        cond.app_latents = {{rng.normal_tensor({4, 8, 8}), 1}};
        int t = 17;
        LatentClip z_t = q_sample(z0, Timestep{t}, eps, sched);

        auto loss_value = [&] {
            ad::Var pred = tri.forward_var(ad::constant(z_t.data), t, cond);
            return ad::mse_loss(pred, eps.data);
        };
        tri.store().zero_grad();
        loss_value().backward();

        std::vector<std::string> trainable;
        for (const auto& name : tri.store().names())
            if (!tri.store().frozen(name)) trainable.push_back(name);
        expect(trainable.size() >= 50, "too few trainable tensors");

        int checked = 0;
        double h = 1e-5;
        for (size_t k = 0; k < trainable.size(); ++k) {  // one sampled entry per tensor
            const std::string& name = trainable[k];
            Tensor grad = tri.store().get(name).grad();
            Tensor val = tri.store().get(name).value();
            size_t i = size_t(Rng(k + 1).uniform_int(0, int(val.data.size()) - 1));
            double orig = val.data[i];
            Tensor tmp = val;
            tmp.data[i] = orig + h;
            tri.store().set(name, tmp);
            double lp = loss_value().value().data[0];
            tmp.data[i] = orig - h;
            tri.store().set(name, tmp);
            double lm = loss_value().value().data[0];
            tmp.data[i] = orig;
            tri.store().set(name, tmp);
            double fd = (lp - lm) / (2 * h);
            double an = grad.shape == val.shape ? grad.data[i] : 0.0;
            double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
            expect(rel < 1e-3, name + "[" + std::to_string(i) + "] rel err " + std::to_string(rel));
            ++checked;
        }
        expect(checked >= 50, "only checked " + std::to_string(checked) + " parameters");
    });

    // -- 3: freeze partition ----------------------------------------------
    run_criterion(3, "freeze partition after 100 stage-C steps", 60.0, [] {
        SyntheticSpec spec;
        spec.canvas = 32;
        spec.frames = 3;
        spec.corpus_size = 4;
        spec.seed = 30;
        auto corpus = generate_synthetic_corpus(spec);
        LatentCodec codec = LatentCodec::create(CodecConfig{});
        Vocabulary vocab = Vocabulary::synthetic_default();
        TridentConfig cfg = micro_config();
        cfg.text.n_tokens = 6;
        cfg.text.d_text = 16;
        TridentModel t2i = TridentModel::create_t2i(cfg, vocab.size(), 31);
        TridentModel model = TridentModel::init_from_t2i(t2i.to_checkpoint(), cfg, 32);

        std::map<std::string, Tensor> before;
        for (const auto& name : model.store().names())
            before.emplace(name, model.store().get(name).value());

        TrainConfig tc;
        tc.stage = "temporal_appearance";
        tc.steps = 100;
        tc.lr = 1e-3;
        tc.seed = 33;
        train_temporal_appearance(corpus, codec, vocab, model, tc, nullptr);

        std::set<std::string> changed_groups;
        for (const auto& name : model.store().names()) {
            bool same = model.store().get(name).value().bitwise_equal(before.at(name));
            if (model.store().frozen(name))
                expect(same, "frozen parameter changed: " + name);
            else if (!same) {
                if (name.rfind("main.temporal.", 0) == 0) {
                    // Group by block.kind, e.g. main.temporal.enc0.res.
                    size_t d1 = name.find('.', 14);
                    changed_groups.insert(name.substr(0, name.find('.', d1 + 1)));
                } else if (name.rfind("appearance.z", 0) == 0) {
                    changed_groups.insert("appearance.zconv");
                } else if (name.rfind("appearance.", 0) == 0) {
                    changed_groups.insert("appearance.body");
                }
            }
        }
        // 10 temporal sites + appearance zero convs + appearance body.
        expect(int(changed_groups.size()) == 12,
               "changed groups: " + std::to_string(changed_groups.size()) + " of 12");
    });

    // -- 4: DDIM inversion oracle ------------------------------------------
    run_criterion(4, "DDIM inversion oracle, rel err < 1e-4 at steps=T=50", 5.0, [] {
        NoiseSchedule sched = default_schedule(50);
        Rng rng(40);
        LatentClip z0(rng.normal_tensor({2, 4, 8, 8}));
        LatentClip eps(rng.normal_tensor({2, 4, 8, 8}));
        LatentClip z_T = q_sample(z0, Timestep{50}, eps, sched);
        EpsModel exact = [&](const LatentClip&, Timestep) { return eps.data; };
        LatentClip rec = ddim_sample(exact, z_T, sched, 50);
        double num = 0, den = 0;
        for (size_t i = 0; i < z0.data.data.size(); ++i) {
            double d = rec.data.data[i] - z0.data.data[i];
            num += d * d;
            den += z0.data.data[i] * z0.data.data[i];
        }
        double rel = std::sqrt(num / den);
        expect(rel < 1e-4, "relative error " + std::to_string(rel));
    });

    // -- 5: anchor prior algebra --------------------------------------------
    run_criterion(5, "anchor prior identities on 10 fixtures", 5.0, [] {
        Rng rng(50);
        for (int rep = 0; rep < 10; ++rep) {
            // Dyadic grid values make the identities exact in double precision.
            auto dyadic = [&](std::vector<int> shape) {
                Tensor t = rng.normal_tensor(std::move(shape));
                for (double& v : t.data) v = std::ldexp(std::round(std::ldexp(v, 16)), -16);
                return t;
            };
            LatentClip eps(dyadic({3, 4, 8, 8}));
            LatentFrame key(dyadic({4, 8, 8}));
            expect(anchor_prior_noise(eps, key, 0.0).data.bitwise_equal(eps.data),
                   "alpha=0 identity");
            double alpha = 0.03125;
            LatentClip out = anchor_prior_noise(eps, key, alpha);
            int64_t per = key.data.size();
            double mean_added = 0, mean_key = 0;
            for (int i = 0; i < 3; ++i)
                for (int64_t j = 0; j < per; ++j) {
                    double added = out.data.data[i * per + j] - eps.data.data[i * per + j];
                    expect(added == alpha * key.data.data[j], "mean-shift identity");
                    expect(out.data.data[i * per + j] - out.data.data[j] ==
                               eps.data.data[i * per + j] - eps.data.data[j],
                           "frame-difference invariance");
                    mean_added += added;
                }
            for (int64_t j = 0; j < per; ++j) mean_key += key.data.data[j];
            expect(mean_added / 3.0 == alpha * mean_key, "aggregate mean shift");
        }
    });

    // -- 6: scheduler oracle --------------------------------------------------
    run_criterion(6, "plan_schedule vs brute-force checker, N<=65, L in 1..8", 10.0, [] {
        for (int L = 1; L <= 8; ++L)
            for (int N = 2; N <= 65; ++N) {
                check_schedule_oracle(plan_schedule(N, L));
                // Purity: a second call yields the identical plan.
                expect(format_schedule(plan_schedule(N, L)) == format_schedule(plan_schedule(N, L)),
                       "plan not pure");
            }
    });

    // -- 9: determinism (cheap models, run before the overfit fixture) ------
    run_criterion(9, "pipeline determinism incl. edit-long workers {1,4}", 300.0, [] {
        TridentConfig cfg = micro_config();
        TridentModel edit_model = fresh_trident(cfg, 90);
        TridentModel interp_model = fresh_trident(TridentConfig::interpolation(cfg), 91);
        LatentCodec codec = LatentCodec::create(CodecConfig{4, 4, 8, 92});
        Vocabulary vocab = Vocabulary::synthetic_default();
        NoiseSchedule sched = default_schedule(10);

        SyntheticSpec spec;
        spec.canvas = 32;
        spec.frames = 9;
        spec.corpus_size = 1;
        spec.seed = 93;
        VideoClip source = generate_synthetic_corpus(spec)[0].clip;

        EditRequest base;
        base.prompt = {"red", "circle", "static", "gray"};
        base.steps = 4;
        base.seed = 94;
        base.reference.entries = {{render_prompt_exemplar({"red", "circle", "gray"}, 32), 0}};

        // Single-run edit determinism.
        EditRequest one = base;
        one.source.fps = source.fps;
        one.source.frames = {source.frames[0], source.frames[1], source.frames[2]};
        one.reference.entries[0].second = 1;
        EditResult a = edit_clip(one, edit_model, codec, sched, vocab);
        EditResult b = edit_clip(one, edit_model, codec, sched, vocab);
        expect(a.edited_latents.data.bitwise_equal(b.edited_latents.data), "edit not bitwise");

        auto sched_plan = plan_schedule(9, 2);
        VideoClip w1 = execute_schedule(sched_plan, source, base, edit_model, interp_model, codec,
                                        sched, vocab, 1);
        VideoClip w1b = execute_schedule(sched_plan, source, base, edit_model, interp_model, codec,
                                         sched, vocab, 1);
        VideoClip w4 = execute_schedule(sched_plan, source, base, edit_model, interp_model, codec,
                                        sched, vocab, 4);
        for (int i = 0; i < 9; ++i) {
            expect(w1.frames[size_t(i)].data.bitwise_equal(w1b.frames[size_t(i)].data),
                   "edit-long repeat not bitwise at frame " + std::to_string(i));
            expect(w1.frames[size_t(i)].data.bitwise_equal(w4.frames[size_t(i)].data),
                   "workers 1 vs 4 differ at frame " + std::to_string(i));
        }
    });

    // -- 10: benchmark tooling -------------------------------------------------
    run_criterion(10, "validator + corpus stats (54/38/8 exact)", 10.0, [] {
        std::string example = std::string(CCEDIT_DATA_DIR) + "/balancecc_example.json";
        ValidationReport rep = load_and_validate(example);
        expect(rep.ok() && rep.records.size() == 4, "shipped example rejected");

        // Six crafted violations, each individually detected.
        std::vector<std::function<void(nlohmann::json&)>> breakers = {
            [](nlohmann::json& r) { r["edits"][3]["edit_type"] = "StyleChange"; },
            [](nlohmann::json& r) { r["edits"][0]["fantasy_level"] = 4; },
            [](nlohmann::json& r) { r["category"] = "Vehicle"; },
            [](nlohmann::json& r) { r["camera_motion"] = 0; },
            [](nlohmann::json& r) { r["edits"].erase(1); },
            [](nlohmann::json& r) { r.erase("description"); },
        };
        for (size_t i = 0; i < breakers.size(); ++i) {
            nlohmann::json rec = conformant_record("crafted-" + std::to_string(i));
            breakers[i](rec);
            nlohmann::json file{{"records", nlohmann::json::array({rec})}};
            expect(!validate_records(file).ok(), "violation " + std::to_string(i) + " accepted");
        }
        nlohmann::json clean{{"records", nlohmann::json::array({conformant_record("ok")})}};
        expect(validate_records(clean).ok(), "conformant crafted record rejected");

        std::vector<BalanceCCRecord> recs;
        for (int i = 0; i < 100; ++i) {
            BalanceCCRecord r = rep.records[size_t(i % 4)];
            r.camera_motion = i < 54 ? 1 : (i < 92 ? 2 : 3);
            recs.push_back(std::move(r));
        }
        CorpusStats st = corpus_stats(recs);
        expect(st.percentages.at("camera_motion").at("1") == 54.0 &&
                   st.percentages.at("camera_motion").at("2") == 38.0 &&
                   st.percentages.at("camera_motion").at("3") == 8.0,
               "camera-motion percentages not 54/38/8");
    });

    // -- 11: temporal consistency exactness ------------------------------------
    run_criterion(11, "temporal_consistency = 1.0 on identical frames (exact)", 10.0, [] {
        LatentCodec codec = LatentCodec::create(CodecConfig{4, 4, 8, 110});
        ToyJointEmbedder emb(codec, 32);
        Rng rng(111);
        for (int rep = 0; rep < 5; ++rep) {
            PixelFrame f(rng.uniform_tensor({3, 32, 32}, -1.0, 1.0));
            VideoClip clip;
            for (int i = 0; i < 4; ++i) clip.frames.push_back(f);
            expect(temporal_consistency(clip, emb) == 1.0, "not exactly 1.0");
        }
    });

    // ---- overfit fixture for criteria 7, 8, 12 ----
    auto t0 = std::chrono::steady_clock::now();
    std::unique_ptr<Overfit> fx;
    std::string fixture_error;
    try {
        fx = std::make_unique<Overfit>();
    } catch (const std::exception& e) {
        fixture_error = e.what();
    }
    std::printf("-- overfit fixture (codec + stages A/B/C): %.1fs%s\n", seconds_since(t0),
                fixture_error.empty() ? "" : (" FAILED: " + fixture_error).c_str());
    std::fflush(stdout);

    // -- 7: appearance propagation ---------------------------------------------
    run_criterion(7, "appearance propagation on the overfit model", 300.0, [&] {
        expect(fx != nullptr, "overfit fixture unavailable: " + fixture_error);
        const SyntheticClip& sc = fx->corpus[0];
        PixelFrame ref = recolor(sc.clip.frames[1]);

        // Reference-color direction per channel, used for the shift sign.
        double dir[3];
        for (int c = 0; c < 3; ++c) {
            double s = 0;
            for (int i = 0; i < 32; ++i)
                for (int j = 0; j < 32; ++j)
                    s += ref.data.at3(c, i, j) - sc.clip.frames[1].data.at3(c, i, j);
            dir[c] = s / (32.0 * 32.0);
        }

        int shift_wins = 0;
        double mae_with = 0, mae_without = 0;
        for (int seed = 0; seed < 10; ++seed) {
            EditRequest req;
            req.source = sc.clip;
            req.prompt = sc.tokens;
            req.steps = 30;
            req.guidance = 1.0;
            req.seed = 700 + uint64_t(seed);
            EditRequest with_ref = req;
            with_ref.reference.entries = {{ref, 1}};
            EditResult a = edit_clip(with_ref, *fx->model, fx->codec, fx->schedule, fx->vocab);
            EditResult b = edit_clip(req, *fx->model, fx->codec, fx->schedule, fx->vocab);

            mae_with += mae(a.edited.frames[1].data, ref.data);
            mae_without += mae(b.edited.frames[1].data, ref.data);

            // Non-keyframe mean channel shift, projected onto the
            // source->reference color direction: positive = correct sign.
            double shift_a = 0;
            for (int f : {0, 2})
                for (int c = 0; c < 3; ++c) {
                    double sa = 0;
                    for (int i = 0; i < 32; ++i)
                        for (int j = 0; j < 32; ++j)
                            sa += a.edited.frames[size_t(f)].data.at3(c, i, j) -
                                  sc.clip.frames[size_t(f)].data.at3(c, i, j);
                    shift_a += dir[c] * sa;
                }
            if (shift_a > 0.0) ++shift_wins;
        }
        std::ostringstream msg;
        msg << "center MAE with ref " << mae_with / 10 << " vs without " << mae_without / 10
            << "; correct-sign color shift " << shift_wins << "/10";
        expect(mae_with < mae_without, "MAE ordering failed: " + msg.str());
        expect(shift_wins >= 8, "color shift below 8/10: " + msg.str());
        std::printf("       %s\n", msg.str().c_str());
    });

    // -- 8: control-scale gating -------------------------------------------------
    run_criterion(8, "control-scale gating + structure sweep ordering", 120.0, [&] {
        // Bitwise gating on 10 fixtures with a fresh trident.
        TridentConfig cfg = micro_config();
        TridentModel tri = fresh_trident(cfg, 80);
        Rng rng(81);
        for (int rep = 0; rep < 10; ++rep) {
            Tensor z = rng.normal_tensor({3, 4, 8, 8});
            StructureSequence seq;
            for (int i = 0; i < 3; ++i) seq.maps.push_back(rng.uniform_tensor({32, 32}, 0.0, 1.0));
            Tensor ref = rng.normal_tensor({4, 8, 8});
            int t = rng.uniform_int(1, 50);
            std::vector<int> ids = {2, 3, 1, 1};

            TridentModel::Conditions c1;
            c1.prompt_ids = ids;
            c1.s_struct = 0.0;
            c1.structure = &seq;
            c1.s_app = 0.0;
            c1.app_latents = {{ref, 1}};
            TridentModel::Conditions c2;
            c2.prompt_ids = ids;
            c2.s_struct = 0.0;
            c2.structure = nullptr;
            c2.s_app = 0.0;
            expect(tri.forward(LatentClip(z), t, c1).bitwise_equal(tri.forward(LatentClip(z), t, c2)),
                   "gating not bitwise on fixture " + std::to_string(rep));
        }

        expect(fx != nullptr, "overfit fixture unavailable: " + fixture_error);
        const SyntheticClip& sc = fx->corpus[1];
        EditRequest req;
        req.source = sc.clip;
        req.prompt = sc.tokens;
        req.steps = 30;
        req.guidance = 1.0;
        req.seed = 800;
        req.s_app = 0.0;
        req.s_struct = 1.0;
        EditResult on = edit_clip(req, *fx->model, fx->codec, fx->schedule, fx->vocab);
        req.s_struct = 0.0;
        EditResult off = edit_clip(req, *fx->model, fx->codec, fx->schedule, fx->vocab);
        double ov_on = edge_overlap(on.edited, sc.clip);
        double ov_off = edge_overlap(off.edited, sc.clip);
        std::printf("       edge-overlap(1)=%.4f edge-overlap(0)=%.4f\n", ov_on, ov_off);
        expect(ov_on >= ov_off, "edge-overlap ordering failed");
    });

    // -- 12: text-alignment ranking -----------------------------------------------
    run_criterion(12, "tex_ali ranking oracle, 8/8 prompt pairs", 300.0, [&] {
        expect(fx != nullptr, "overfit fixture unavailable: " + fixture_error);
        ToyJointEmbedder emb(fx->codec, 32);
        auto rotate = [](const std::string& tok) -> std::string {
            if (tok == "red") return "blue";
            if (tok == "blue") return "green";
            if (tok == "green") return "yellow";
            if (tok == "yellow") return "red";
            if (tok == "dark") return "light";
            if (tok == "light") return "gray";
            if (tok == "gray") return "dark";
            if (tok == "circle") return "square";
            if (tok == "square") return "triangle";
            if (tok == "triangle") return "circle";
            return tok;  // motion tokens stay
        };
        int wins = 0;
        for (int k = 0; k < 8; ++k) {
            const SyntheticClip& sc = fx->corpus[size_t(k)];
            EditRequest req;
            req.source = sc.clip;
            req.prompt = sc.tokens;
            req.steps = 30;
            req.guidance = 1.0;
            req.seed = 1200 + uint64_t(k);
            req.reference.entries = {{sc.clip.frames[1], 1}};
            EditResult res = edit_clip(req, *fx->model, fx->codec, fx->schedule, fx->vocab);

            std::vector<std::string> disjoint;
            for (const auto& tok : sc.tokens) disjoint.push_back(rotate(tok));
            double own = text_alignment(res.edited, sc.tokens, emb);
            double other = text_alignment(res.edited, disjoint, emb);
            if (own > other) ++wins;
        }
        expect(wins == 8, "ranking wins " + std::to_string(wins) + "/8");
    });

    std::printf("acceptance: %d of 12 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
