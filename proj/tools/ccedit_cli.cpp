// ccedit: command-line workflows for the trident video-editing stack.
//
// Exit codes: 0 success, 1 usage error, 2 validation error (bad inputs,
// schema violations, refused overwrites, missing prerequisites), 3 runtime
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "ccedit/benchmark.hpp"
#include "ccedit/io.hpp"
#include "ccedit/long_video.hpp"
#include "ccedit/pipeline.hpp"
#include "ccedit/training.hpp"

namespace fs = std::filesystem;
using namespace ccedit;

namespace {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path))
        throw ValidationError("missing prerequisite: " + what + " not found at " + path);
}

void refuse_overwrite(const std::string& path, bool force) {
    if (!fs::exists(path)) return;
    if (!force) throw ValidationError("refusing to overwrite " + path + " (pass --force)");
    fs::remove_all(path);
}

// ---- corpus directory layout: spec.json, vocab.txt, clip_%04d/ + prompt.txt

void write_corpus(const std::string& dir, const SyntheticSpec& spec,
                  const std::vector<SyntheticClip>& corpus, const Vocabulary& vocab) {
    fs::create_directories(dir);
    save_json((fs::path(dir) / "spec.json").string(),
              {{"canvas", spec.canvas},
               {"frames", spec.frames},
               {"fps", spec.fps},
               {"corpus_size", spec.corpus_size},
               {"seed", spec.seed}});
    vocab.save((fs::path(dir) / "vocab.txt").string());
    for (size_t i = 0; i < corpus.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%04zu", i);
        auto cdir = fs::path(dir) / name;
        write_clip(cdir.string(), corpus[i].clip);
        std::ofstream ps(cdir / "prompt.txt");
        for (size_t t = 0; t < corpus[i].tokens.size(); ++t)
            ps << (t ? " " : "") << corpus[i].tokens[t];
        ps << "\n";
    }
}

struct LoadedCorpus {
    SyntheticSpec spec;
    Vocabulary vocab;
    std::vector<SyntheticClip> clips;
};

LoadedCorpus load_corpus(const std::string& dir) {
    require_file((fs::path(dir) / "spec.json").string(), "corpus spec");
    LoadedCorpus lc;
    auto j = load_json((fs::path(dir) / "spec.json").string());
    lc.spec.canvas = j.at("canvas").get<int>();
    lc.spec.frames = j.at("frames").get<int>();
    lc.spec.fps = j.at("fps").get<double>();
    lc.spec.corpus_size = j.at("corpus_size").get<int>();
    lc.spec.seed = j.at("seed").get<uint64_t>();
    lc.vocab = Vocabulary::load((fs::path(dir) / "vocab.txt").string());
    for (int i = 0; i < lc.spec.corpus_size; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%04d", i);
        auto cdir = fs::path(dir) / name;
        SyntheticClip sc;
        sc.clip = read_clip(cdir.string());
        std::ifstream ps(cdir / "prompt.txt");
        std::string tok;
        while (ps >> tok) sc.tokens.push_back(tok);
        if (sc.tokens.empty()) throw ValidationError("corpus clip without prompt: " + cdir.string());
        lc.clips.push_back(std::move(sc));
    }
    return lc;
}

LatentCodec load_codec(const std::string& path) {
    require_file(path, "codec checkpoint");
    return LatentCodec::from_checkpoint(Checkpoint::load(path));
}

TridentModel load_trident(const std::string& path, const std::string& what) {
    require_file(path, what);
    return TridentModel::from_checkpoint(Checkpoint::load(path));
}

// ---- edit request file: documented key set, paths relative to the caller

EditRequest load_request(const std::string& path) {
    require_file(path, "edit request");
    auto j = load_json(path);
    EditRequest req;
    req.source = read_clip(j.at("source").get<std::string>());
    req.prompt = j.at("prompt").get<std::vector<std::string>>();
    if (j.contains("structure"))
        req.structure = structure_kind_from_string(j["structure"].get<std::string>());
    if (j.contains("reference"))
        for (const auto& r : j["reference"])
            req.reference.entries.emplace_back(read_ppm(r.at("image").get<std::string>()),
                                               r.at("index").get<int>());
    if (j.contains("s_struct") && !j["s_struct"].is_null())
        req.s_struct = j["s_struct"].get<double>();
    if (j.contains("s_app") && !j["s_app"].is_null()) req.s_app = j["s_app"].get<double>();
    if (j.contains("guidance")) req.guidance = j["guidance"].get<double>();
    if (j.contains("steps")) req.steps = j["steps"].get<int>();
    if (j.contains("alpha")) req.alpha = j["alpha"].get<double>();
    if (j.contains("seed")) req.seed = j["seed"].get<uint64_t>();
    return req;
}

// Flag overrides shared by edit-style commands; applied only when the user
// actually passed the flag.
struct EditFlags {
    std::optional<uint64_t> seed;
    std::optional<int> steps;
    std::optional<double> guidance, alpha, s_struct, s_app;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override request seed");
        cmd->add_option("--steps", steps, "override DDIM steps");
        cmd->add_option("--guidance", guidance, "override guidance scale w");
        cmd->add_option("--alpha", alpha, "override anchor prior strength");
        cmd->add_option("--s-struct", s_struct, "override structure injection scale");
        cmd->add_option("--s-app", s_app, "override appearance injection scale");
    }
    void apply(EditRequest& req) const {
        if (seed) req.seed = *seed;
        if (steps) req.steps = *steps;
        if (guidance) req.guidance = *guidance;
        if (alpha) req.alpha = *alpha;
        if (s_struct) req.s_struct = *s_struct;
        if (s_app) req.s_app = *s_app;
    }
};

void echo_request(const EditRequest& req, const TridentModel& model) {
    std::cout << "edit: steps=" << req.steps << " guidance=" << req.guidance
              << " alpha=" << req.alpha
              << " s_struct=" << req.s_struct.value_or(model.config().s_struct)
              << " s_app=" << req.s_app.value_or(model.config().s_app) << " seed=" << req.seed
              << "\n";
}

void write_edit_result(const std::string& out, const EditResult& res, bool force) {
    refuse_overwrite(out, force);
    write_clip(out, res.edited);
    save_json((fs::path(out) / "provenance.json").string(), res.provenance);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CCEdit-style controllable video editing, desk scale"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file with long-option defaults");

    int exit_code = 0;
    auto guard = [&](auto&& fn) {
        return [&, fn] {
            try {
                fn();
            } catch (const ValidationError& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 2;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 3;
            }
        };
    };

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "generate the synthetic moving-shapes corpus");
    SyntheticSpec gspec;
    std::string gen_out;
    bool gen_force = false;
    gen->add_option("--out", gen_out, "corpus directory")->required();
    gen->add_option("--seed", gspec.seed, "corpus seed");
    gen->add_option("--frames", gspec.frames, "frames per clip");
    gen->add_option("--canvas", gspec.canvas, "frame side length");
    gen->add_option("--corpus-size", gspec.corpus_size, "number of clips");
    gen->add_option("--fps", gspec.fps, "clip frame rate");
    gen->add_flag("--force", gen_force, "overwrite existing output");
    gen->callback(guard([&] {
        refuse_overwrite(gen_out, gen_force);
        auto corpus = generate_synthetic_corpus(gspec);
        write_corpus(gen_out, gspec, corpus, Vocabulary::synthetic_default());
        std::cout << "gen-data: wrote " << corpus.size() << " clips to " << gen_out << "\n";
    }));

    // ---- train-codec ----
    auto* tc = app.add_subcommand("train-codec", "train the pixel/latent codec");
    std::string tc_corpus, tc_out;
    bool tc_force = false;
    CodecConfig tc_cfg;
    CodecTrainConfig tc_train;
    tc->add_option("--corpus", tc_corpus, "corpus directory")->required();
    tc->add_option("--out", tc_out, "output checkpoint")->required();
    tc->add_option("--seed", tc_train.seed, "training seed");
    tc->add_option("--steps", tc_train.steps, "training steps");
    tc->add_option("--lr", tc_train.lr, "learning rate");
    tc->add_option("--batch", tc_train.batch, "batch size");
    tc->add_option("--width", tc_cfg.width, "hidden channel width");
    tc->add_option("--optimizer", tc_train.optimizer, "adam | sgd");
    tc->add_flag("--force", tc_force, "overwrite existing output");
    tc->callback(guard([&] {
        refuse_overwrite(tc_out, tc_force);
        auto lc = load_corpus(tc_corpus);
        std::vector<PixelFrame> frames;
        for (const auto& c : lc.clips)
            for (const auto& f : c.clip.frames) frames.push_back(f);
        tc_cfg.seed = tc_train.seed;
        LatentCodec codec = train_codec(frames, tc_cfg, tc_train);
        codec.to_checkpoint().save(tc_out);
        std::cout << "train-codec: saved " << tc_out << "\n";
    }));

    // ---- shared training-stage flags ----
    struct StageArgs {
        std::string corpus, codec, out, log;
        bool force = false;
        TrainConfig cfg;
        int c0 = 32, c1 = 64, time_dim = 32;
    };
    auto add_stage_flags = [](CLI::App* cmd, StageArgs& a, bool model_shape) {
        cmd->add_option("--corpus", a.corpus, "corpus directory")->required();
        cmd->add_option("--codec", a.codec, "codec checkpoint")->required();
        cmd->add_option("--out", a.out, "output checkpoint")->required();
        cmd->add_option("--seed", a.cfg.seed, "stage seed");
        cmd->add_option("--steps", a.cfg.steps, "training steps");
        cmd->add_option("--lr", a.cfg.lr, "learning rate");
        cmd->add_option("--T", a.cfg.T, "diffusion timestep count");
        cmd->add_option("--optimizer", a.cfg.optimizer, "adam | sgd");
        cmd->add_option("--log", a.log, "training log file (appended)");
        cmd->add_flag("--force", a.force, "overwrite existing output");
        if (model_shape) {
            cmd->add_option("--c0", a.c0, "first-level channels");
            cmd->add_option("--c1", a.c1, "second-level channels");
            cmd->add_option("--time-dim", a.time_dim, "timestep embedding width");
        }
    };
    auto finish_stage = [](const StageArgs& a, TridentModel& model,
                           const std::vector<StageLogEntry>& log, const char* name) {
        model.to_checkpoint().save(a.out);
        if (!a.log.empty()) append_training_log(a.log, log);
        std::cout << name << ": saved " << a.out << "\n";
    };

    // ---- pretrain-t2i ----
    auto* pt = app.add_subcommand("pretrain-t2i", "stage A: spatial text-to-image pretraining");
    auto pt_args = std::make_shared<StageArgs>();
    add_stage_flags(pt, *pt_args, true);
    pt->callback(guard([&, pt_args] {
        StageArgs& a = *pt_args;
        refuse_overwrite(a.out, a.force);
        auto lc = load_corpus(a.corpus);
        LatentCodec codec = load_codec(a.codec);
        TridentConfig mcfg;
        mcfg.frames_per_run = lc.spec.frames;
        mcfg.c_latent = codec.config().c_latent;
        mcfg.c0 = a.c0;
        mcfg.c1 = a.c1;
        mcfg.time_dim = a.time_dim;
        a.cfg.stage = "t2i";
        std::vector<StageLogEntry> log;
        TridentModel model = pretrain_t2i(lc.clips, codec, lc.vocab, mcfg, a.cfg, &log);
        finish_stage(a, model, log, "pretrain-t2i");
    }));

    // ---- pretrain-structure ----
    auto* ps = app.add_subcommand("pretrain-structure",
                                  "stage B: structure branch on frozen T2I weights");
    auto ps_args = std::make_shared<StageArgs>();
    std::string ps_t2i;
    add_stage_flags(ps, *ps_args, false);
    ps->add_option("--t2i", ps_t2i, "stage-A checkpoint")->required();
    ps->callback(guard([&, ps_args] {
        StageArgs& a = *ps_args;
        refuse_overwrite(a.out, a.force);
        require_file(ps_t2i, "t2i checkpoint");
        auto lc = load_corpus(a.corpus);
        LatentCodec codec = load_codec(a.codec);
        Checkpoint t2i = Checkpoint::load(ps_t2i);
        TridentConfig mcfg = TridentConfig::from_json(t2i.config.at("trident"));
        a.cfg.stage = "structure";
        std::vector<StageLogEntry> log;
        TridentModel model =
            pretrain_structure_branch(lc.clips, codec, lc.vocab, t2i, mcfg, a.cfg, &log);
        finish_stage(a, model, log, "pretrain-structure");
    }));

    // ---- train / train-interp ----
    auto add_stage_c = [&](const char* name, const char* desc, bool interp) {
        auto* cmd = app.add_subcommand(name, desc);
        auto args = std::make_shared<StageArgs>();
        auto model_path = std::make_shared<std::string>();
        add_stage_flags(cmd, *args, false);
        cmd->add_option("--model", *model_path, "stage-B checkpoint")->required();
        cmd->callback(guard([&, args, model_path, interp, name] {
            StageArgs& a = *args;
            refuse_overwrite(a.out, a.force);
            require_file(*model_path, "stage-B checkpoint");
            auto lc = load_corpus(a.corpus);
            LatentCodec codec = load_codec(a.codec);
            Checkpoint ck = Checkpoint::load(*model_path);
            if (interp) {
                TridentConfig cfg = TridentConfig::from_json(ck.config.at("trident"));
                ck.config["trident"] = TridentConfig::interpolation(cfg).to_json();
            }
            TridentModel model = TridentModel::from_checkpoint(ck);
            a.cfg.stage = interp ? "interpolation" : "temporal_appearance";
            std::vector<StageLogEntry> log;
            train_temporal_appearance(lc.clips, codec, lc.vocab, model, a.cfg, &log);
            finish_stage(a, model, log, name);
        }));
    };
    add_stage_c("train", "stage C: temporal + appearance training (edit model)", false);
    add_stage_c("train-interp", "stage C variant: interpolation model (two endpoint references)",
                true);

    // ---- edit ----
    auto* ed = app.add_subcommand("edit", "run one editing pass from a request file");
    std::string ed_request, ed_model, ed_codec, ed_out;
    int ed_T = 50;
    bool ed_force = false, ed_dry = false;
    EditFlags ed_flags;
    ed->add_option("--request", ed_request, "edit request file")->required();
    ed->add_option("--model", ed_model, "edit-model checkpoint")->required();
    ed->add_option("--codec", ed_codec, "codec checkpoint")->required();
    ed->add_option("--out", ed_out, "output clip directory")->required();
    ed->add_option("--T", ed_T, "schedule timestep count");
    ed->add_flag("--force", ed_force, "overwrite existing output");
    ed->add_flag("--dry-run", ed_dry, "echo the effective request without editing");
    ed_flags.add_to(ed);
    ed->callback(guard([&] {
        EditRequest req = load_request(ed_request);
        ed_flags.apply(req);
        TridentModel model = load_trident(ed_model, "edit-model checkpoint");
        echo_request(req, model);
        if (ed_dry) return;
        LatentCodec codec = load_codec(ed_codec);
        Vocabulary vocab = Vocabulary::synthetic_default();
        EditResult res = edit_clip(req, model, codec, default_schedule(ed_T), vocab);
        write_edit_result(ed_out, res, ed_force);
        std::cout << "edit: wrote " << ed_out << "\n";
    }));

    // ---- schedule ----
    auto* sc = app.add_subcommand("schedule", "print the long-video run plan");
    int sc_N = 0, sc_L = 0;
    bool sc_dry = false;
    sc->add_option("--frames", sc_N, "total frame count N")->required();
    sc->add_option("--stride-L", sc_L, "keyframe stride L")->required();
    sc->add_flag("--dry-run", sc_dry, "accepted for symmetry; schedule never edits");
    sc->callback(guard([&] {
        try {
            std::cout << format_schedule(plan_schedule(sc_N, sc_L));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
    }));

    // ---- edit-long ----
    auto* el = app.add_subcommand("edit-long", "hierarchical long-video editing");
    std::string el_video, el_ref, el_model, el_interp, el_codec, el_out, el_structure = "edge";
    std::vector<std::string> el_prompt;
    int el_L = 4, el_T = 50, el_workers = 1;
    bool el_force = false, el_dry = false;
    EditFlags el_flags;
    el->add_option("--video", el_video, "source clip directory")->required();
    el->add_option("--reference", el_ref, "edited initial-run center keyframe (ppm)")->required();
    el->add_option("--prompt", el_prompt, "prompt tokens")->required();
    el->add_option("--model", el_model, "edit-model checkpoint")->required();
    el->add_option("--interp-model", el_interp, "interpolation-model checkpoint")->required();
    el->add_option("--codec", el_codec, "codec checkpoint")->required();
    el->add_option("--out", el_out, "output clip directory")->required();
    el->add_option("--stride-L", el_L, "keyframe stride L");
    el->add_option("--structure", el_structure, "edge | depth_proxy");
    el->add_option("--workers", el_workers, "interpolation-run threads");
    el->add_option("--T", el_T, "schedule timestep count");
    el->add_flag("--force", el_force, "overwrite existing output");
    el->add_flag("--dry-run", el_dry, "print the plan and stop");
    el_flags.add_to(el);
    el->callback(guard([&] {
        require_file(el_video, "source clip");
        VideoClip source = read_clip(el_video);
        KeyframeSchedule sched;
        try {
            sched = plan_schedule(source.length(), el_L);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
        std::cout << format_schedule(sched);
        if (el_dry) return;
        require_file(el_ref, "edited keyframe reference");
        EditRequest base;
        base.prompt = el_prompt;
        base.structure = structure_kind_from_string(el_structure);
        base.reference.entries = {{read_ppm(el_ref), 0}};
        el_flags.apply(base);
        TridentModel edit_model = load_trident(el_model, "edit-model checkpoint");
        TridentModel interp_model = load_trident(el_interp, "interpolation-model checkpoint");
        LatentCodec codec = load_codec(el_codec);
        Vocabulary vocab = Vocabulary::synthetic_default();
        VideoClip out = execute_schedule(sched, source, base, edit_model, interp_model, codec,
                                         default_schedule(el_T), vocab, el_workers);
        refuse_overwrite(el_out, el_force);
        write_clip(el_out, out);
        save_json((fs::path(el_out) / "provenance.json").string(),
                  {{"plan", format_schedule(sched)},
                   {"base_seed", base.seed},
                   {"workers", el_workers},
                   {"model_hash", store_hash(edit_model.store())},
                   {"interp_model_hash", store_hash(interp_model.store())},
                   {"codec_hash", store_hash(codec.store())}});
        std::cout << "edit-long: wrote " << out.length() << " frames to " << el_out << "\n";
    }));

    // ---- sweep-scales ----
    auto* sw = app.add_subcommand("sweep-scales", "edit once per scale value and report fidelity");
    std::string sw_request, sw_model, sw_codec, sw_out, sw_axis;
    std::vector<double> sw_values;
    int sw_T = 50;
    bool sw_force = false;
    sw->add_option("--request", sw_request, "edit request file")->required();
    sw->add_option("--model", sw_model, "edit-model checkpoint")->required();
    sw->add_option("--codec", sw_codec, "codec checkpoint")->required();
    sw->add_option("--out", sw_out, "report directory")->required();
    sw->add_option("--axis", sw_axis, "structure | appearance")
        ->required()
        ->check(CLI::IsMember({"structure", "appearance"}));
    sw->add_option("--values", sw_values, "scale values in [0,1]")->required()->expected(1, -1);
    sw->add_option("--T", sw_T, "schedule timestep count");
    sw->add_flag("--force", sw_force, "overwrite existing output");
    sw->callback(guard([&] {
        for (double v : sw_values)
            if (v < 0.0 || v > 1.0) throw ValidationError("scale values must lie in [0,1]");
        EditRequest req = load_request(sw_request);
        bool structure_axis = sw_axis == "structure";
        if (!structure_axis && req.reference.entries.empty())
            throw ValidationError("appearance sweep needs a reference in the request");
        TridentModel model = load_trident(sw_model, "edit-model checkpoint");
        LatentCodec codec = load_codec(sw_codec);
        Vocabulary vocab = Vocabulary::synthetic_default();
        NoiseSchedule schedule = default_schedule(sw_T);
        refuse_overwrite(sw_out, sw_force);
        fs::create_directories(sw_out);

        nlohmann::json rows = nlohmann::json::array();
        std::cout << "value\tfidelity\n";
        for (size_t i = 0; i < sw_values.size(); ++i) {
            EditRequest r = req;
            if (structure_axis)
                r.s_struct = sw_values[i];
            else
                r.s_app = sw_values[i];
            EditResult res = edit_clip(r, model, codec, schedule, vocab);
            double fidelity;
            if (structure_axis) {
                fidelity = edge_overlap(res.edited, req.source);
            } else {
                const auto& [ref, idx] = req.reference.entries[0];
                double mae = 0;
                const Tensor& o = res.edited.frames[size_t(idx)].data;
                for (size_t k = 0; k < o.data.size(); ++k)
                    mae += std::abs(o.data[k] - ref.data.data[k]);
                fidelity = mae / double(o.data.size());
            }
            write_clip((fs::path(sw_out) / ("scale_" + std::to_string(i))).string(), res.edited);
            rows.push_back({{"value", sw_values[i]}, {"fidelity", fidelity}});
            std::cout << sw_values[i] << "\t" << fidelity << "\n";
        }
        save_json((fs::path(sw_out) / "report.json").string(),
                  {{"axis", sw_axis},
                   {"metric", structure_axis ? "edge_overlap_vs_source" : "mae_to_reference"},
                   {"rows", rows}});
    }));

    // ---- validate ----
    auto* va = app.add_subcommand("validate", "check a benchmark records file");
    std::string va_records;
    va->add_option("--records", va_records, "records file")->required();
    va->callback(guard([&] {
        require_file(va_records, "records file");
        ValidationReport rep = load_and_validate(va_records);
        for (const auto& i : rep.issues)
            std::cout << i.record_id << ": " << i.field << ": " << i.message << "\n";
        std::cout << "validate: " << rep.records.size() << " records, " << rep.issues.size()
                  << " issues\n";
        if (!rep.ok()) throw ValidationError("records file has violations");
    }));

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "temporal-consistency and text-alignment metrics");
    std::string ev_clip, ev_codec, ev_out;
    std::vector<std::string> ev_prompt;
    ev->add_option("--clip", ev_clip, "edited clip directory")->required();
    ev->add_option("--prompt", ev_prompt, "target prompt tokens")->required();
    ev->add_option("--codec", ev_codec, "codec checkpoint (embedder backbone)")->required();
    ev->add_option("--out", ev_out, "report directory (optional)");
    ev->callback(guard([&] {
        require_file(ev_clip, "edited clip");
        VideoClip clip = read_clip(ev_clip);
        LatentCodec codec = load_codec(ev_codec);
        ToyJointEmbedder emb(codec, clip.frames[0].height());
        MetricsReport rep = evaluate_clip(clip, ev_prompt, emb);
        std::cout << rep.table();
        if (!ev_out.empty()) {
            fs::create_directories(ev_out);
            save_json((fs::path(ev_out) / "metrics.json").string(), rep.to_json());
            std::ofstream tsv(fs::path(ev_out) / "metrics.tsv");
            tsv << rep.table();
        }
    }));

    // ---- corpus stats over a records file ----
    auto* st = app.add_subcommand("stats", "attribute histograms of a records file");
    std::string st_records;
    st->add_option("--records", st_records, "records file")->required();
    st->callback(guard([&] {
        require_file(st_records, "records file");
        ValidationReport rep = load_and_validate(st_records);
        if (!rep.ok()) throw ValidationError("records file has violations; run validate");
        std::cout << corpus_stats(rep.records).table();
    }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors (incl. bad flags) -> 1
    }
    return exit_code;
}
