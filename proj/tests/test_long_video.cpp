#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "ccedit/long_video.hpp"
#include "ccedit/training.hpp"

using namespace ccedit;

namespace {

// Independent verifier of every scheduling invariant: coverage, uniqueness,
// keyframe placement, run shapes, and reference chaining.
void check_schedule(const KeyframeSchedule& s) {
    int L = s.L, l = L + 1;
    REQUIRE(s.padded_N >= s.N);
    REQUIRE((s.padded_N - 1) % L == 0);

    std::vector<int> expect_keys;
    for (int i = 0; i < s.padded_N; i += L) expect_keys.push_back(i);
    REQUIRE(s.keyframe_indices == expect_keys);
    REQUIRE(s.keyframe_indices.back() == s.padded_N - 1);
    std::set<int> keyset(expect_keys.begin(), expect_keys.end());

    bool degenerate = s.N <= l;
    if (degenerate) {
        REQUIRE(s.padded_N == l);
    } else {
        // Minimal padding under the chaining constraint.
        REQUIRE((s.padded_N - 1) % (L * L) == 0);
        REQUIRE(s.padded_N - s.N < L * L);
    }

    std::map<int, int> edited_by;  // padded frame index -> owning run
    std::map<int, int> key_owner;  // keyframe index -> keyframe-run that edits it
    int prev_keyrun_last = -1;
    int n_keyruns = 0;
    for (size_t ri = 0; ri < s.runs.size(); ++ri) {
        const RunPlan& r = s.runs[ri];
        REQUIRE(r.index == int(ri));
        REQUIRE(int(r.frame_indices.size()) == l);
        for (int f : r.frame_indices) {
            REQUIRE(f >= 0);
            REQUIRE(f < s.padded_N);
        }
        REQUIRE(r.reference_positions.size() == r.reference_runs.size());

        if (r.mode == RunPlan::Mode::kInitial) {
            REQUIRE(ri == 0);
            REQUIRE(r.reference_positions == std::vector<int>{default_reference_index(l)});
            REQUIRE(r.reference_runs == std::vector<int>{-1});
            for (int p = 0; p <= L; ++p) {
                REQUIRE(edited_by.emplace(r.frame_indices[size_t(p)], r.index).second);
                key_owner[r.frame_indices[size_t(p)]] = r.index;
            }
            if (!degenerate)
                for (int f : r.frame_indices) REQUIRE(keyset.count(f) == 1);
            prev_keyrun_last = r.frame_indices.back();
            ++n_keyruns;
        } else if (r.mode == RunPlan::Mode::kExtension) {
            REQUIRE_FALSE(degenerate);
            REQUIRE(int(ri) == n_keyruns);  // keyframe runs come first, chained
            REQUIRE(r.frame_indices.front() == prev_keyrun_last);
            REQUIRE(r.reference_positions == std::vector<int>{0});
            REQUIRE(r.reference_runs == std::vector<int>{r.index - 1});
            for (int f : r.frame_indices) REQUIRE(keyset.count(f) == 1);
            for (int p = 1; p <= L; ++p) {
                REQUIRE(edited_by.emplace(r.frame_indices[size_t(p)], r.index).second);
                key_owner[r.frame_indices[size_t(p)]] = r.index;
            }
            prev_keyrun_last = r.frame_indices.back();
            ++n_keyruns;
        } else {
            REQUIRE_FALSE(degenerate);
            REQUIRE(L >= 2);
            // Consecutive frames between two adjacent keyframes.
            int a = r.frame_indices.front();
            REQUIRE(keyset.count(a) == 1);
            REQUIRE(keyset.count(a + L) == 1);
            for (int p = 0; p <= L; ++p) REQUIRE(r.frame_indices[size_t(p)] == a + p);
            REQUIRE(r.reference_positions == std::vector<int>({0, L}));
            // Endpoint references come from the keyframe runs that own them.
            REQUIRE(r.reference_runs[0] == key_owner.at(a));
            REQUIRE(r.reference_runs[1] == key_owner.at(a + L));
            REQUIRE(r.reference_runs[0] < r.index);
            REQUIRE(r.reference_runs[1] < r.index);
            for (int p = 1; p < L; ++p)
                REQUIRE(edited_by.emplace(r.frame_indices[size_t(p)], r.index).second);
        }
    }
    // Every padded frame edited exactly once.
    REQUIRE(int(edited_by.size()) == s.padded_N);
    // Non-keyframes owned by interpolation runs, keyframes by keyframe runs.
    if (!degenerate)
        for (const auto& [f, run] : edited_by) {
            bool is_key = keyset.count(f) == 1;
            CHECK(is_key == (s.runs[size_t(run)].mode != RunPlan::Mode::kInterpolation));
        }
}

TridentConfig micro_config() {
    TridentConfig cfg;
    cfg.frames_per_run = 3;
    cfg.c_latent = 4;
    cfg.c0 = 8;
    cfg.c1 = 8;
    cfg.time_dim = 8;
    cfg.text.n_tokens = 4;
    cfg.text.d_text = 8;
    return cfg;
}

struct Fixture {
    Vocabulary vocab = Vocabulary::synthetic_default();
    LatentCodec codec = LatentCodec::create(CodecConfig{4, 4, 8, 3});
    TridentModel edit_model;
    TridentModel interp_model;
    NoiseSchedule schedule = default_schedule(10);

    Fixture()
        : edit_model(TridentModel::init_from_t2i(
              TridentModel::create_t2i(micro_config(), Vocabulary::synthetic_default().size(), 1)
                  .to_checkpoint(),
              micro_config(), 101)),
          interp_model(TridentModel::init_from_t2i(
              TridentModel::create_t2i(micro_config(), Vocabulary::synthetic_default().size(), 1)
                  .to_checkpoint(),
              TridentConfig::interpolation(micro_config()), 202)) {}

    VideoClip long_source(int frames) const {
        SyntheticSpec spec;
        spec.canvas = 32;
        spec.frames = frames;
        spec.corpus_size = 1;
        spec.seed = 6;
        return generate_synthetic_corpus(spec)[0].clip;
    }

    EditRequest base_request() const {
        EditRequest req;
        req.prompt = {"blue", "circle", "static", "gray"};
        req.steps = 4;
        req.seed = 50;
        req.reference.entries = {{render_prompt_exemplar({"blue", "circle", "gray"}, 32), 0}};
        return req;
    }
};

}  // namespace

TEST_CASE("plan_schedule: worked examples") {
    SUBCASE("N=17 L=4: one keyframe run plus four interpolations") {
        auto s = plan_schedule(17, 4);
        CHECK(s.padded_N == 17);
        CHECK(s.keyframe_indices == std::vector<int>{0, 4, 8, 12, 16});
        REQUIRE(s.runs.size() == 5);
        CHECK(s.runs[0].mode == RunPlan::Mode::kInitial);
        CHECK(s.runs[0].frame_indices == std::vector<int>{0, 4, 8, 12, 16});
        for (int i = 1; i < 5; ++i) CHECK(s.runs[size_t(i)].mode == RunPlan::Mode::kInterpolation);
        CHECK(s.runs[1].frame_indices == std::vector<int>{0, 1, 2, 3, 4});
        CHECK(s.runs[4].frame_indices == std::vector<int>{12, 13, 14, 15, 16});
    }
    SUBCASE("N=33 L=4: initial + one extension + eight interpolations") {
        auto s = plan_schedule(33, 4);
        CHECK(s.padded_N == 33);
        REQUIRE(s.runs.size() == 10);
        CHECK(s.runs[0].mode == RunPlan::Mode::kInitial);
        CHECK(s.runs[0].frame_indices == std::vector<int>{0, 4, 8, 12, 16});
        CHECK(s.runs[1].mode == RunPlan::Mode::kExtension);
        CHECK(s.runs[1].frame_indices == std::vector<int>{16, 20, 24, 28, 32});
        int interp = 0;
        for (const auto& r : s.runs) interp += r.mode == RunPlan::Mode::kInterpolation;
        CHECK(interp == 8);
    }
    SUBCASE("N=L+1 degenerates to a single run") {
        auto s = plan_schedule(5, 4);
        CHECK(s.padded_N == 5);
        REQUIRE(s.runs.size() == 1);
        CHECK(s.runs[0].mode == RunPlan::Mode::kInitial);
        CHECK(s.runs[0].frame_indices == std::vector<int>{0, 1, 2, 3, 4});
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(plan_schedule(1, 4), std::invalid_argument);
        CHECK_THROWS_AS(plan_schedule(10, 0), std::invalid_argument);
    }
}

TEST_CASE("plan_schedule: brute-force invariants over the whole desk range") {
    for (int L = 1; L <= 8; ++L)
        for (int N = 2; N <= 65; ++N) check_schedule(plan_schedule(N, L));
}

TEST_CASE("plan_schedule is a pure function of (N, L)") {
    auto a = plan_schedule(33, 4);
    auto b = plan_schedule(33, 4);
    CHECK(format_schedule(a) == format_schedule(b));
}

TEST_CASE("format_schedule lists every run with provenance") {
    std::string txt = format_schedule(plan_schedule(33, 4));
    CHECK(txt.find("schedule N=33 L=4 padded_N=33") != std::string::npos);
    CHECK(txt.find("keyframes: 0 4 8 12 16 20 24 28 32") != std::string::npos);
    CHECK(txt.find("run 0 mode=initial frames=0,4,8,12,16 refs=pos2:user") != std::string::npos);
    CHECK(txt.find("run 1 mode=extension frames=16,20,24,28,32 refs=pos0:run0") !=
          std::string::npos);
    CHECK(txt.find("run 2 mode=interpolation frames=0,1,2,3,4 refs=pos0:run0;pos4:run0") !=
          std::string::npos);
    CHECK(std::count(txt.begin(), txt.end(), '\n') == 12);
}

TEST_CASE("execute_schedule matches a hand-rolled run sequence (N=5, L=2)") {
    Fixture fx;
    VideoClip source = fx.long_source(5);
    EditRequest base = fx.base_request();
    auto sched = plan_schedule(5, 2);
    REQUIRE(sched.runs.size() == 3);

    VideoClip out = execute_schedule(sched, source, base, fx.edit_model, fx.interp_model,
                                     fx.codec, fx.schedule, fx.vocab);
    REQUIRE(out.length() == 5);

    // Initial keyframe run over frames (0, 2, 4), user reference at center.
    EditRequest r0 = base;
    r0.source.fps = source.fps;
    r0.source.frames = {source.frames[0], source.frames[2], source.frames[4]};
    r0.reference.entries = {{base.reference.entries[0].first, 1}};
    r0.seed = base.seed + 0;
    EditResult k = edit_clip(r0, fx.edit_model, fx.codec, fx.schedule, fx.vocab);

    // Interpolation runs between adjacent keyframes.
    auto interp = [&](int a, const PixelFrame& e0, const PixelFrame& e1, uint64_t seed) {
        EditRequest r = base;
        r.source.fps = source.fps;
        r.source.frames = {source.frames[size_t(a)], source.frames[size_t(a + 1)],
                           source.frames[size_t(a + 2)]};
        r.reference.entries = {{e0, 0}, {e1, 2}};
        r.seed = seed;
        return edit_clip(r, fx.interp_model, fx.codec, fx.schedule, fx.vocab);
    };
    EditResult i0 = interp(0, k.edited.frames[0], k.edited.frames[1], base.seed + 1);
    EditResult i1 = interp(2, k.edited.frames[1], k.edited.frames[2], base.seed + 2);

    CHECK(out.frames[0].data.bitwise_equal(k.edited.frames[0].data));
    CHECK(out.frames[2].data.bitwise_equal(k.edited.frames[1].data));
    CHECK(out.frames[4].data.bitwise_equal(k.edited.frames[2].data));
    CHECK(out.frames[1].data.bitwise_equal(i0.edited.frames[1].data));
    CHECK(out.frames[3].data.bitwise_equal(i1.edited.frames[1].data));
}

TEST_CASE("execute_schedule: deterministic and worker-count independent") {
    Fixture fx;
    VideoClip source = fx.long_source(9);
    EditRequest base = fx.base_request();
    auto sched = plan_schedule(9, 2);

    VideoClip w1 = execute_schedule(sched, source, base, fx.edit_model, fx.interp_model, fx.codec,
                                    fx.schedule, fx.vocab, 1);
    VideoClip w4 = execute_schedule(sched, source, base, fx.edit_model, fx.interp_model, fx.codec,
                                    fx.schedule, fx.vocab, 4);
    VideoClip again = execute_schedule(sched, source, base, fx.edit_model, fx.interp_model,
                                       fx.codec, fx.schedule, fx.vocab, 1);
    REQUIRE(w1.length() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK(w1.frames[size_t(i)].data.bitwise_equal(w4.frames[size_t(i)].data));
        CHECK(w1.frames[size_t(i)].data.bitwise_equal(again.frames[size_t(i)].data));
    }
}

TEST_CASE("execute_schedule: padding repeats the last frame (N not aligned)") {
    Fixture fx;
    VideoClip source = fx.long_source(7);  // pads to 9 for L=2
    EditRequest base = fx.base_request();
    auto sched = plan_schedule(7, 2);
    CHECK(sched.padded_N == 9);
    VideoClip out = execute_schedule(sched, source, base, fx.edit_model, fx.interp_model, fx.codec,
                                     fx.schedule, fx.vocab);
    CHECK(out.length() == 7);
}

TEST_CASE("execute_schedule: input contracts") {
    Fixture fx;
    VideoClip source = fx.long_source(5);
    EditRequest base = fx.base_request();
    auto sched = plan_schedule(5, 2);

    EditRequest noref = base;
    noref.reference.entries.clear();
    CHECK_THROWS_WITH_AS(execute_schedule(sched, source, noref, fx.edit_model, fx.interp_model,
                                          fx.codec, fx.schedule, fx.vocab),
                         doctest::Contains("exactly one edited keyframe"), std::invalid_argument);

    VideoClip wrong = fx.long_source(6);
    CHECK_THROWS_WITH_AS(execute_schedule(sched, wrong, base, fx.edit_model, fx.interp_model,
                                          fx.codec, fx.schedule, fx.vocab),
                         doctest::Contains("schedule expects"), std::invalid_argument);

    CHECK_THROWS_WITH_AS(execute_schedule(sched, source, base, fx.edit_model, fx.interp_model,
                                          fx.codec, fx.schedule, fx.vocab, 0),
                         doctest::Contains("workers"), std::invalid_argument);

    // Failures inside a run surface with the run id and mode.
    EditRequest bad = base;
    bad.steps = 0;
    CHECK_THROWS_WITH_AS(execute_schedule(sched, source, bad, fx.edit_model, fx.interp_model,
                                          fx.codec, fx.schedule, fx.vocab),
                         doctest::Contains("run 0 (initial)"), std::runtime_error);
}
