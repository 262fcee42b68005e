#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "ccedit/conditioning.hpp"

using namespace ccedit;

TEST_CASE("vocabulary: layout, lookup, file round-trip") {
    Vocabulary v = Vocabulary::synthetic_default();
    CHECK(v.token(Vocabulary::kUncond) == "<uncond>");
    CHECK(v.token(Vocabulary::kPad) == "<pad>");
    CHECK(v.id("circle") >= 2);
    CHECK_THROWS_AS(v.id("zebra"), std::out_of_range);
    CHECK_THROWS_AS(v.token(v.size()), std::out_of_range);

    v.save("vocab_test.txt");
    Vocabulary loaded = Vocabulary::load("vocab_test.txt");
    CHECK(loaded.size() == v.size());
    for (int i = 0; i < v.size(); ++i) CHECK(loaded.token(i) == v.token(i));

    CHECK_THROWS_AS(Vocabulary({"foo", "bar"}), std::invalid_argument);
}

TEST_CASE("text encoder: tokenize, uncond convention, determinism") {
    Vocabulary vocab = Vocabulary::synthetic_default();
    nn::ParamStore ps;
    Rng rng(4);
    TextEncoderConfig cfg;
    TextEncoder enc = TextEncoder::create(ps, vocab.size(), cfg, rng);

    std::vector<int> ids = enc.tokenize({"red", "circle", "linear"}, vocab);
    CHECK(static_cast<int>(ids.size()) == cfg.n_tokens);
    CHECK(ids[0] == vocab.id("red"));
    CHECK(ids[3] == Vocabulary::kPad);

    // Empty prompt is the dedicated unconditional sequence.
    std::vector<int> u = enc.tokenize({}, vocab);
    CHECK(u == enc.uncond_ids());
    CHECK(u[0] == Vocabulary::kUncond);

    PromptEmbedding a = enc.embed({"red", "circle"}, vocab);
    PromptEmbedding b = enc.embed({"red", "circle"}, vocab);
    CHECK(a.embedding.bitwise_equal(b.embedding));
    CHECK(a.embedding.shape == std::vector<int>{cfg.n_tokens, cfg.d_text});

    CHECK_THROWS_AS(enc.embed({"zebra"}, vocab), std::out_of_range);
}

TEST_CASE("text encoder: injective over the full synthetic grammar") {
    Vocabulary vocab = Vocabulary::synthetic_default();
    nn::ParamStore ps;
    Rng rng(4);
    TextEncoder enc = TextEncoder::create(ps, vocab.size(), TextEncoderConfig{}, rng);

    std::vector<std::string> shapes = {"circle", "square", "triangle"};
    std::vector<std::string> colors = {"red", "green", "blue", "yellow"};
    std::vector<std::string> motions = {"static", "linear", "circular"};
    std::vector<std::string> bgs = {"dark", "light", "gray"};
    std::set<std::vector<double>> seen;
    int count = 0;
    for (const auto& s : shapes)
        for (const auto& c : colors)
            for (const auto& m : motions)
                for (const auto& g : bgs) {
                    PromptEmbedding p = enc.embed({c, s, m, g}, vocab);
                    seen.insert(p.embedding.data);
                    ++count;
                }
    CHECK(static_cast<int>(seen.size()) == count);  // no collisions
}

TEST_CASE("structure extraction: analytic edge cases") {
    SUBCASE("constant frame has a zero edge map") {
        PixelFrame flat(Tensor::full({3, 8, 8}, 0.3));
        Tensor e = extract_structure_frame(flat, StructureKind::kEdge);
        for (double v : e.data) CHECK(v == 0.0);
    }
    SUBCASE("vertical step: maximal response along the boundary, zero far away") {
        Tensor t({3, 8, 8});
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) t.at3(c, i, j) = (j < 4) ? -1.0 : 1.0;
        Tensor e = extract_structure_frame(PixelFrame(std::move(t)), StructureKind::kEdge);
        for (int i = 0; i < 8; ++i) {
            // Sobel x-response across a unit step is 4, normalized by 4*sqrt(2).
            CHECK(e.at2(i, 3) == doctest::Approx(1.0 / std::sqrt(2.0)));
            CHECK(e.at2(i, 4) == doctest::Approx(1.0 / std::sqrt(2.0)));
            CHECK(e.at2(i, 0) == 0.0);
            CHECK(e.at2(i, 7) == 0.0);
        }
    }
    SUBCASE("maps stay inside [0,1] for arbitrary frames") {
        Rng rng(8);
        Tensor t = rng.uniform_tensor({3, 12, 12}, -1.0, 1.0);
        for (StructureKind k : {StructureKind::kEdge, StructureKind::kDepthProxy}) {
            Tensor e = extract_structure_frame(PixelFrame(t), k);
            for (double v : e.data) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("structure extraction: per-frame independence over a clip") {
    Rng rng(3);
    VideoClip clip;
    for (int i = 0; i < 4; ++i)
        clip.frames.push_back(PixelFrame(rng.uniform_tensor({3, 8, 8}, -1.0, 1.0)));
    StructureSequence s1 = extract_structure(clip, StructureKind::kEdge);
    clip.frames[3] = PixelFrame(rng.uniform_tensor({3, 8, 8}, -1.0, 1.0));
    StructureSequence s2 = extract_structure(clip, StructureKind::kEdge);
    for (int i = 0; i < 3; ++i) CHECK(s2.maps[i].bitwise_equal(s1.maps[i]));
    CHECK_FALSE(s2.maps[3].bitwise_equal(s1.maps[3]));
}

TEST_CASE("structure kind parsing") {
    CHECK(structure_kind_from_string("edge") == StructureKind::kEdge);
    CHECK(structure_kind_from_string("depth_proxy") == StructureKind::kDepthProxy);
    CHECK(to_string(StructureKind::kDepthProxy) == "depth_proxy");
    CHECK_THROWS_AS(structure_kind_from_string("scribble"), std::invalid_argument);
}

TEST_CASE("appearance references: contracts") {
    PixelFrame f(Tensor::full({3, 8, 8}, 0.1));
    PixelFrame g(Tensor::full({3, 8, 8}, -0.4));

    CHECK(default_reference_index(17) == 8);
    CHECK(default_reference_index(5) == 2);

    SUBCASE("edit mode takes exactly one frame") {
        AppearanceReference r = make_reference({f}, {2}, ReferenceMode::kEdit, 5);
        REQUIRE(r.entries.size() == 1);
        CHECK(r.entries[0].second == 2);
        CHECK(r.entries[0].first.data.bitwise_equal(f.data));
        CHECK_THROWS_AS(make_reference({f, g}, {0, 4}, ReferenceMode::kEdit, 5),
                        std::invalid_argument);
    }
    SUBCASE("interpolate mode wants both endpoints") {
        AppearanceReference r = make_reference({f, g}, {0, 4}, ReferenceMode::kInterpolate, 5);
        REQUIRE(r.entries.size() == 2);
        CHECK(r.entries[0].second == 0);
        CHECK(r.entries[1].second == 4);
        CHECK_THROWS_AS(make_reference({f}, {0}, ReferenceMode::kInterpolate, 5),
                        std::invalid_argument);
        CHECK_THROWS_AS(make_reference({f, g}, {0, 3}, ReferenceMode::kInterpolate, 5),
                        std::invalid_argument);
    }
    SUBCASE("index range checks") {
        CHECK_THROWS_AS(make_reference({f}, {5}, ReferenceMode::kEdit, 5), std::out_of_range);
        CHECK_THROWS_AS(make_reference({f}, {-1}, ReferenceMode::kEdit, 5), std::out_of_range);
    }
}
