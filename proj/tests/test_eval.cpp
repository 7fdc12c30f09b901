#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "toprec/eval.hpp"

using namespace toprec;
using oracles::random_instance;

TEST_CASE("lrap hand values") {
    LabelMatrix truth = {LabelVector(3)};
    truth[0].bits = {1, 0, 1};
    ScoreMatrix scores = {{0.9, 0.8, 0.7}};
    CHECK(lrap(scores, truth) == Catch::Approx(5.0 / 6.0).margin(1e-12));

    LabelMatrix t1 = {LabelVector(1)};
    t1[0].bits = {1};
    CHECK(lrap({{0.3}}, t1) == 1.0);

    LabelMatrix t2 = {LabelVector(4)};
    t2[0].bits = {1, 1, 0, 0};
    CHECK(lrap({{0.9, 0.8, 0.1, 0.2}}, t2) == 1.0);  // all true above all false
}

TEST_CASE("metrics_at_n hand values") {
    // truth {a,b}, top-5 contains only a
    std::vector<std::string> names;
    for (int i = 0; i < 10; ++i) names.push_back("t" + std::to_string(i));
    LabelMatrix truth = {LabelVector(10)};
    truth[0].bits[0] = 1;
    truth[0].bits[1] = 1;
    ScoreMatrix scores = {{0.9, 0.0, 0.5, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1, 0.1}};
    auto m = metrics_at_n(scores, truth, 5, names);
    CHECK(m.precision == Catch::Approx(0.2));
    CHECK(m.recall == Catch::Approx(0.5));
    CHECK(m.success == 1.0);
    CHECK(m.f1 == Catch::Approx(2 * 0.2 * 0.5 / 0.7));
}

TEST_CASE("perfect model metrics") {
    std::vector<std::string> names = {"a", "b", "c", "d"};
    LabelMatrix truth;
    ScoreMatrix scores;
    for (int i = 0; i < 5; ++i) {
        LabelVector lv(4);
        lv.bits[i % 4] = 1;
        truth.push_back(lv);
        std::vector<double> s(4, 0.1);
        s[i % 4] = 0.9;
        scores.push_back(s);
    }
    auto m = metrics_at_n(scores, truth, 1, names);
    CHECK(m.recall == 1.0);
    CHECK(m.success == 1.0);
    CHECK(lrap(scores, truth) == 1.0);
}

TEST_CASE("metrics reject bad shapes and empty truth rows") {
    std::vector<std::string> names = {"a", "b"};
    LabelMatrix truth = {LabelVector(2)};
    CHECK_THROWS_AS(metrics_at_n({{0.1, 0.2}}, truth, 1, names), DataError);  // empty row
    LabelMatrix t2 = {LabelVector(3)};
    t2[0].bits[0] = 1;
    CHECK_THROWS_AS(metrics_at_n({{0.1, 0.2}}, t2, 1, names), DataError);
    CHECK_THROWS_AS(lrap({{0.1}}, LabelMatrix{}), DataError);
}

TEST_CASE("brute-force oracle equality on random instances") {
    std::mt19937 rng(2024);
    for (int inst = 0; inst < 300; ++inst) {
        ScoreMatrix scores;
        LabelMatrix truth;
        std::vector<std::string> names;
        random_instance(rng, 50, 10, scores, truth, names);
        CHECK(lrap(scores, truth) ==
              Catch::Approx(oracles::lrap(scores, truth)).margin(1e-12));
        std::size_t n = 1 + rng() % names.size();
        auto got = metrics_at_n(scores, truth, n, names);
        auto want = oracles::metrics_at_n(scores, truth, n, names);
        CHECK(got.precision == Catch::Approx(want.p).margin(1e-12));
        CHECK(got.recall == Catch::Approx(want.r).margin(1e-12));
        CHECK(got.success == Catch::Approx(want.s).margin(1e-12));
    }
}

TEST_CASE("R@n and S@n are non-decreasing in n; mean R <= mean S") {
    std::mt19937 rng(555);
    for (int inst = 0; inst < 100; ++inst) {
        ScoreMatrix scores;
        LabelMatrix truth;
        std::vector<std::string> names;
        random_instance(rng, 30, 10, scores, truth, names);
        double prev_r = -1, prev_s = -1;
        for (std::size_t n : {1u, 3u, 5u, 8u, 10u}) {
            std::size_t nn = std::min<std::size_t>(n, names.size());
            auto m = metrics_at_n(scores, truth, nn, names);
            CHECK(m.recall >= prev_r - 1e-12);
            CHECK(m.success >= prev_s - 1e-12);
            CHECK(m.recall <= m.success + 1e-12);
            prev_r = m.recall;
            prev_s = m.success;
        }
    }
}

TEST_CASE("consistent column permutation leaves metrics unchanged") {
    std::mt19937 rng(808);
    for (int inst = 0; inst < 30; ++inst) {
        ScoreMatrix scores;
        LabelMatrix truth;
        std::vector<std::string> names;
        random_instance(rng, 20, 8, scores, truth, names, /*allow_ties=*/false);
        std::vector<std::size_t> perm(names.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);

        ScoreMatrix ps(scores.size());
        LabelMatrix pt(truth.size(), LabelVector(names.size()));
        std::vector<std::string> pn(names.size());
        for (std::size_t c = 0; c < perm.size(); ++c) pn[c] = names[perm[c]];
        for (std::size_t i = 0; i < scores.size(); ++i) {
            ps[i].resize(names.size());
            for (std::size_t c = 0; c < perm.size(); ++c) {
                ps[i][c] = scores[i][perm[c]];
                pt[i].bits[c] = truth[i].bits[perm[c]];
            }
        }
        CHECK(lrap(ps, pt) == Catch::Approx(lrap(scores, truth)).margin(1e-12));
        auto a = metrics_at_n(scores, truth, 3, names);
        auto b = metrics_at_n(ps, pt, 3, pn);
        CHECK(a.precision == Catch::Approx(b.precision).margin(1e-12));
        CHECK(a.recall == Catch::Approx(b.recall).margin(1e-12));
        CHECK(a.success == Catch::Approx(b.success).margin(1e-12));
    }
}

TEST_CASE("corpus_stats per-source summaries") {
    ProcessedDoc d1;
    d1.readme_tokens.assign(140, "x");
    d1.rebuild_all();
    auto stats1 = corpus_stats({d1});
    CHECK(stats1.at("readme").median == 140.0);
    CHECK(stats1.at("readme").min == 140);
    CHECK(stats1.at("readme").max == 140);

    ProcessedDoc small, big;
    small.readme_tokens.assign(10, "x");
    small.rebuild_all();
    big.readme_tokens.assign(400, "x");
    big.wiki_tokens.assign(100, "x");
    big.filename_tokens.assign(100, "x");
    big.name_tokens.assign(10, "x");
    big.description_tokens.assign(41, "x");
    big.rebuild_all();
    auto stats2 = corpus_stats({small, big});
    CHECK(stats2.at("all").min == 10);
    CHECK(stats2.at("all").max == 651);

    auto stats3 = corpus_stats({d1, d1, d1});
    CHECK(stats3.at("readme").mean == stats3.at("readme").median);

    CHECK_THROWS_AS(corpus_stats({}), DataError);
}
