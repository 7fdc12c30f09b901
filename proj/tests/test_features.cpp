#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "toprec/features.hpp"

using namespace toprec;

TEST_CASE("fit_tfidf smoothed idf golden values") {
    auto v = fit_tfidf({{"a", "b"}, {"a", "c"}}, 20000, 1, 1);
    REQUIRE(v.width() == 3);
    CHECK(v.idf[v.term_index.at("a")] == Catch::Approx(1.0).margin(1e-12));
    CHECK(v.idf[v.term_index.at("b")] ==
          Catch::Approx(std::log(1.5) + 1.0).margin(1e-12));
    CHECK(v.idf[v.term_index.at("c")] ==
          Catch::Approx(std::log(1.5) + 1.0).margin(1e-12));
}

TEST_CASE("fit_tfidf caps the vocabulary by corpus term frequency") {
    auto v = fit_tfidf({{"a", "b"}, {"a", "c"}}, 1, 1, 1);
    REQUIRE(v.width() == 1);
    CHECK(v.terms[0] == "a");
}

TEST_CASE("fit_tfidf produces bigrams") {
    auto v = fit_tfidf({{"a", "b"}}, 20000, 1, 2);
    CHECK(v.term_index.count("a b") == 1);
    CHECK(v.term_index.count("a") == 1);
    CHECK(v.term_index.count("b") == 1);
}

TEST_CASE("fit_tfidf rejects an empty corpus") {
    CHECK_THROWS_AS(fit_tfidf({}, 100), DataError);
}

TEST_CASE("transform golden normalized vector") {
    auto v = fit_tfidf({{"a", "b"}, {"a", "c"}}, 20000, 1, 1);
    auto x = transform_tokens({"a", "b"}, v);
    REQUIRE(x.nnz() == 2);
    double ia = 1.0, ib = std::log(1.5) + 1.0;
    double norm = std::sqrt(ia * ia + ib * ib);
    CHECK(x.values[0] == Catch::Approx(ia / norm).margin(1e-9));   // column "a"
    CHECK(x.values[1] == Catch::Approx(ib / norm).margin(1e-9));   // column "b"
    CHECK(x.values[0] == Catch::Approx(0.5798).margin(1e-4));
    CHECK(x.values[1] == Catch::Approx(0.8148).margin(1e-4));
}

TEST_CASE("transform of unseen tokens is the empty vector") {
    auto v = fit_tfidf({{"a", "b"}}, 20000);
    auto x = transform_tokens({"zzz", "qqq"}, v);
    CHECK(x.empty());
}

TEST_CASE("every non-empty transformed vector has unit L2 norm") {
    std::mt19937 rng(41);
    std::vector<std::vector<std::string>> docs;
    for (int i = 0; i < 40; ++i) {
        std::vector<std::string> d;
        for (int k = 0; k < 1 + static_cast<int>(rng() % 30); ++k)
            d.push_back("w" + std::to_string(rng() % 25));
        docs.push_back(d);
    }
    auto v = fit_tfidf(docs, 200);
    for (const auto& d : docs) {
        auto x = transform_tokens(d, v);
        if (!x.empty()) CHECK(x.norm() == Catch::Approx(1.0).margin(1e-9));
        bool ascending = true;
        for (std::size_t k = 1; k < x.indices.size(); ++k)
            ascending = ascending && x.indices[k - 1] < x.indices[k];
        CHECK(ascending);
        for (double val : x.values) CHECK(val > 0);
    }
}

TEST_CASE("idf is strictly decreasing in document frequency") {
    std::vector<std::vector<std::string>> docs;
    for (int i = 0; i < 10; ++i) {
        std::vector<std::string> d = {"common"};
        if (i < 5) d.push_back("medium");
        if (i < 2) d.push_back("rare");
        docs.push_back(d);
    }
    auto v = fit_tfidf(docs, 100, 1, 1);
    CHECK(v.idf[v.term_index.at("rare")] > v.idf[v.term_index.at("medium")]);
    CHECK(v.idf[v.term_index.at("medium")] > v.idf[v.term_index.at("common")]);
    for (double i : v.idf) CHECK(i >= 1.0);
}

TEST_CASE("separate feature space concatenates text and name spaces") {
    std::vector<ProcessedDoc> docs;
    for (int i = 0; i < 6; ++i) {
        ProcessedDoc d;
        d.readme_tokens = {"alpha", "beta", "text" + std::to_string(i % 3)};
        d.name_tokens = {"proj" + std::to_string(i % 2)};
        d.filename_tokens = {"file", "util"};
        d.rebuild_all();
        docs.push_back(d);
    }
    FeatureSpaceConfig cfg;
    cfg.mode = FeatureMode::separate;
    cfg.text_max_features = 18000;
    cfg.name_max_features = 2000;
    auto fs = fit_feature_space(docs, cfg);
    CHECK(fs.width() == fs.text_vocab.width() + fs.name_vocab.width());
    CHECK(fs.width() <= 20000);

    auto x = transform(docs[0], fs);
    CHECK(x.norm() == Catch::Approx(1.0).margin(1e-9));
    bool has_name_col = false;
    for (std::size_t idx : x.indices)
        if (idx >= fs.text_vocab.width()) has_name_col = true;
    CHECK(has_name_col);
}

TEST_CASE("transform is deterministic") {
    std::vector<ProcessedDoc> docs(4);
    docs[0].readme_tokens = {"x", "y", "z", "x"};
    docs[0].rebuild_all();
    for (int i = 1; i < 4; ++i) docs[i] = docs[0];
    auto fs = fit_feature_space(docs, FeatureSpaceConfig{});
    auto a = transform(docs[0], fs);
    auto b = transform(docs[0], fs);
    CHECK(a.indices == b.indices);
    CHECK(a.values == b.values);
}
