#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "toprec/classify.hpp"

using namespace toprec;

static SparseVector dense_to_sparse(const std::vector<double>& v) {
    SparseVector x;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0) {
            x.indices.push_back(i);
            x.values.push_back(v[i]);
        }
    return x;
}

static LabelVector bits(std::initializer_list<int> b) {
    LabelVector lv(b.size());
    std::size_t i = 0;
    for (int x : b) lv.bits[i++] = static_cast<std::uint8_t>(x);
    return lv;
}

TEST_CASE("compute_class_weights is N over frequency") {
    std::vector<LabelVector> labels;
    for (int i = 0; i < 1000; ++i) {
        LabelVector lv(2);
        lv.bits[0] = i < 50;   // freq 50
        lv.bits[1] = 1;        // freq N
        labels.push_back(lv);
    }
    auto w = compute_class_weights(labels);
    CHECK(w.weights[0] == 20.0);
    CHECK(w.weights[1] == 1.0);

    std::vector<LabelVector> labels2;
    for (int i = 0; i < 100; ++i) {
        LabelVector lv(1);
        lv.bits[0] = i < 25;
        labels2.push_back(lv);
    }
    CHECK(compute_class_weights(labels2).weights[0] == 4.0);
}

TEST_CASE("compute_class_weights rejects zero-support columns") {
    std::vector<LabelVector> labels(3, LabelVector(2));
    for (auto& lv : labels) lv.bits[0] = 1;
    CHECK_THROWS_WITH(compute_class_weights(labels),
                      Catch::Matchers::ContainsSubstring("filter_by_support"));
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double h = 1e-5;
    for (int inst = 0; inst < 100; ++inst) {
        std::size_t dim = 2 + rng() % 6;
        std::size_t n = 3 + rng() % 10;
        std::vector<SparseVector> rows;
        std::vector<std::uint8_t> y;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> d(dim);
            for (auto& v : d) v = unif(rng);
            rows.push_back(dense_to_sparse(d));
            y.push_back(rng() % 2);
        }
        std::vector<double> w(dim);
        for (auto& v : w) v = unif(rng);
        double bias = unif(rng);
        double pw = 1.0 + 10.0 * std::abs(unif(rng));
        double l2 = 1e-3;

        std::vector<double> grad;
        double grad_b;
        weighted_logistic_gradient(rows, y, pw, l2, w, bias, grad, grad_b);

        for (std::size_t j = 0; j <= dim; ++j) {
            auto wp = w, wm = w;
            double bp = bias, bm = bias;
            if (j < dim) { wp[j] += h; wm[j] -= h; }
            else { bp += h; bm -= h; }
            double fd = (weighted_logistic_loss(rows, y, pw, l2, wp, bp) -
                         weighted_logistic_loss(rows, y, pw, l2, wm, bm)) /
                        (2 * h);
            double analytic = j < dim ? grad[j] : grad_b;
            double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
            CHECK(std::abs(fd - analytic) / denom < 1e-4);
        }
    }
}

TEST_CASE("zero-initialized logistic model scores 0.5 everywhere") {
    OvrModel m;
    m.kind = ClassifierKind::logistic;
    m.feature_width = 3;
    m.logistic.resize(2);
    for (auto& lm : m.logistic) lm.weights.assign(3, 0.0);
    auto s = predict_scores(m, dense_to_sparse({0.5, 0.1, 0.0}));
    for (double v : s.scores) CHECK(v == Catch::Approx(0.5));
    auto s0 = predict_scores(m, SparseVector{});
    for (double v : s0.scores) CHECK(v == Catch::Approx(0.5));
}

TEST_CASE("logistic training separates a separable toy set") {
    std::vector<SparseVector> rows = {
        dense_to_sparse({1, 0}), dense_to_sparse({0.9, 0.1}),
        dense_to_sparse({0, 1}), dense_to_sparse({0.1, 0.9})};
    std::vector<LabelVector> labels = {bits({1}), bits({1}), bits({0}), bits({0})};
    TrainConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.max_iters = 2000;
    cfg.tol = 1e-10;
    auto w = compute_class_weights(labels);
    auto m = train_logistic_ovr(rows, labels, w, cfg, 2, {"t"});
    auto s = predict_scores(m, dense_to_sparse({1, 0}));
    CHECK(s.scores[0] > 0.9);
    auto sn = predict_scores(m, dense_to_sparse({0, 1}));
    CHECK(sn.scores[0] < 0.5);
}

TEST_CASE("per-topic loss never increases over training") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<SparseVector> rows;
    std::vector<LabelVector> labels;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> d(4);
        for (auto& v : d) v = unif(rng);
        rows.push_back(dense_to_sparse(d));
        LabelVector lv(3);
        for (auto& b : lv.bits) b = rng() % 2;
        labels.push_back(lv);
    }
    for (auto& lv : labels) lv.bits[0] = 1;  // avoid zero-support columns
    labels[0].bits[1] = 1;
    labels[0].bits[2] = 1;
    TrainConfig cfg;
    auto w = compute_class_weights(labels);
    auto m = train_logistic_ovr(rows, labels, w, cfg, 4, {"a", "b", "c"});
    for (std::size_t t = 0; t < 3; ++t) {
        std::vector<std::uint8_t> y;
        for (const auto& lv : labels) y.push_back(lv.bits[t]);
        double final_loss = weighted_logistic_loss(rows, y, w.weights[t], cfg.l2,
                                                   m.logistic[t].weights,
                                                   m.logistic[t].bias);
        double init_loss = weighted_logistic_loss(rows, y, w.weights[t], cfg.l2,
                                                  std::vector<double>(4, 0.0), 0.0);
        CHECK(std::isfinite(final_loss));
        CHECK(final_loss <= init_loss);
    }
}

TEST_CASE("doubling l2 never grows the trained weight norm") {
    std::mt19937 rng(78);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<SparseVector> rows;
    std::vector<LabelVector> labels;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> d(5);
        for (auto& v : d) v = unif(rng);
        rows.push_back(dense_to_sparse(d));
        LabelVector lv(1);
        lv.bits[0] = d[0] > 0.5;
        labels.push_back(lv);
    }
    labels[0].bits[0] = 1;
    auto w = compute_class_weights(labels);
    double prev_norm = 1e300;
    for (double l2 : {1e-4, 2e-4, 4e-4, 8e-4}) {
        TrainConfig cfg;
        cfg.l2 = l2;
        cfg.max_iters = 500;
        auto m = train_logistic_ovr(rows, labels, w, cfg, 5, {"t"});
        double norm = 0;
        for (double wi : m.logistic[0].weights) norm += wi * wi;
        CHECK(norm <= prev_norm + 1e-12);
        prev_norm = norm;
    }
}

TEST_CASE("mnb posterior matches a hand Bayes computation") {
    // Two docs, two features, one topic. alpha=1.
    std::vector<SparseVector> rows = {dense_to_sparse({2, 0}), dense_to_sparse({0, 1})};
    std::vector<LabelVector> labels = {bits({1}), bits({0})};
    auto m = train_mnb_ovr(rows, labels, TrainConfig{}, 2, {"t"});

    // positive class: counts (2,0), total 2; theta_pos = (3/4, 1/4)
    // negative class: counts (0,1), total 1; theta_neg = (1/3, 2/3)
    // priors: 1/2 each. Query x = (1,0):
    //   log p(pos) = log(1/2) + 1*log(3/4)
    //   log p(neg) = log(1/2) + 1*log(1/3)
    double lp = std::log(0.5) + std::log(3.0 / 4.0);
    double ln = std::log(0.5) + std::log(1.0 / 3.0);
    double expected = std::exp(lp) / (std::exp(lp) + std::exp(ln));
    auto s = predict_scores(m, dense_to_sparse({1, 0}));
    CHECK(s.scores[0] == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("mnb fits its own training data") {
    std::vector<SparseVector> rows = {dense_to_sparse({1, 0, 0}),
                                      dense_to_sparse({0, 1, 1}),
                                      dense_to_sparse({0, 1, 0})};
    std::vector<LabelVector> labels = {bits({1}), bits({0}), bits({0})};
    auto m = train_mnb_ovr(rows, labels, TrainConfig{}, 3, {"t"});
    CHECK(predict_scores(m, rows[0]).scores[0] > 0.5);
}

TEST_CASE("mnb on uniform data returns the class prior") {
    std::vector<SparseVector> rows(4, dense_to_sparse({1, 1}));
    std::vector<LabelVector> labels = {bits({1}), bits({1}), bits({0}), bits({0})};
    auto m = train_mnb_ovr(rows, labels, TrainConfig{}, 2, {"t"});
    auto s = predict_scores(m, dense_to_sparse({1, 1}));
    CHECK(s.scores[0] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("mnb rejects negative features") {
    std::vector<SparseVector> rows = {dense_to_sparse({-1.0})};
    std::vector<LabelVector> labels = {bits({1})};
    CHECK_THROWS_AS(train_mnb_ovr(rows, labels, TrainConfig{}, 1, {"t"}), DataError);
}

TEST_CASE("predict_scores is deterministic and within (0,1)") {
    std::vector<SparseVector> rows = {dense_to_sparse({5, 1}), dense_to_sparse({0, 2})};
    std::vector<LabelVector> labels = {bits({1, 0}), bits({0, 1})};
    auto w = compute_class_weights(labels);
    auto m = train_logistic_ovr(rows, labels, w, TrainConfig{}, 2, {"a", "b"});
    auto s1 = predict_scores(m, rows[0]);
    auto s2 = predict_scores(m, rows[0]);
    CHECK(s1.scores == s2.scores);
    for (double v : s1.scores) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("predict_scores rejects out-of-space input") {
    OvrModel m;
    m.kind = ClassifierKind::logistic;
    m.feature_width = 2;
    m.logistic.resize(1);
    m.logistic[0].weights.assign(2, 0.0);
    SparseVector x;
    x.indices = {5};
    x.values = {1.0};
    CHECK_THROWS_AS(predict_scores(m, x), ModelError);
}

TEST_CASE("recommend top-n with lexicographic tie-break") {
    TopicVocabulary v;
    v.topics = {"a", "b", "c"};
    v.rebuild_index();
    ScoreVector s;
    s.scores = {0.9, 0.2, 0.9};
    auto r = recommend(s, 2, v);
    REQUIRE(r.items.size() == 2);
    CHECK(r.items[0].first == "a");
    CHECK(r.items[1].first == "c");

    auto full = recommend(s, 3, v);
    CHECK(full.items.size() == 3);

    CHECK_THROWS_AS(recommend(s, 0, v), DataError);
    CHECK_THROWS_AS(recommend(s, 4, v), DataError);
}

TEST_CASE("recommend(n) is a prefix of recommend(n+1)") {
    TopicVocabulary v;
    std::mt19937 rng(91);
    for (int i = 0; i < 12; ++i) v.topics.push_back("t" + std::to_string(i));
    v.rebuild_index();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        ScoreVector s;
        for (int i = 0; i < 12; ++i) s.scores.push_back(rng() % 3 ? unif(rng) : 0.5);
        for (std::size_t n = 1; n + 1 <= 12; ++n) {
            auto a = recommend(s, n, v);
            auto b = recommend(s, n + 1, v);
            for (std::size_t k = 0; k < n; ++k) CHECK(a.items[k] == b.items[k]);
        }
    }
}

TEST_CASE("training diverges loudly with an absurd learning rate") {
    std::vector<SparseVector> rows = {dense_to_sparse({1e3}), dense_to_sparse({-1e3})};
    std::vector<LabelVector> labels = {bits({1}), bits({0})};
    TrainConfig cfg;
    cfg.learning_rate = 1e306;  // guaranteed overflow on the first step
    cfg.max_iters = 50;
    auto w = compute_class_weights(labels);
    CHECK_THROWS_AS(train_logistic_ovr(rows, labels, w, cfg, 1, {"t"}), ModelError);
}
