#include <catch2/catch_amalgamated.hpp>

#include <future>
#include <thread>

#include "synthetic.hpp"
#include "toprec/pipeline.hpp"
#include "toprec/service.hpp"

using namespace toprec;

namespace {

std::shared_ptr<const ModelBundle> make_trained_bundle() {
    synth::Options opt;
    opt.n_repos = 200;
    opt.n_topics = 10;
    auto corpus = synth::make_corpus(opt);
    TextTables tables;
    PrepareConfig pcfg;
    pcfg.min_support = 5;
    pcfg.token_filter.min_text_freq = 2;
    pcfg.token_filter.min_name_freq = 2;
    auto ds = prepare_dataset(corpus.records, corpus.vocab, tables, pcfg);
    TrainConfig tcfg;
    tcfg.max_iters = 300;
    auto tr = train_on_dataset(ds, ClassifierKind::logistic, tcfg);
    auto bundle = std::make_shared<ModelBundle>();
    bundle->topics = ds.vocab;
    bundle->features = tr.features;
    bundle->model = tr.model;
    bundle->tables = tables;
    bundle->model_version = "test-model";
    return bundle;
}

// Binds the server to an ephemeral port and serves it on a background
// thread for the lifetime of the fixture.
struct RunningServer {
    PredictionServer server;
    int port = 0;
    std::thread thread;

    explicit RunningServer(std::shared_ptr<const ModelBundle> bundle = nullptr) {
        if (bundle) server.load(std::move(bundle));
        port = server.raw().bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.raw().listen_after_bind(); });
        server.raw().wait_until_ready();
    }
    ~RunningServer() {
        server.raw().stop();
        thread.join();
    }
    httplib::Client client() {
        httplib::Client c("127.0.0.1", port);
        c.set_connection_timeout(5);
        return c;
    }
};

}  // namespace

TEST_CASE("healthz reports 503 before a bundle is loaded and 200 after") {
    RunningServer rs;
    auto c = rs.client();
    auto res = c.Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 503);

    rs.server.load(make_trained_bundle());
    res = c.Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j.at("status") == "ok");
    CHECK(j.at("model_version") == "test-model");
}

TEST_CASE("predict endpoint contract") {
    RunningServer rs(make_trained_bundle());
    auto c = rs.client();

    SECTION("returns n recommendations in descending score order") {
        nlohmann::json body = {{"readme", "qqatoka qqatokb qqatokc qqatokd qqatoke"},
                               {"n", 4}};
        auto res = c.Post("/api/v1/predict", body.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        auto j = nlohmann::json::parse(res->body);
        REQUIRE(j.at("recommendations").size() == 4);
        CHECK(j.at("recommendations")[0].at("topic") == "topica");
        double prev = 2.0;
        for (const auto& rec : j.at("recommendations")) {
            double s = rec.at("score").get<double>();
            CHECK(s <= prev);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            prev = s;
        }
        CHECK(j.at("model_version") == "test-model");
    }

    SECTION("empty input is a 400 with code empty_input") {
        auto res = c.Post("/api/v1/predict", "{}", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(nlohmann::json::parse(res->body).at("error") == "empty_input");
    }

    SECTION("malformed JSON is a 400 with code bad_json") {
        auto res = c.Post("/api/v1/predict", "{not json", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(nlohmann::json::parse(res->body).at("error") == "bad_json");
    }

    SECTION("out-of-range n is a 400 with code bad_n") {
        for (auto n : {0, 10000}) {
            nlohmann::json body = {{"readme", "qqatoka"}, {"n", n}};
            auto res = c.Post("/api/v1/predict", body.dump(), "application/json");
            REQUIRE(res);
            CHECK(res->status == 400);
            CHECK(nlohmann::json::parse(res->body).at("error") == "bad_n");
        }
    }

    SECTION("predict-repo is 501 when remote fetch is disabled") {
        auto res = c.Get("/api/v1/predict-repo?full_name=owner/repo");
        REQUIRE(res);
        CHECK(res->status == 501);
    }
}

TEST_CASE("concurrent identical requests produce identical responses") {
    RunningServer rs(make_trained_bundle());
    nlohmann::json body = {{"description", "qqbtoka qqbtokb noisea"},
                           {"readme", "qqbtokc qqbtokd"},
                           {"n", 5}};
    const std::string payload = body.dump();

    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 16; ++i)
        futures.push_back(std::async(std::launch::async, [&]() -> std::string {
            // No Catch assertions here: they are not thread-safe.
            auto c = rs.client();
            auto res = c.Post("/api/v1/predict", payload, "application/json");
            if (!res || res->status != 200) return "<request failed>";
            return res->body;
        }));
    std::string first = futures[0].get();
    REQUIRE(first != "<request failed>");
    for (std::size_t i = 1; i < futures.size(); ++i) CHECK(futures[i].get() == first);
    CHECK(nlohmann::json::parse(first).at("recommendations")[0].at("topic") ==
          "topicb");
}
