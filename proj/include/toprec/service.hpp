#pragma once

// JSON-over-HTTP prediction service. The model bundle is loaded once at
// startup and never mutated; request handling shares it read-only.

#include <atomic>
#include <memory>
#include <optional>
#include <string>

// The default listen backlog (5) drops connections under concurrent load.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "toprec/bundle.hpp"
#include "toprec/common.hpp"
#include "toprec/github.hpp"
#include "toprec/pipeline.hpp"

namespace toprec {

struct PredictRequest {
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::optional<std::string> readme;
    std::optional<std::string> wiki;
    std::vector<std::string> file_names;
    std::size_t n = 5;
};

struct PredictResponse {
    RecommendationList recommendations;
    std::string model_version;
};

// Core prediction shared by both endpoints.
inline PredictResponse run_predict(const ModelBundle& bundle, const PredictRequest& req) {
    bool has_text = (req.name && !req.name->empty()) ||
                    (req.description && !req.description->empty()) ||
                    (req.readme && !req.readme->empty()) ||
                    (req.wiki && !req.wiki->empty()) || !req.file_names.empty();
    if (!has_text) throw DataError("empty_input");
    if (req.n < 1 || req.n > bundle.topics.size()) throw DataError("bad_n");

    RepoRecord r;
    r.full_name = req.name && !req.name->empty() ? *req.name : "unknown/unknown";
    if (r.full_name.find('/') == std::string::npos) r.full_name = "unknown/" + r.full_name;
    r.description = req.description;
    r.readme = req.readme;
    r.wiki = req.wiki;
    r.file_paths = req.file_names;

    TokenFilterConfig cfg;  // thresholds unused at predict time
    cfg.min_text_freq = 1;
    cfg.min_name_freq = 1;
    ProcessedDoc doc = preprocess_record(r, bundle.tables, cfg);
    SparseVector x = transform(doc, bundle.features);
    ScoreVector scores = predict_scores(bundle.model, x);
    PredictResponse resp;
    resp.recommendations = recommend(scores, req.n, bundle.topics);
    resp.model_version = bundle.model_version;
    return resp;
}

inline nlohmann::json response_to_json(const PredictResponse& resp) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& [topic, score] : resp.recommendations.items)
        recs.push_back({{"topic", topic}, {"score", score}});
    return {{"recommendations", recs}, {"model_version", resp.model_version}};
}

class PredictionServer {
public:
    PredictionServer() { register_routes(); }

    // Takes ownership of the bundle; flips /healthz to ready.
    void load(std::shared_ptr<const ModelBundle> bundle) {
        bundle_ = std::move(bundle);
        ready_.store(true, std::memory_order_release);
    }

    void enable_remote_fetch(FetchConfig cfg) {
        fetch_cfg_ = std::move(cfg);
        fetch_enabled_ = true;
    }

    httplib::Server& raw() { return server_; }

    bool listen(const std::string& host, int port) {
        return server_.listen(host, port);
    }

private:
    static void error_response(httplib::Response& res, int status, const std::string& code) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", code}}.dump(), "application/json");
    }

    void register_routes() {
        server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            if (!ready_.load(std::memory_order_acquire)) {
                error_response(res, 503, "loading");
                return;
            }
            res.set_content(nlohmann::json{{"status", "ok"},
                                           {"model_version", bundle_->model_version}}
                                .dump(),
                            "application/json");
        });

        server_.Post("/api/v1/predict",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         if (!ready_.load(std::memory_order_acquire)) {
                             error_response(res, 503, "loading");
                             return;
                         }
                         nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
                         if (j.is_discarded() || !j.is_object()) {
                             error_response(res, 400, "bad_json");
                             return;
                         }
                         PredictRequest pr;
                         auto opt_str = [&](const char* k) -> std::optional<std::string> {
                             if (j.contains(k) && j[k].is_string())
                                 return j[k].get<std::string>();
                             return std::nullopt;
                         };
                         pr.name = opt_str("name");
                         pr.description = opt_str("description");
                         pr.readme = opt_str("readme");
                         pr.wiki = opt_str("wiki");
                         if (j.contains("file_names") && j["file_names"].is_array())
                             for (const auto& f : j["file_names"])
                                 if (f.is_string())
                                     pr.file_names.push_back(f.get<std::string>());
                         if (j.contains("n")) {
                             if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
                                 error_response(res, 400, "bad_n");
                                 return;
                             }
                             pr.n = j["n"].get<std::size_t>();
                         }
                         try {
                             PredictResponse out = run_predict(*bundle_, pr);
                             res.set_content(response_to_json(out).dump(),
                                             "application/json");
                         } catch (const DataError& e) {
                             error_response(res, 400, e.what());
                         }
                     });

        server_.Get("/api/v1/predict-repo",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        if (!ready_.load(std::memory_order_acquire)) {
                            error_response(res, 503, "loading");
                            return;
                        }
                        if (!fetch_enabled_) {
                            error_response(res, 501, "remote_fetch_disabled");
                            return;
                        }
                        std::string full_name = req.get_param_value("full_name");
                        if (full_name.empty()) {
                            error_response(res, 400, "missing_full_name");
                            return;
                        }
                        std::size_t n = 5;
                        if (req.has_param("n")) {
                            try {
                                n = std::stoul(req.get_param_value("n"));
                            } catch (...) {
                                error_response(res, 400, "bad_n");
                                return;
                            }
                        }
                        try {
                            RepoRecord r = fetch_repo(full_name, fetch_cfg_);
                            PredictRequest pr;
                            pr.name = r.full_name;
                            pr.description = r.description;
                            pr.readme = r.readme;
                            pr.wiki = r.wiki;
                            pr.file_names = r.file_paths;
                            pr.n = n;
                            PredictResponse out = run_predict(*bundle_, pr);
                            res.set_content(response_to_json(out).dump(),
                                            "application/json");
                        } catch (const UpstreamError& e) {
                            if (e.kind == UpstreamError::Kind::not_found)
                                error_response(res, 404, "not_found");
                            else
                                error_response(res, 502, "upstream");
                        } catch (const DataError& e) {
                            error_response(res, 400, e.what());
                        }
                    });
    }

    httplib::Server server_;
    std::shared_ptr<const ModelBundle> bundle_;
    std::atomic<bool> ready_{false};
    bool fetch_enabled_ = false;
    FetchConfig fetch_cfg_;
};

}  // namespace toprec
