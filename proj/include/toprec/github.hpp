#pragma once

// Optional remote-repository fetch over the GitHub REST API. Everything
// else in the library works without network access.

#include <optional>
#include <string>

// The default listen backlog (5) drops connections under concurrent load.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "toprec/common.hpp"
#include "toprec/corpus.hpp"

namespace toprec {

struct FetchConfig {
    std::string api_host = "api.github.com";
    std::optional<std::string> token;  // GITHUB_TOKEN
    int timeout_seconds = 15;
};

namespace detail {

inline httplib::Headers github_headers(const FetchConfig& cfg, const char* accept) {
    httplib::Headers h = {{"Accept", accept}, {"User-Agent", "toprec/1.0"}};
    if (cfg.token && !cfg.token->empty())
        h.emplace("Authorization", "Bearer " + *cfg.token);
    return h;
}

template <typename ClientT>
inline httplib::Result github_get(ClientT& cli, const std::string& path,
                                  const FetchConfig& cfg, const char* accept) {
    return cli.Get(path, github_headers(cfg, accept));
}

template <typename ClientT>
inline RepoRecord fetch_with_client(ClientT& cli, const std::string& full_name,
                                    const FetchConfig& cfg) {
    auto res = github_get(cli, "/repos/" + full_name, cfg, "application/vnd.github+json");
    if (!res)
        throw UpstreamError(UpstreamError::Kind::unavailable,
                            "transport failure reaching " + cfg.api_host);
    if (res->status == 404)
        throw UpstreamError(UpstreamError::Kind::not_found,
                            "repository not found: " + full_name);
    if (res->status == 401 || res->status == 403 || res->status == 429)
        throw UpstreamError(UpstreamError::Kind::auth,
                            "upstream auth/rate-limit failure (HTTP " +
                                std::to_string(res->status) + ")");
    if (res->status != 200)
        throw UpstreamError(UpstreamError::Kind::unavailable,
                            "unexpected upstream status " + std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded())
        throw UpstreamError(UpstreamError::Kind::unavailable, "malformed upstream JSON");

    RepoRecord r;
    r.full_name = full_name;
    if (j.contains("description") && j["description"].is_string())
        r.description = j["description"].get<std::string>();
    if (j.contains("stargazers_count") && j["stargazers_count"].is_number_integer())
        r.stars = j["stargazers_count"].get<std::int64_t>();
    if (j.contains("topics") && j["topics"].is_array())
        for (const auto& t : j["topics"])
            if (t.is_string()) r.user_topics.push_back(t.get<std::string>());

    // README content; absent README is not an error.
    auto readme = github_get(cli, "/repos/" + full_name + "/readme", cfg,
                             "application/vnd.github.raw+json");
    if (readme && readme->status == 200 && !readme->body.empty())
        r.readme = readme->body;

    // File listing via the git tree, when obtainable.
    auto tree = github_get(cli, "/repos/" + full_name + "/git/trees/HEAD?recursive=1",
                           cfg, "application/vnd.github+json");
    if (tree && tree->status == 200) {
        nlohmann::json tj = nlohmann::json::parse(tree->body, nullptr, false);
        if (!tj.is_discarded() && tj.contains("tree"))
            for (const auto& e : tj["tree"])
                if (e.value("type", "") == "blob" && e.contains("path"))
                    r.file_paths.push_back(e["path"].get<std::string>());
    }
    return r;
}

}  // namespace detail

inline RepoRecord fetch_repo(const std::string& full_name, const FetchConfig& cfg = {}) {
    auto slash = full_name.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == full_name.size())
        throw DataError("fetch_repo: expected owner/name, got " + full_name);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient cli(cfg.api_host, 443);
    cli.set_connection_timeout(cfg.timeout_seconds);
    cli.set_read_timeout(cfg.timeout_seconds);
    return detail::fetch_with_client(cli, full_name, cfg);
#else
    (void)cfg;
    throw UpstreamError(UpstreamError::Kind::unavailable,
                        "built without TLS support; remote fetch disabled");
#endif
}

}  // namespace toprec
