#pragma once

// Model bundle persistence: everything needed for bit-reproducible
// prediction (vocabularies, preprocessing tables, classifier parameters).
// Saves are atomic (temp directory then rename).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "toprec/classify.hpp"
#include "toprec/common.hpp"
#include "toprec/features.hpp"
#include "toprec/textprep.hpp"
#include "toprec/topicnorm.hpp"

namespace toprec {

inline constexpr int kBundleFormatVersion = 1;

struct ModelBundle {
    std::string created_at;
    std::uint64_t seed = 42;
    std::string model_version = "1";
    TopicVocabulary topics;
    FeatureSpace features;
    OvrModel model;
    TextTables tables;
};

namespace detail {

inline nlohmann::json tfidf_to_json(const TfidfVocabulary& v) {
    return {{"terms", v.terms},      {"doc_freq", v.doc_freq},
            {"idf", v.idf},          {"n_docs", v.n_docs},
            {"ngram_min", v.ngram_min}, {"ngram_max", v.ngram_max},
            {"max_features", v.max_features}};
}

inline TfidfVocabulary tfidf_from_json(const nlohmann::json& j) {
    TfidfVocabulary v;
    v.terms = j.at("terms").get<std::vector<std::string>>();
    v.doc_freq = j.at("doc_freq").get<std::vector<std::size_t>>();
    v.idf = j.at("idf").get<std::vector<double>>();
    v.n_docs = j.at("n_docs").get<std::size_t>();
    v.ngram_min = j.at("ngram_min").get<std::size_t>();
    v.ngram_max = j.at("ngram_max").get<std::size_t>();
    v.max_features = j.at("max_features").get<std::size_t>();
    if (v.idf.size() != v.terms.size() || v.doc_freq.size() != v.terms.size())
        throw ModelError("tfidf vocabulary: array length mismatch");
    for (std::size_t i = 0; i < v.terms.size(); ++i) v.term_index[v.terms[i]] = i;
    return v;
}

inline nlohmann::json vocab_to_json(const TopicVocabulary& v) {
    nlohmann::json topics = nlohmann::json::array();
    for (const auto& t : v.topics) {
        nlohmann::json aliases = nlohmann::json::array();
        for (const auto& [al, tgt] : v.aliases)
            if (tgt == t) aliases.push_back(al);
        topics.push_back({{"topic", t}, {"aliases", aliases}});
    }
    nlohmann::json j;
    j["topics"] = topics;
    j["frequent_embedded"] = v.frequent_embedded;
    j["protected"] = v.protected_tokens;
    j["min_support"] = v.min_support;
    return j;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ModelError("cannot write " + p.string());
    out << content;
    if (!out) throw ModelError("write failed for " + p.string());
}

inline void write_word_set(const std::filesystem::path& p, const std::set<std::string>& s) {
    std::string content;
    for (const auto& w : s) content += w + "\n";
    write_file(p, content);
}

}  // namespace detail

inline std::filesystem::path save_model(const ModelBundle& b, std::filesystem::path dir) {
    namespace fs = std::filesystem;
    if (dir.filename().empty()) dir = dir.parent_path();  // strip trailing '/'
    fs::path tmp = dir;
    tmp += ".tmp";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp / "tables");

    nlohmann::json manifest = {
        {"format_version", kBundleFormatVersion},
        {"kind", b.model.kind == ClassifierKind::logistic ? "logistic" : "mnb"},
        {"created_at", b.created_at},
        {"seed", b.seed},
        {"model_version", b.model_version},
        {"config",
         {{"learning_rate", b.model.train_config.learning_rate},
          {"max_iters", b.model.train_config.max_iters},
          {"l2", b.model.train_config.l2},
          {"tol", b.model.train_config.tol},
          {"use_class_weights", b.model.train_config.use_class_weights}}}};
    detail::write_file(tmp / "manifest.json", manifest.dump(2));
    detail::write_file(tmp / "topics.json", detail::vocab_to_json(b.topics).dump(2));

    nlohmann::json tfidf;
    tfidf["mode"] = b.features.config.mode == FeatureMode::unified ? "unified" : "separate";
    tfidf["text_max_features"] = b.features.config.text_max_features;
    tfidf["name_max_features"] = b.features.config.name_max_features;
    tfidf["text_vocab"] = detail::tfidf_to_json(b.features.text_vocab);
    if (b.features.config.mode == FeatureMode::separate)
        tfidf["name_vocab"] = detail::tfidf_to_json(b.features.name_vocab);
    detail::write_file(tmp / "tfidf.json", tfidf.dump());

    nlohmann::json clf;
    clf["kind"] = b.model.kind == ClassifierKind::logistic ? "logistic" : "mnb";
    clf["feature_width"] = b.model.feature_width;
    if (b.model.kind == ClassifierKind::logistic) {
        clf["per_topic"] = nlohmann::json::array();
        for (const auto& m : b.model.logistic)
            clf["per_topic"].push_back({{"weights", m.weights}, {"bias", m.bias}});
    } else {
        clf["per_topic"] = nlohmann::json::array();
        for (const auto& m : b.model.mnb)
            clf["per_topic"].push_back({{"log_prior_pos", m.log_prior_pos},
                                        {"log_prior_neg", m.log_prior_neg},
                                        {"log_theta_pos", m.log_theta_pos},
                                        {"log_theta_neg", m.log_theta_neg}});
    }
    detail::write_file(tmp / "classifier.json", clf.dump());

    detail::write_word_set(tmp / "tables" / "stopwords.txt", b.tables.stopwords);
    detail::write_word_set(tmp / "tables" / "filename_blocklist.txt",
                           b.tables.filename_blocklist);
    {
        std::string content;
        for (const auto& [k, exp] : b.tables.abbreviations) {
            content += k + "\t";
            for (std::size_t i = 0; i < exp.size(); ++i)
                content += (i ? " " : "") + exp[i];
            content += "\n";
        }
        detail::write_file(tmp / "tables" / "abbreviations.tsv", content);
    }
    {
        std::string content;
        for (const auto& [k, v] : b.tables.lemma_exceptions)
            content += k + "\t" + v + "\n";
        detail::write_file(tmp / "tables" / "lemma_exceptions.tsv", content);
    }

    // Replace the previous bundle atomically.
    fs::path old = dir;
    old += ".old";
    fs::remove_all(old, ec);
    if (fs::exists(dir)) fs::rename(dir, old);
    fs::rename(tmp, dir);
    fs::remove_all(old, ec);
    return dir / "manifest.json";
}

inline ModelBundle load_model(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    auto read_json = [&](const char* name) {
        fs::path p = dir / name;
        std::ifstream in(p);
        if (!in) throw ModelError("bundle: missing " + p.string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ModelError("bundle: malformed JSON in " + p.string());
        return j;
    };
    ModelBundle b;
    nlohmann::json manifest = read_json("manifest.json");
    int ver = manifest.value("format_version", -1);
    if (ver != kBundleFormatVersion)
        throw ModelError("bundle: unsupported format_version " + std::to_string(ver));
    b.created_at = manifest.value("created_at", "");
    b.seed = manifest.value("seed", std::uint64_t{42});
    b.model_version = manifest.value("model_version", "1");
    b.model.train_config.learning_rate = manifest["config"].value("learning_rate", 0.1);
    b.model.train_config.max_iters = manifest["config"].value("max_iters", std::size_t{1000});
    b.model.train_config.l2 = manifest["config"].value("l2", 1e-4);
    b.model.train_config.tol = manifest["config"].value("tol", 1e-6);
    b.model.train_config.use_class_weights =
        manifest["config"].value("use_class_weights", true);

    b.topics = vocabulary_from_json(read_json("topics.json"));

    nlohmann::json tfidf = read_json("tfidf.json");
    b.features.config.mode =
        tfidf.at("mode") == "separate" ? FeatureMode::separate : FeatureMode::unified;
    b.features.config.text_max_features = tfidf.value("text_max_features", std::size_t{18000});
    b.features.config.name_max_features = tfidf.value("name_max_features", std::size_t{2000});
    b.features.text_vocab = detail::tfidf_from_json(tfidf.at("text_vocab"));
    if (b.features.config.mode == FeatureMode::separate)
        b.features.name_vocab = detail::tfidf_from_json(tfidf.at("name_vocab"));

    nlohmann::json clf = read_json("classifier.json");
    b.model.kind = clf.at("kind") == "mnb" ? ClassifierKind::mnb : ClassifierKind::logistic;
    b.model.feature_width = clf.at("feature_width").get<std::size_t>();
    if (b.model.feature_width != b.features.width())
        throw ModelError("bundle: classifier width " + std::to_string(b.model.feature_width) +
                         " does not match feature space width " +
                         std::to_string(b.features.width()));
    for (const auto& e : clf.at("per_topic")) {
        if (b.model.kind == ClassifierKind::logistic) {
            BinaryLinearModel m;
            m.weights = e.at("weights").get<std::vector<double>>();
            m.bias = e.at("bias").get<double>();
            if (m.weights.size() != b.model.feature_width)
                throw ModelError("bundle: per-topic weight vector has wrong width");
            b.model.logistic.push_back(std::move(m));
        } else {
            BinaryNbModel m;
            m.log_prior_pos = e.at("log_prior_pos").get<double>();
            m.log_prior_neg = e.at("log_prior_neg").get<double>();
            m.log_theta_pos = e.at("log_theta_pos").get<std::vector<double>>();
            m.log_theta_neg = e.at("log_theta_neg").get<std::vector<double>>();
            if (m.log_theta_pos.size() != b.model.feature_width ||
                m.log_theta_neg.size() != b.model.feature_width)
                throw ModelError("bundle: per-topic NB table has wrong width");
            b.model.mnb.push_back(std::move(m));
        }
    }
    if (b.model.num_topics() != b.topics.size())
        throw ModelError("bundle: classifier count " + std::to_string(b.model.num_topics()) +
                         " does not match topic count " + std::to_string(b.topics.size()));

    b.tables.stopwords = load_word_set((dir / "tables" / "stopwords.txt").string());
    b.tables.filename_blocklist =
        load_word_set((dir / "tables" / "filename_blocklist.txt").string());
    b.tables.abbreviations =
        load_abbreviations((dir / "tables" / "abbreviations.tsv").string());
    b.tables.lemma_exceptions =
        load_lemma_exceptions((dir / "tables" / "lemma_exceptions.tsv").string());
    return b;
}

inline std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace toprec
