#pragma once

// End-to-end orchestration: corpus -> processed dataset -> trained bundle
// -> evaluation, plus the ablation driver. Shared by the CLI, the service
// and the tests.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toprec/bundle.hpp"
#include "toprec/classify.hpp"
#include "toprec/common.hpp"
#include "toprec/corpus.hpp"
#include "toprec/eval.hpp"
#include "toprec/features.hpp"
#include "toprec/textprep.hpp"
#include "toprec/topicnorm.hpp"

namespace toprec {

struct SourceSelection {
    bool name = true;
    bool description = true;
    bool readme = true;
    bool wiki = true;
    bool filenames = true;

    bool any() const { return name || description || readme || wiki || filenames; }
};

struct PrepareConfig {
    FilterConfig filter;
    TokenFilterConfig token_filter;  // thresholds; word lists come from tables
    MappingMode mapping = MappingMode::with_heuristics;
    std::size_t min_support = 100;
    std::size_t top_k = 0;  // when > 0, overrides min_support
    std::uint64_t seed = 42;
    bool prune_on_train_only = true;
};

struct Dataset {
    std::vector<ProcessedDoc> docs;
    std::vector<LabelVector> labels;
    TopicVocabulary vocab;
    CorpusSplit split;
    std::map<std::string, std::set<std::string>> subtopics;  // discovered mappings
    std::map<std::string, SourceStats> stats;
};

// Preprocesses one repository's text into a ProcessedDoc.
inline ProcessedDoc preprocess_record(const RepoRecord& r, const TextTables& tables,
                                      const TokenFilterConfig& base_cfg) {
    TokenFilterConfig cfg = base_cfg;
    cfg.stopwords = tables.stopwords;
    cfg.generic_name_blocklist = tables.filename_blocklist;
    auto [name_tokens, filename_tokens] =
        clean_names(r.full_name, r.file_paths, cfg, tables.abbreviations,
                    tables.lemma_exceptions);
    auto clean = [&](const std::optional<std::string>& s) {
        return s ? clean_text(*s, tables.abbreviations, cfg, tables.lemma_exceptions)
                 : std::vector<std::string>{};
    };
    return assemble_document(std::move(name_tokens), clean(r.description),
                             clean(r.readme), clean(r.wiki),
                             std::move(filename_tokens));
}

// The prepare phase: filter, map topics, reduce the vocabulary by support,
// preprocess text, split, and prune rare tokens on the training portion.
inline Dataset prepare_dataset(const std::vector<RepoRecord>& raw,
                               const TopicVocabulary& full_vocab,
                               const TextTables& tables, const PrepareConfig& cfg) {
    std::vector<RepoRecord> records = filter_corpus(raw, cfg.filter);
    if (records.empty()) throw DataError("prepare: no repository passed the filters");

    Dataset ds;
    std::vector<LabelVector> full_labels;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < records.size(); ++i) {
        LabelVector lv = map_repo_topics(records[i].user_topics, full_vocab, cfg.mapping,
                                         tables, &ds.subtopics);
        if (lv.count() == 0) continue;  // repositories with no cleaned topics
        keep.push_back(i);
        full_labels.push_back(std::move(lv));
    }
    if (full_labels.empty())
        throw DataError("prepare: no repository carries a featured topic");

    ds.vocab = filter_by_support(full_labels, full_vocab, cfg.min_support, cfg.top_k);

    std::vector<ProcessedDoc> docs;
    std::vector<LabelVector> labels;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        LabelVector lv = reencode(full_labels[k], full_vocab, ds.vocab);
        if (lv.count() == 0) continue;
        ProcessedDoc d = preprocess_record(records[keep[k]], tables, cfg.token_filter);
        if (d.all_tokens.empty()) continue;  // left with no input data
        docs.push_back(std::move(d));
        labels.push_back(std::move(lv));
    }
    if (docs.empty()) throw DataError("prepare: no repository survived preprocessing");

    ds.split = split_corpus(docs.size(), cfg.seed);

    if (cfg.token_filter.min_text_freq > 1 || cfg.token_filter.min_name_freq > 1) {
        std::vector<ProcessedDoc> basis;
        if (cfg.prune_on_train_only)
            for (std::size_t i : ds.split.train) basis.push_back(docs[i]);
        docs = prune_rare(docs, cfg.token_filter,
                          cfg.prune_on_train_only ? &basis : nullptr);
    }
    ds.docs = std::move(docs);
    ds.labels = std::move(labels);
    ds.stats = corpus_stats(ds.docs);
    return ds;
}

// Restricts documents to a subset of sources (for ablations).
inline ProcessedDoc select_sources(const ProcessedDoc& d, const SourceSelection& sel) {
    ProcessedDoc out;
    if (sel.name) out.name_tokens = d.name_tokens;
    if (sel.description) out.description_tokens = d.description_tokens;
    if (sel.readme) out.readme_tokens = d.readme_tokens;
    if (sel.wiki) out.wiki_tokens = d.wiki_tokens;
    if (sel.filenames) out.filename_tokens = d.filename_tokens;
    out.rebuild_all();
    return out;
}

struct TrainResult {
    FeatureSpace features;
    OvrModel model;
    double train_seconds = 0;
};

inline TrainResult train_on_dataset(const Dataset& ds, ClassifierKind kind,
                                    const TrainConfig& cfg,
                                    const FeatureSpaceConfig& fs_cfg = {},
                                    std::size_t max_features = 20000) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ProcessedDoc> train_docs;
    std::vector<LabelVector> train_labels;
    for (std::size_t i : ds.split.train) {
        train_docs.push_back(ds.docs[i]);
        train_labels.push_back(ds.labels[i]);
    }
    TrainResult r;
    r.features = fit_feature_space(train_docs, fs_cfg, max_features);
    std::vector<SparseVector> rows;
    rows.reserve(train_docs.size());
    for (const auto& d : train_docs) rows.push_back(transform(d, r.features));

    // Drop topics with zero support in the training split; class weights
    // (and MNB priors) are undefined there.
    std::vector<std::size_t> col_freq(ds.vocab.size(), 0);
    for (const auto& lv : train_labels)
        for (std::size_t t = 0; t < lv.bits.size(); ++t)
            if (lv.bits[t]) ++col_freq[t];
    bool all_supported = true;
    for (std::size_t f : col_freq)
        if (f == 0) { all_supported = false; break; }
    if (!all_supported)
        throw DataError("train: a topic has zero support in the training split; "
                        "raise min_support or re-seed the split");

    if (kind == ClassifierKind::logistic) {
        ClassWeights w = compute_class_weights(train_labels);
        r.model = train_logistic_ovr(rows, train_labels, w, cfg, r.features.width(),
                                     ds.vocab.topics);
    } else {
        r.model = train_mnb_ovr(rows, train_labels, cfg, r.features.width(),
                                ds.vocab.topics);
    }
    r.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline MetricsReport evaluate_on_split(const TrainResult& tr, const Dataset& ds,
                                       const std::vector<std::size_t>& rows_idx,
                                       const EvalConfig& cfg = {}) {
    std::vector<SparseVector> rows;
    LabelMatrix truth;
    for (std::size_t i : rows_idx) {
        rows.push_back(transform(ds.docs[i], tr.features));
        truth.push_back(ds.labels[i]);
    }
    MetricsReport rep = evaluate(tr.model, rows, truth, ds.vocab, cfg);
    rep.train_seconds = tr.train_seconds;
    return rep;
}

// --- ablation --------------------------------------------------------------

struct AblationRow {
    std::string name;
    SourceSelection sources;
    std::size_t top_k = 0;          // 0 = keep dataset vocabulary
    FeatureSpaceConfig feature_cfg;
    ClassifierKind kind = ClassifierKind::logistic;
};

struct AblationResult {
    std::string name;
    MetricsReport report;
};

// Trains and evaluates one configuration per plan row with a shared seed.
inline std::vector<AblationResult> ablation(const Dataset& ds,
                                            const std::vector<AblationRow>& plan,
                                            const TrainConfig& train_cfg,
                                            std::size_t max_features = 20000) {
    std::vector<AblationResult> out;
    for (const auto& row : plan) {
        if (!row.sources.any())
            throw DataError("ablation: plan row '" + row.name + "' selects no sources");
        Dataset sub;
        sub.vocab = ds.vocab;
        sub.split = ds.split;
        std::vector<LabelVector> all_labels = ds.labels;
        for (const auto& d : ds.docs) sub.docs.push_back(select_sources(d, row.sources));
        sub.labels = std::move(all_labels);
        if (row.top_k > 0 && row.top_k < ds.vocab.size()) {
            TopicVocabulary reduced = filter_by_support(ds.labels, ds.vocab, 1, row.top_k);
            std::vector<ProcessedDoc> docs2;
            std::vector<LabelVector> labels2;
            std::vector<std::size_t> kept_idx;
            for (std::size_t i = 0; i < sub.docs.size(); ++i) {
                LabelVector lv = reencode(sub.labels[i], ds.vocab, reduced);
                docs2.push_back(sub.docs[i]);
                labels2.push_back(std::move(lv));
            }
            sub.vocab = reduced;
            sub.docs = std::move(docs2);
            sub.labels = std::move(labels2);
        }
        TrainResult tr = train_on_dataset(sub, row.kind, train_cfg, row.feature_cfg,
                                          max_features);
        // Skip test rows whose labels vanished under a reduced vocabulary.
        std::vector<std::size_t> test_rows;
        for (std::size_t i : sub.split.test)
            if (sub.labels[i].count() > 0) test_rows.push_back(i);
        if (test_rows.empty())
            throw DataError("ablation: plan row '" + row.name + "' has an empty test set");
        out.push_back({row.name, evaluate_on_split(tr, sub, test_rows)});
    }
    return out;
}

inline std::string ablation_to_csv(const std::vector<AblationResult>& results) {
    std::string csv = "name,n,precision,recall,f1,success,lrap\n";
    char buf[200];
    for (const auto& r : results)
        for (const auto& a : r.report.at_n) {
            std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                          r.name.c_str(), a.n, a.precision, a.recall, a.f1, a.success,
                          r.report.lrap);
            csv += buf;
        }
    return csv;
}

// --- dataset directory layout ---------------------------------------------

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "docs.jsonl");
        for (const auto& d : ds.docs) {
            nlohmann::json j = {{"name", d.name_tokens},
                                {"description", d.description_tokens},
                                {"readme", d.readme_tokens},
                                {"wiki", d.wiki_tokens},
                                {"filenames", d.filename_tokens}};
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "labels.jsonl");
        for (const auto& lv : ds.labels) {
            nlohmann::json j = decode_labels(lv, ds.vocab);
            out << j.dump() << "\n";
        }
    }
    {
        nlohmann::json j = {{"train", ds.split.train},
                            {"validation", ds.split.validation},
                            {"test", ds.split.test},
                            {"seed", ds.split.seed}};
        std::ofstream(dir / "splits.json") << j.dump(2);
    }
    std::ofstream(dir / "topics.json")
        << detail::vocab_to_json(ds.vocab).dump(2);
    {
        std::ofstream out(dir / "subtopics.tsv");
        for (const auto& [sub, feats] : ds.subtopics)
            for (const auto& f : feats) out << sub << "\t" << f << "\n";
    }
    {
        nlohmann::json j;
        for (const auto& [src, s] : ds.stats)
            j[src] = {{"min", s.min}, {"max", s.max}, {"mean", s.mean},
                      {"median", s.median}, {"n_nonempty", s.n_nonempty}};
        std::ofstream(dir / "stats.json") << j.dump(2);
    }
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.vocab = load_vocabulary((dir / "topics.json").string());
    {
        std::ifstream in(dir / "docs.jsonl");
        if (!in) throw DataError("dataset: missing docs.jsonl in " + dir.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            ProcessedDoc d;
            d.name_tokens = j.at("name").get<std::vector<std::string>>();
            d.description_tokens = j.at("description").get<std::vector<std::string>>();
            d.readme_tokens = j.at("readme").get<std::vector<std::string>>();
            d.wiki_tokens = j.at("wiki").get<std::vector<std::string>>();
            d.filename_tokens = j.at("filenames").get<std::vector<std::string>>();
            d.rebuild_all();
            ds.docs.push_back(std::move(d));
        }
    }
    {
        std::ifstream in(dir / "labels.jsonl");
        if (!in) throw DataError("dataset: missing labels.jsonl in " + dir.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            std::set<std::string> topics;
            for (const auto& t : j) topics.insert(t.get<std::string>());
            ds.labels.push_back(encode_topics(topics, ds.vocab));
        }
    }
    if (ds.docs.size() != ds.labels.size())
        throw DataError("dataset: docs.jsonl and labels.jsonl row counts differ");
    {
        std::ifstream in(dir / "splits.json");
        if (!in) throw DataError("dataset: missing splits.json in " + dir.string());
        nlohmann::json j = nlohmann::json::parse(in);
        ds.split.train = j.at("train").get<std::vector<std::size_t>>();
        ds.split.validation = j.at("validation").get<std::vector<std::size_t>>();
        ds.split.test = j.at("test").get<std::vector<std::size_t>>();
        ds.split.seed = j.at("seed").get<std::uint64_t>();
    }
    return ds;
}

}  // namespace toprec
