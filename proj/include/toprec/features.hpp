#pragma once

// TF-IDF n-gram vectorization, unified or split into text / name feature
// spaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "toprec/common.hpp"
#include "toprec/textprep.hpp"

namespace toprec {

struct SparseVector {
    std::vector<std::size_t> indices;  // strictly ascending
    std::vector<double> values;        // positive, finite

    std::size_t nnz() const { return indices.size(); }
    bool empty() const { return indices.empty(); }

    double norm() const {
        double s = 0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

struct TfidfVocabulary {
    std::vector<std::string> terms;                    // index order
    std::unordered_map<std::string, std::size_t> term_index;
    std::vector<std::size_t> doc_freq;
    std::vector<double> idf;
    std::size_t n_docs = 0;
    std::size_t ngram_min = 1;
    std::size_t ngram_max = 2;
    std::size_t max_features = 20000;

    std::size_t width() const { return terms.size(); }
};

enum class FeatureMode { unified, separate };

struct FeatureSpaceConfig {
    FeatureMode mode = FeatureMode::unified;
    std::size_t text_max_features = 18000;
    std::size_t name_max_features = 2000;
};

namespace detail {

inline void for_each_ngram(const std::vector<std::string>& tokens,
                           std::size_t nmin, std::size_t nmax,
                           const std::function<void(const std::string&)>& fn) {
    for (std::size_t n = nmin; n <= nmax; ++n) {
        if (tokens.size() < n) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string term = tokens[i];
            for (std::size_t k = 1; k < n; ++k) {
                term += ' ';
                term += tokens[i + k];
            }
            fn(term);
        }
    }
}

}  // namespace detail

// Fits vocabulary on training documents: selects the max_features terms
// with the highest corpus term frequency (ties lexicographic) and computes
// smoothed idf: ln((1+n)/(1+df)) + 1.
inline TfidfVocabulary fit_tfidf(const std::vector<std::vector<std::string>>& train_docs,
                                 std::size_t max_features = 20000,
                                 std::size_t ngram_min = 1, std::size_t ngram_max = 2) {
    if (train_docs.empty()) throw DataError("fit_tfidf: empty corpus");
    std::map<std::string, std::size_t> corpus_tf;  // ordered for determinism
    std::map<std::string, std::size_t> df;
    for (const auto& doc : train_docs) {
        std::map<std::string, std::size_t> local;
        detail::for_each_ngram(doc, ngram_min, ngram_max,
                               [&](const std::string& t) { ++local[t]; });
        for (const auto& [t, c] : local) {
            corpus_tf[t] += c;
            ++df[t];
        }
    }
    std::vector<const std::string*> order;
    order.reserve(corpus_tf.size());
    for (const auto& [t, c] : corpus_tf) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string* a, const std::string* b) {
                         std::size_t ca = corpus_tf.at(*a), cb = corpus_tf.at(*b);
                         if (ca != cb) return ca > cb;
                         return *a < *b;
                     });
    if (order.size() > max_features) order.resize(max_features);
    // Stable column order: lexicographic over the selected terms.
    std::sort(order.begin(), order.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });

    TfidfVocabulary v;
    v.n_docs = train_docs.size();
    v.ngram_min = ngram_min;
    v.ngram_max = ngram_max;
    v.max_features = max_features;
    for (const std::string* t : order) {
        v.term_index[*t] = v.terms.size();
        v.terms.push_back(*t);
        std::size_t d = df.at(*t);
        v.doc_freq.push_back(d);
        v.idf.push_back(std::log((1.0 + static_cast<double>(v.n_docs)) /
                                 (1.0 + static_cast<double>(d))) + 1.0);
    }
    return v;
}

// count(term) * idf, L2-normalized. Unknown terms ignored; a document with
// no known terms yields the empty vector.
inline SparseVector transform_tokens(const std::vector<std::string>& doc,
                                     const TfidfVocabulary& vocab) {
    std::map<std::size_t, double> acc;
    detail::for_each_ngram(doc, vocab.ngram_min, vocab.ngram_max,
                           [&](const std::string& t) {
                               auto it = vocab.term_index.find(t);
                               if (it != vocab.term_index.end())
                                   acc[it->second] += 1.0;
                           });
    SparseVector out;
    double norm2 = 0;
    for (auto& [col, cnt] : acc) {
        double v = cnt * vocab.idf[col];
        out.indices.push_back(col);
        out.values.push_back(v);
        norm2 += v * v;
    }
    if (norm2 > 0) {
        double inv = 1.0 / std::sqrt(norm2);
        for (double& v : out.values) v *= inv;
    }
    return out;
}

// A fitted feature space: one vocabulary (unified) or a text + name pair
// (separate), matching how the classifier was trained.
struct FeatureSpace {
    FeatureSpaceConfig config;
    TfidfVocabulary text_vocab;   // unified mode uses only this one
    TfidfVocabulary name_vocab;   // separate mode only

    std::size_t width() const {
        return config.mode == FeatureMode::unified
                   ? text_vocab.width()
                   : text_vocab.width() + name_vocab.width();
    }
};

inline std::vector<std::string> text_group_tokens(const ProcessedDoc& d) {
    std::vector<std::string> out;
    for (const auto* src : {&d.description_tokens, &d.readme_tokens, &d.wiki_tokens})
        out.insert(out.end(), src->begin(), src->end());
    return out;
}

inline std::vector<std::string> name_group_tokens(const ProcessedDoc& d) {
    std::vector<std::string> out;
    out.insert(out.end(), d.name_tokens.begin(), d.name_tokens.end());
    out.insert(out.end(), d.filename_tokens.begin(), d.filename_tokens.end());
    return out;
}

inline FeatureSpace fit_feature_space(const std::vector<ProcessedDoc>& train_docs,
                                      const FeatureSpaceConfig& cfg,
                                      std::size_t unified_max_features = 20000) {
    FeatureSpace fs;
    fs.config = cfg;
    if (cfg.mode == FeatureMode::unified) {
        std::vector<std::vector<std::string>> docs;
        docs.reserve(train_docs.size());
        for (const auto& d : train_docs) docs.push_back(d.all_tokens);
        fs.text_vocab = fit_tfidf(docs, unified_max_features);
    } else {
        std::vector<std::vector<std::string>> text_docs, name_docs;
        for (const auto& d : train_docs) {
            text_docs.push_back(text_group_tokens(d));
            name_docs.push_back(name_group_tokens(d));
        }
        fs.text_vocab = fit_tfidf(text_docs, cfg.text_max_features);
        fs.name_vocab = fit_tfidf(name_docs, cfg.name_max_features);
    }
    return fs;
}

// Separate mode: each sub-vector is L2-normalized in its own space, the
// concatenation is normalized once more so the full vector has unit norm.
inline SparseVector transform(const ProcessedDoc& doc, const FeatureSpace& fs) {
    if (fs.config.mode == FeatureMode::unified)
        return transform_tokens(doc.all_tokens, fs.text_vocab);

    SparseVector text = transform_tokens(text_group_tokens(doc), fs.text_vocab);
    SparseVector name = transform_tokens(name_group_tokens(doc), fs.name_vocab);
    SparseVector out;
    out.indices = text.indices;
    out.values = text.values;
    std::size_t offset = fs.text_vocab.width();
    for (std::size_t k = 0; k < name.indices.size(); ++k) {
        out.indices.push_back(name.indices[k] + offset);
        out.values.push_back(name.values[k]);
    }
    double n = out.norm();
    if (n > 0)
        for (double& v : out.values) v /= n;
    return out;
}

}  // namespace toprec
