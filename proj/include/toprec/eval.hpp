#pragma once

// Ranking metrics (P@n, R@n, F1@n, S@n, LRAP), per-topic reports, input
// statistics, and the full evaluation report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toprec/classify.hpp"
#include "toprec/common.hpp"
#include "toprec/features.hpp"
#include "toprec/textprep.hpp"
#include "toprec/topicnorm.hpp"

namespace toprec {

using ScoreMatrix = std::vector<std::vector<double>>;
using LabelMatrix = std::vector<LabelVector>;

struct AtN {
    std::size_t n = 0;
    double precision = 0, recall = 0, f1 = 0, success = 0;
};

struct PerTopicRow {
    std::string topic;
    double precision = 0, recall = 0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::vector<AtN> at_n;
    double lrap = 0;
    std::vector<PerTopicRow> per_topic;
    std::vector<std::pair<std::size_t, double>> coverage_curve;
    double train_seconds = 0;
    double predict_ms_per_row = 0;
    std::size_t rows_evaluated = 0;
    std::size_t rows_skipped_empty_truth = 0;
};

namespace detail {

inline void check_shapes(const ScoreMatrix& scores, const LabelMatrix& truth) {
    if (scores.size() != truth.size())
        throw DataError("metrics: row count mismatch");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (truth[i].bits.size() != scores[i].size())
            throw DataError("metrics: column count mismatch at row " + std::to_string(i));
        if (truth[i].count() == 0)
            throw DataError("metrics: empty ground truth at row " + std::to_string(i));
    }
}

}  // namespace detail

// Macro-averaged precision/recall over top-n (ties lexicographic, as in
// recommend); F1 is the harmonic mean of the averaged P and R; S@n is the
// fraction of rows with at least one hit.
inline AtN metrics_at_n(const ScoreMatrix& scores, const LabelMatrix& truth,
                        std::size_t n, const std::vector<std::string>& topic_names) {
    detail::check_shapes(scores, truth);
    if (scores.empty()) throw DataError("metrics_at_n: no rows");
    double sum_p = 0, sum_r = 0, hits_any = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto top = top_n_indices(scores[i], n, topic_names);
        std::size_t hits = 0;
        for (std::size_t t : top)
            if (truth[i].bits[t]) ++hits;
        sum_p += static_cast<double>(hits) / static_cast<double>(n);
        sum_r += static_cast<double>(hits) / static_cast<double>(truth[i].count());
        if (hits > 0) hits_any += 1.0;
    }
    AtN r;
    r.n = n;
    double rows = static_cast<double>(scores.size());
    r.precision = sum_p / rows;
    r.recall = sum_r / rows;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.success = hits_any / rows;
    return r;
}

// Label ranking average precision: for each true label, the fraction of
// labels scored at or above it that are also true, averaged per row and
// over rows.
inline double lrap(const ScoreMatrix& scores, const LabelMatrix& truth) {
    detail::check_shapes(scores, truth);
    if (scores.empty()) throw DataError("lrap: no rows");
    double total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& f = scores[i];
        const auto& y = truth[i].bits;
        double row = 0;
        std::size_t n_true = 0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (!y[j]) continue;
            ++n_true;
            std::size_t rank = 0, true_at_or_above = 0;
            for (std::size_t k = 0; k < y.size(); ++k) {
                if (f[k] >= f[j]) {
                    ++rank;
                    if (y[k]) ++true_at_or_above;
                }
            }
            row += static_cast<double>(true_at_or_above) / static_cast<double>(rank);
        }
        total += row / static_cast<double>(n_true);
    }
    return total / static_cast<double>(scores.size());
}

// Per-topic precision/recall from the top-n predicted sets.
inline std::vector<PerTopicRow> per_topic_metrics(const ScoreMatrix& scores,
                                                  const LabelMatrix& truth,
                                                  std::size_t n,
                                                  const std::vector<std::string>& topic_names) {
    std::size_t m = topic_names.size();
    std::vector<std::size_t> tp(m, 0), fp(m, 0), support(m, 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        for (std::size_t t = 0; t < m; ++t)
            if (truth[i].bits[t]) ++support[t];
        for (std::size_t t : top_n_indices(scores[i], n, topic_names)) {
            if (truth[i].bits[t]) ++tp[t];
            else ++fp[t];
        }
    }
    std::vector<PerTopicRow> out(m);
    for (std::size_t t = 0; t < m; ++t) {
        out[t].topic = topic_names[t];
        out[t].support = support[t];
        std::size_t predicted = tp[t] + fp[t];
        out[t].precision = predicted ? static_cast<double>(tp[t]) / predicted : 0.0;
        out[t].recall = support[t] ? static_cast<double>(tp[t]) / support[t] : 0.0;
    }
    return out;
}

struct EvalConfig {
    std::vector<std::size_t> n_values = {1, 3, 5, 8, 10};
    std::size_t per_topic_n = 5;
};

// Scores the given rows and produces the full report. Rows with empty
// ground truth are excluded and counted.
inline MetricsReport evaluate(const OvrModel& model,
                              const std::vector<SparseVector>& rows,
                              const LabelMatrix& truth,
                              const TopicVocabulary& vocab,
                              const EvalConfig& cfg = {}) {
    if (rows.empty()) throw DataError("evaluate: empty test split");
    ScoreMatrix scores;
    LabelMatrix kept;
    std::size_t skipped = 0;
    auto t0 = std::chrono::steady_clock::now();
    std::size_t timed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (truth[i].count() == 0) {
            ++skipped;
            continue;
        }
        scores.push_back(predict_scores(model, rows[i]).scores);
        kept.push_back(truth[i]);
        ++timed;
    }
    auto t1 = std::chrono::steady_clock::now();
    if (scores.empty()) throw DataError("evaluate: every row had empty ground truth");

    MetricsReport rep;
    rep.rows_evaluated = scores.size();
    rep.rows_skipped_empty_truth = skipped;
    for (std::size_t n : cfg.n_values) {
        std::size_t nn = std::min(n, vocab.size());
        rep.at_n.push_back(metrics_at_n(scores, kept, nn, vocab.topics));
    }
    rep.lrap = lrap(scores, kept);
    rep.per_topic = per_topic_metrics(scores, kept,
                                      std::min(cfg.per_topic_n, vocab.size()),
                                      vocab.topics);

    std::vector<std::size_t> freq(vocab.size(), 0);
    for (const auto& row : kept)
        for (std::size_t t = 0; t < vocab.size(); ++t)
            if (row.bits[t]) ++freq[t];
    std::sort(freq.begin(), freq.end(), std::greater<>());
    std::size_t total_freq = std::accumulate(freq.begin(), freq.end(), std::size_t{0});
    if (total_freq > 0)
        for (std::size_t k = 1; k <= freq.size(); ++k)
            rep.coverage_curve.emplace_back(k, coverage(freq, k));

    rep.predict_ms_per_row =
        timed ? std::chrono::duration<double, std::milli>(t1 - t0).count() / timed : 0.0;
    return rep;
}

// Per-source token-count statistics over non-empty lists.
struct SourceStats {
    std::size_t min = 0, max = 0;
    double mean = 0, median = 0;
    std::size_t n_nonempty = 0;
};

inline SourceStats stats_of(std::vector<std::size_t> counts) {
    SourceStats s;
    counts.erase(std::remove(counts.begin(), counts.end(), std::size_t{0}), counts.end());
    s.n_nonempty = counts.size();
    if (counts.empty()) return s;
    std::sort(counts.begin(), counts.end());
    s.min = counts.front();
    s.max = counts.back();
    s.mean = static_cast<double>(std::accumulate(counts.begin(), counts.end(),
                                                 std::size_t{0})) /
             counts.size();
    std::size_t mid = counts.size() / 2;
    s.median = counts.size() % 2 ? static_cast<double>(counts[mid])
                                 : (counts[mid - 1] + counts[mid]) / 2.0;
    return s;
}

inline std::map<std::string, SourceStats> corpus_stats(const std::vector<ProcessedDoc>& docs) {
    if (docs.empty()) throw DataError("corpus_stats: empty document list");
    std::map<std::string, std::vector<std::size_t>> counts;
    for (const auto& d : docs) {
        counts["name"].push_back(d.name_tokens.size());
        counts["description"].push_back(d.description_tokens.size());
        counts["readme"].push_back(d.readme_tokens.size());
        counts["wiki"].push_back(d.wiki_tokens.size());
        counts["filenames"].push_back(d.filename_tokens.size());
        counts["all"].push_back(d.all_tokens.size());
    }
    std::map<std::string, SourceStats> out;
    for (auto& [k, v] : counts) out[k] = stats_of(std::move(v));
    return out;
}

// --- report serialization --------------------------------------------------

inline nlohmann::json report_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["lrap"] = r.lrap;
    j["rows_evaluated"] = r.rows_evaluated;
    j["rows_skipped_empty_truth"] = r.rows_skipped_empty_truth;
    j["train_seconds"] = r.train_seconds;
    j["predict_ms_per_row"] = r.predict_ms_per_row;
    j["at_n"] = nlohmann::json::array();
    for (const auto& a : r.at_n)
        j["at_n"].push_back({{"n", a.n},
                             {"precision", a.precision},
                             {"recall", a.recall},
                             {"f1", a.f1},
                             {"success", a.success}});
    j["per_topic"] = nlohmann::json::array();
    for (const auto& p : r.per_topic)
        j["per_topic"].push_back({{"topic", p.topic},
                                  {"precision", p.precision},
                                  {"recall", p.recall},
                                  {"support", p.support}});
    j["coverage_curve"] = nlohmann::json::array();
    for (const auto& [k, c] : r.coverage_curve)
        j["coverage_curve"].push_back({{"k", k}, {"coverage", c}});
    return j;
}

inline std::string report_to_text(const MetricsReport& r) {
    char buf[160];
    std::string out;
    out += "  n   P@n     R@n     F1@n    S@n\n";
    for (const auto& a : r.at_n) {
        std::snprintf(buf, sizeof buf, "%3zu   %.4f  %.4f  %.4f  %.4f\n", a.n,
                      a.precision, a.recall, a.f1, a.success);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "LRAP  %.4f   (rows %zu, skipped %zu)\n", r.lrap,
                  r.rows_evaluated, r.rows_skipped_empty_truth);
    out += buf;
    return out;
}

}  // namespace toprec
