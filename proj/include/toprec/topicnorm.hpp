#pragma once

// Featured-topic vocabulary and the heuristic mapping of free-form
// user-specified topics onto it.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toprec/common.hpp"
#include "toprec/textprep.hpp"

namespace toprec {

enum class MappingMode { exact_only, with_heuristics };

struct TopicVocabulary {
    std::vector<std::string> topics;           // index order defines labels
    std::map<std::string, std::string> aliases;
    std::set<std::string> frequent_embedded;   // extractable segments (api, tool, ...)
    std::set<std::string> protected_tokens;    // exempt from digit strip / singularize
    std::size_t min_support = 100;

    std::map<std::string, std::size_t> index;  // topic -> label column

    void rebuild_index() {
        index.clear();
        for (std::size_t i = 0; i < topics.size(); ++i) index[topics[i]] = i;
    }

    std::size_t size() const { return topics.size(); }

    // Resolves a string through topics and aliases; empty optional if unknown.
    std::optional<std::string> resolve(const std::string& s) const {
        if (index.count(s)) return s;
        auto it = aliases.find(s);
        if (it != aliases.end()) return it->second;
        return std::nullopt;
    }
};

struct LabelVector {
    std::vector<std::uint8_t> bits;

    explicit LabelVector(std::size_t m = 0) : bits(m, 0) {}
    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
    }
    bool operator==(const LabelVector&) const = default;
};

inline TopicVocabulary vocabulary_from_json(const nlohmann::json& j) {
    TopicVocabulary v;
    const nlohmann::json* entries = nullptr;
    if (j.is_array()) {
        entries = &j;
    } else if (j.is_object() && j.contains("topics")) {
        entries = &j["topics"];
        if (j.contains("frequent_embedded"))
            for (const auto& t : j["frequent_embedded"])
                v.frequent_embedded.insert(t.get<std::string>());
        if (j.contains("protected"))
            for (const auto& t : j["protected"])
                v.protected_tokens.insert(t.get<std::string>());
        if (j.contains("min_support"))
            v.min_support = j["min_support"].get<std::size_t>();
    } else {
        throw DataError("vocabulary: expected array or object with \"topics\"");
    }
    for (const auto& e : *entries) {
        if (!e.is_object() || !e.contains("topic"))
            throw DataError("vocabulary: entry missing \"topic\"");
        std::string t = e["topic"].get<std::string>();
        if (std::find(v.topics.begin(), v.topics.end(), t) != v.topics.end())
            throw DataError("vocabulary: duplicate topic " + t);
        v.topics.push_back(t);
    }
    v.rebuild_index();
    for (const auto& e : *entries) {
        std::string t = e["topic"].get<std::string>();
        if (e.contains("aliases"))
            for (const auto& a : e["aliases"]) {
                std::string al = a.get<std::string>();
                if (!v.index.count(t))
                    throw DataError("vocabulary: alias " + al + " -> unknown topic " + t);
                v.aliases[al] = t;
            }
    }
    for (const auto& [al, t] : v.aliases)
        if (!v.index.count(t))
            throw DataError("vocabulary: alias " + al + " points to unknown topic " + t);
    return v;
}

inline TopicVocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("vocabulary " + path + ": malformed JSON");
    return vocabulary_from_json(j);
}

namespace detail {

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<std::string> hyphen_segments(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '-') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

inline std::string join_hyphen(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '-';
        out += p;
    }
    return out;
}

// Plural -> singular, conservative: only applied when the caller verifies
// the result against the vocabulary.
inline std::optional<std::string> singularize(const std::string& s) {
    auto ends = [&](const char* suf) {
        std::size_t n = std::char_traits<char>::length(suf);
        return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
    };
    if (ends("ies") && s.size() > 3) return s.substr(0, s.size() - 3) + "y";
    if (ends("es") && s.size() > 3) return s.substr(0, s.size() - 2);
    if (ends("s") && s.size() > 2) return s.substr(0, s.size() - 1);
    return std::nullopt;
}

}  // namespace detail

// Maps one user-specified topic to featured topics via the ordered
// generate-and-test pipeline. Destructive transforms only stick when the
// result is actually in the vocabulary.
inline std::set<std::string> normalize_topic(const std::string& user_topic,
                                             const TopicVocabulary& vocab,
                                             const TextTables& tables = {}) {
    std::string t = detail::lowercase(user_topic);
    if (t.empty()) return {};

    // (1) exact topic or alias
    if (auto r = vocab.resolve(t)) return {*r};

    // (2) strip version suffix "-v<digits>"
    {
        std::size_t i = t.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(t[i - 1]))) --i;
        if (i < t.size() && i >= 2 && t[i - 1] == 'v' && t[i - 2] == '-') {
            if (auto r = vocab.resolve(t.substr(0, i - 2))) return {*r};
        }
    }

    // (3) strip trailing digit run
    if (!vocab.protected_tokens.count(t)) {
        std::size_t i = t.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(t[i - 1]))) --i;
        if (i < t.size() && i > 0) {
            std::string stripped = t.substr(0, i);
            if (!stripped.empty() && stripped.back() == '-') stripped.pop_back();
            if (auto r = vocab.resolve(stripped)) return {*r};
        }
    }

    // (4) singularize
    if (!vocab.protected_tokens.count(t)) {
        if (auto s = detail::singularize(t))
            if (auto r = vocab.resolve(*s)) return {*r};
    }

    // (5) abbreviation replacement, stopword removal, lemmatization of
    // hyphen segments, then retest the rebuilt topic
    {
        std::vector<std::string> parts;
        for (const auto& seg : detail::hyphen_segments(t)) {
            std::vector<std::string> expanded;
            auto it = tables.abbreviations.find(seg);
            if (it != tables.abbreviations.end())
                expanded = it->second;
            else
                expanded = {seg};
            for (const auto& e : expanded) {
                if (tables.stopwords.count(e)) continue;
                parts.push_back(lemmatize(e, tables.lemma_exceptions));
            }
        }
        if (!parts.empty()) {
            if (auto r = vocab.resolve(detail::join_hyphen(parts))) return {*r};
        }
    }

    // (6) extract featured topics and frequent embedded tokens appearing as
    // hyphen-delimited segments
    {
        std::set<std::string> found;
        auto segs = detail::hyphen_segments(t);
        if (segs.size() > 1) {
            for (const auto& seg : segs)
                if (auto r = vocab.resolve(seg)) found.insert(*r);
        }
        return found;
    }
}

// Tests hyphen-joins of adjacent individually-unmatched topics, consuming
// matched pairs left-to-right without overlap.
inline std::set<std::string> aggregate_adjacent(const std::vector<std::string>& user_topics,
                                                const TopicVocabulary& vocab,
                                                const TextTables& tables = {}) {
    std::set<std::string> out;
    std::size_t i = 0;
    while (i + 1 < user_topics.size()) {
        std::string a = detail::lowercase(user_topics[i]);
        std::string b = detail::lowercase(user_topics[i + 1]);
        bool a_matched = !normalize_topic(a, vocab, tables).empty();
        bool b_matched = !normalize_topic(b, vocab, tables).empty();
        if (!a_matched && !b_matched) {
            if (auto r = vocab.resolve(a + "-" + b)) {
                out.insert(*r);
                i += 2;  // pair consumed
                continue;
            }
        }
        ++i;
    }
    return out;
}

inline LabelVector encode_topics(const std::set<std::string>& featured,
                                 const TopicVocabulary& vocab) {
    LabelVector v(vocab.size());
    for (const auto& t : featured) {
        auto it = vocab.index.find(t);
        if (it != vocab.index.end()) v.bits[it->second] = 1;
    }
    return v;
}

inline std::vector<std::string> decode_labels(const LabelVector& v,
                                              const TopicVocabulary& vocab) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.bits.size(); ++i)
        if (v.bits[i]) out.push_back(vocab.topics[i]);
    return out;
}

// Full per-repository mapping: union of per-topic normalization plus
// adjacent aggregation (heuristics mode), or exact matches only.
inline LabelVector map_repo_topics(const std::vector<std::string>& user_topics,
                                   const TopicVocabulary& vocab, MappingMode mode,
                                   const TextTables& tables = {},
                                   std::map<std::string, std::set<std::string>>* discovered_subtopics = nullptr) {
    std::set<std::string> featured;
    for (const auto& ut : user_topics) {
        std::string t = detail::lowercase(ut);
        if (mode == MappingMode::exact_only) {
            if (auto r = vocab.resolve(t)) featured.insert(*r);
        } else {
            auto mapped = normalize_topic(t, vocab, tables);
            featured.insert(mapped.begin(), mapped.end());
            if (discovered_subtopics && !mapped.empty() && !vocab.resolve(t))
                (*discovered_subtopics)[t].insert(mapped.begin(), mapped.end());
        }
    }
    if (mode == MappingMode::with_heuristics) {
        auto agg = aggregate_adjacent(user_topics, vocab, tables);
        featured.insert(agg.begin(), agg.end());
    }
    return encode_topics(featured, vocab);
}

// Reduces the vocabulary to topics with corpus frequency >= min_support, or
// to the top_k most frequent. New index order: descending frequency, ties
// lexicographic.
inline TopicVocabulary filter_by_support(const std::vector<LabelVector>& labels,
                                         const TopicVocabulary& vocab,
                                         std::size_t min_support,
                                         std::size_t top_k = 0) {
    std::vector<std::size_t> freq(vocab.size(), 0);
    for (const auto& row : labels) {
        if (row.bits.size() != vocab.size())
            throw DataError("filter_by_support: label width mismatch");
        for (std::size_t i = 0; i < row.bits.size(); ++i)
            if (row.bits[i]) ++freq[i];
    }
    std::vector<std::size_t> order(vocab.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return vocab.topics[a] < vocab.topics[b];
    });
    TopicVocabulary out;
    out.frequent_embedded = vocab.frequent_embedded;
    out.protected_tokens = vocab.protected_tokens;
    out.min_support = min_support;
    for (std::size_t i : order) {
        if (top_k > 0) {
            if (out.topics.size() >= top_k) break;
            if (freq[i] == 0) break;
        } else if (freq[i] < min_support) {
            break;  // order is descending by frequency
        }
        out.topics.push_back(vocab.topics[i]);
    }
    if (out.topics.empty())
        throw DataError("filter_by_support: no topic meets the support threshold");
    out.rebuild_index();
    for (const auto& [al, t] : vocab.aliases)
        if (out.index.count(t)) out.aliases[al] = t;
    return out;
}

// Re-encodes labels from one vocabulary into another (topics absent from
// the target are dropped).
inline LabelVector reencode(const LabelVector& v, const TopicVocabulary& from,
                            const TopicVocabulary& to) {
    LabelVector out(to.size());
    for (std::size_t i = 0; i < v.bits.size(); ++i)
        if (v.bits[i]) {
            auto it = to.index.find(from.topics[i]);
            if (it != to.index.end()) out.bits[it->second] = 1;
        }
    return out;
}

// Cumulative frequency share of the k most frequent topics.
inline double coverage(const std::vector<std::size_t>& frequencies_desc, std::size_t k) {
    if (k > frequencies_desc.size())
        throw DataError("coverage: k exceeds number of topics");
    double total = 0, top = 0;
    for (std::size_t i = 0; i < frequencies_desc.size(); ++i) {
        total += static_cast<double>(frequencies_desc[i]);
        if (i < k) top += static_cast<double>(frequencies_desc[i]);
    }
    if (total == 0) throw DataError("coverage: all frequencies are zero");
    return top / total;
}

}  // namespace toprec
