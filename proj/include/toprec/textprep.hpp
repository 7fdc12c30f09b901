#pragma once

// Cleaning, tokenization and truncation of repository text sources.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toprec/common.hpp"

namespace toprec {

// Per-source token caps. Sum = 660.
inline constexpr std::size_t kNameCap = 10;
inline constexpr std::size_t kDescriptionCap = 50;
inline constexpr std::size_t kReadmeCap = 400;
inline constexpr std::size_t kWikiCap = 100;
inline constexpr std::size_t kFilenameCap = 100;

struct ProcessedDoc {
    std::vector<std::string> name_tokens;
    std::vector<std::string> description_tokens;
    std::vector<std::string> readme_tokens;
    std::vector<std::string> wiki_tokens;
    std::vector<std::string> filename_tokens;
    std::vector<std::string> all_tokens;

    void rebuild_all() {
        all_tokens.clear();
        for (const auto* src : {&name_tokens, &description_tokens, &readme_tokens,
                                &wiki_tokens, &filename_tokens})
            all_tokens.insert(all_tokens.end(), src->begin(), src->end());
    }
};

// abbreviation -> expansion tokens
using AbbreviationTable = std::map<std::string, std::vector<std::string>>;

struct TokenFilterConfig {
    std::size_t min_text_freq = 50;
    std::size_t min_name_freq = 20;
    std::set<std::string> stopwords;
    std::set<std::string> generic_name_blocklist;
};

// The editable data tables the pipeline depends on. Shipped under data/,
// snapshotted into model bundles.
struct TextTables {
    std::set<std::string> stopwords;
    AbbreviationTable abbreviations;
    std::set<std::string> filename_blocklist;
    std::map<std::string, std::string> lemma_exceptions;
};

// Splits an identifier on '_', '-', '.' and lower->upper case boundaries;
// lowercases fragments, drops empties.
inline std::vector<std::string> split_identifier(const std::string& token) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    char prev = '\0';
    for (char c : token) {
        if (c == '_' || c == '-' || c == '.') {
            flush();
        } else {
            if (std::isupper(static_cast<unsigned char>(c)) &&
                std::islower(static_cast<unsigned char>(prev)))
                flush();
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        prev = c;
    }
    flush();
    return out;
}

// Rule-plus-exception lemmatizer for lowercase alphabetic tokens. Suffix
// rules only fire when the remaining stem keeps at least 3 characters; no
// stemming beyond plural/verbal endings.
inline std::string lemmatize(const std::string& token,
                             const std::map<std::string, std::string>& exceptions = {}) {
    auto it = exceptions.find(token);
    if (it != exceptions.end()) return it->second;
    auto ends_with = [&](const char* suf) {
        std::size_t n = std::char_traits<char>::length(suf);
        return token.size() >= n && token.compare(token.size() - n, n, suf) == 0;
    };
    if (ends_with("ies") && token.size() - 3 >= 2)
        return token.substr(0, token.size() - 3) + "y";
    if (ends_with("sses") || ends_with("xes") || ends_with("ches") || ends_with("shes"))
        if (token.size() - 2 >= 3) return token.substr(0, token.size() - 2);
    if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is") &&
        token.size() - 1 >= 3)
        return token.substr(0, token.size() - 1);
    if (ends_with("ing") && token.size() - 3 >= 3)
        return token.substr(0, token.size() - 3);
    if (ends_with("ed") && token.size() - 2 >= 3)
        return token.substr(0, token.size() - 2);
    return token;
}

namespace detail {

inline const std::regex& noise_regexes(std::size_t i) {
    // Order matters: fenced code and URLs first, then smaller patterns.
    static const std::regex patterns[] = {
        std::regex("```[\\s\\S]*?```"),                          // fenced code
        std::regex("`[^`\\n]*`"),                                // inline code
        std::regex("<[^>\\n]*>"),                                // html tags
        std::regex("https?://[^\\s)\"]+|www\\.[^\\s)\"]+"),      // urls
        std::regex("[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+"),          // emails
        std::regex("(^|\\s)@[A-Za-z0-9_-]+"),                    // usernames
        std::regex("\\b\\d{4}-\\d{2}-\\d{2}\\b"),                // ISO dates
        std::regex("\\b\\d{1,2}/\\d{1,2}/\\d{2,4}\\b"),          // slash dates
        std::regex("\\b\\d{1,2}:\\d{2}(:\\d{2})?\\b"),           // times
        std::regex("\\bv\\d+(\\.\\d+)*\\b",
                   std::regex_constants::icase),                 // version tags
    };
    return patterns[i];
}
inline constexpr std::size_t kNumNoiseRegexes = 10;

}  // namespace detail

// Full cleaning pipeline for prose sources: regex noise removal, then
// punctuation/digit/non-ASCII stripping, identifier splitting, lowercasing,
// abbreviation expansion, stopword removal, lemmatization.
inline std::vector<std::string> clean_text(const std::string& raw,
                                           const AbbreviationTable& table,
                                           const TokenFilterConfig& cfg,
                                           const std::map<std::string, std::string>& lemma_exceptions = {}) {
    std::string text = raw;
    for (std::size_t i = 0; i < detail::kNumNoiseRegexes; ++i)
        text = std::regex_replace(text, detail::noise_regexes(i), " ");
    // Keep only ASCII letters and the separators split_identifier understands.
    for (char& c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        bool keep = (u < 0x80) && (std::isalpha(u) || c == '_' || c == '-' || c == '.');
        if (!keep) c = ' ';
    }
    std::vector<std::string> tokens;
    std::istringstream iss(text);
    std::string word;
    while (iss >> word) {
        for (const auto& frag : split_identifier(word)) {
            std::vector<std::string> expanded;
            auto it = table.find(frag);
            if (it != table.end())
                expanded = it->second;
            else
                expanded = {frag};
            for (const auto& t : expanded) {
                if (cfg.stopwords.count(t)) continue;
                std::string lemma = lemmatize(t, lemma_exceptions);
                if (cfg.stopwords.count(lemma)) continue;
                if (!lemma.empty()) tokens.push_back(lemma);
            }
        }
    }
    return tokens;
}

// Project-name and file-name cleaning. The owner half of "owner/name" is
// dropped; path separators and extensions are split points; blocklisted
// tokens are removed from filename tokens only.
inline std::pair<std::vector<std::string>, std::vector<std::string>>
clean_names(const std::string& project_full_name,
            const std::vector<std::string>& file_paths,
            const TokenFilterConfig& cfg,
            const AbbreviationTable& table = {},
            const std::map<std::string, std::string>& lemma_exceptions = {}) {
    auto clean_fragment = [&](const std::string& s, bool blocklisted,
                              std::vector<std::string>& out) {
        std::string kept;
        for (char c : s) {
            unsigned char u = static_cast<unsigned char>(c);
            bool keep = (u < 0x80) &&
                        (std::isalpha(u) || c == '_' || c == '-' || c == '.' ||
                         std::isupper(u) || std::islower(u));
            kept.push_back(keep ? c : ' ');
        }
        std::istringstream iss(kept);
        std::string word;
        while (iss >> word) {
            for (const auto& frag : split_identifier(word)) {
                std::vector<std::string> expanded;
                auto it = table.find(frag);
                if (it != table.end())
                    expanded = it->second;
                else
                    expanded = {frag};
                for (const auto& t : expanded) {
                    if (cfg.stopwords.count(t)) continue;
                    if (blocklisted && cfg.generic_name_blocklist.count(t)) continue;
                    std::string lemma = lemmatize(t, lemma_exceptions);
                    if (cfg.stopwords.count(lemma)) continue;
                    if (blocklisted && cfg.generic_name_blocklist.count(lemma)) continue;
                    if (!lemma.empty()) out.push_back(lemma);
                }
            }
        }
    };

    std::vector<std::string> name_tokens;
    auto slash = project_full_name.find('/');
    std::string repo_name = slash == std::string::npos
                                ? project_full_name
                                : project_full_name.substr(slash + 1);
    clean_fragment(repo_name, /*blocklisted=*/false, name_tokens);

    std::vector<std::string> filename_tokens;
    for (const auto& path : file_paths) {
        std::string flat = path;
        std::replace(flat.begin(), flat.end(), '/', ' ');
        std::replace(flat.begin(), flat.end(), '\\', ' ');
        clean_fragment(flat, /*blocklisted=*/true, filename_tokens);
    }
    return {std::move(name_tokens), std::move(filename_tokens)};
}

// Truncates each source list to its cap (keeping the earliest tokens) and
// concatenates into all_tokens.
inline ProcessedDoc assemble_document(std::vector<std::string> name_tokens,
                                      std::vector<std::string> description_tokens,
                                      std::vector<std::string> readme_tokens,
                                      std::vector<std::string> wiki_tokens,
                                      std::vector<std::string> filename_tokens) {
    auto truncate = [](std::vector<std::string>& v, std::size_t cap) {
        if (v.size() > cap) v.resize(cap);
    };
    ProcessedDoc d;
    d.name_tokens = std::move(name_tokens);
    d.description_tokens = std::move(description_tokens);
    d.readme_tokens = std::move(readme_tokens);
    d.wiki_tokens = std::move(wiki_tokens);
    d.filename_tokens = std::move(filename_tokens);
    truncate(d.name_tokens, kNameCap);
    truncate(d.description_tokens, kDescriptionCap);
    truncate(d.readme_tokens, kReadmeCap);
    truncate(d.wiki_tokens, kWikiCap);
    truncate(d.filename_tokens, kFilenameCap);
    d.rebuild_all();
    return d;
}

// Removes tokens below the corpus-wide frequency thresholds. Text sources
// (name, description, readme, wiki) and filename tokens are counted
// separately. `count_docs` normally covers the training split only.
inline std::vector<ProcessedDoc> prune_rare(const std::vector<ProcessedDoc>& docs,
                                            const TokenFilterConfig& cfg,
                                            const std::vector<ProcessedDoc>* count_docs = nullptr) {
    const std::vector<ProcessedDoc>& basis = count_docs ? *count_docs : docs;
    std::map<std::string, std::size_t> text_counts, name_counts;
    for (const auto& d : basis) {
        for (const auto* src : {&d.name_tokens, &d.description_tokens,
                                &d.readme_tokens, &d.wiki_tokens})
            for (const auto& t : *src) ++text_counts[t];
        for (const auto& t : d.filename_tokens) ++name_counts[t];
    }
    auto keep = [](const std::map<std::string, std::size_t>& counts,
                   const std::string& t, std::size_t min_freq) {
        auto it = counts.find(t);
        return it != counts.end() && it->second >= min_freq;
    };
    std::vector<ProcessedDoc> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        ProcessedDoc p;
        auto filter_text = [&](const std::vector<std::string>& in,
                               std::vector<std::string>& dst) {
            for (const auto& t : in)
                if (keep(text_counts, t, cfg.min_text_freq)) dst.push_back(t);
        };
        filter_text(d.name_tokens, p.name_tokens);
        filter_text(d.description_tokens, p.description_tokens);
        filter_text(d.readme_tokens, p.readme_tokens);
        filter_text(d.wiki_tokens, p.wiki_tokens);
        for (const auto& t : d.filename_tokens)
            if (keep(name_counts, t, cfg.min_name_freq)) p.filename_tokens.push_back(t);
        p.rebuild_all();
        out.push_back(std::move(p));
    }
    return out;
}

// --- data file loaders -----------------------------------------------------

inline std::set<std::string> load_word_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(line);
    }
    return out;
}

inline AbbreviationTable load_abbreviations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    AbbreviationTable out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": expected key<TAB>expansion: " + line);
        std::string key = line.substr(0, tab);
        std::vector<std::string> expansion;
        std::istringstream iss(line.substr(tab + 1));
        std::string w;
        while (iss >> w) expansion.push_back(w);
        if (expansion.size() == 1 && expansion[0] == key)
            throw DataError(path + ": key maps to itself: " + key);
        out[key] = expansion;
    }
    return out;
}

inline std::map<std::string, std::string> load_lemma_exceptions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": expected word<TAB>lemma: " + line);
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

inline TextTables load_tables(const std::string& dir) {
    TextTables t;
    t.stopwords = load_word_set(dir + "/stopwords.txt");
    t.abbreviations = load_abbreviations(dir + "/abbreviations.tsv");
    t.filename_blocklist = load_word_set(dir + "/filename_blocklist.txt");
    t.lemma_exceptions = load_lemma_exceptions(dir + "/lemma_exceptions.tsv");
    return t;
}

inline TokenFilterConfig filter_config_from_tables(const TextTables& t) {
    TokenFilterConfig cfg;
    cfg.stopwords = t.stopwords;
    cfg.generic_name_blocklist = t.filename_blocklist;
    return cfg;
}

}  // namespace toprec
