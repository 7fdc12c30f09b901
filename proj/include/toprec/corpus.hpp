#pragma once

// Repository records: JSONL ingestion, quality filtering, train/val/test
// splitting.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toprec/common.hpp"

namespace toprec {

struct RepoRecord {
    std::string full_name;  // "owner/name"
    std::optional<std::string> description;
    std::optional<std::string> readme;
    std::optional<std::string> wiki;
    std::vector<std::string> file_paths;
    std::vector<std::string> user_topics;
    std::int64_t stars = 0;
};

struct FilterConfig {
    std::int64_t min_stars = 10;
    bool require_text = true;
    double max_non_english_ratio = 0.5;
};

struct CorpusSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

namespace detail {

// Decodes one UTF-8 codepoint starting at s[i]; advances i past it.
// Malformed bytes are consumed one at a time and reported as U+FFFD.
inline char32_t next_codepoint(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) { ++i; return c; }
    int extra = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) { extra = 1; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { extra = 2; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { extra = 3; cp = c & 0x07; }
    else { ++i; return 0xFFFD; }
    if (i + extra >= s.size()) { ++i; return 0xFFFD; }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += extra + 1;
    return cp;
}

// Codepoint ranges that are clearly not letters (punctuation, symbols,
// emoji, spaces). Everything else above ASCII counts as a non-Latin letter.
inline bool is_non_letter_symbol(char32_t cp) {
    return (cp >= 0x2000 && cp <= 0x206F) ||   // general punctuation
           (cp >= 0x20A0 && cp <= 0x20CF) ||   // currency
           (cp >= 0x2100 && cp <= 0x2BFF) ||   // arrows, math, misc symbols
           (cp >= 0x3000 && cp <= 0x303F) ||   // CJK punctuation
           (cp >= 0xFE30 && cp <= 0xFE4F) ||
           (cp >= 0xFF00 && cp <= 0xFF0F) ||
           (cp >= 0x1F000 && cp <= 0x1FFFF) || // emoji and pictographs
           cp == 0xA0 || cp == 0xFFFD;
}

}  // namespace detail

// Fraction of alphabetic characters that are not A-Z/a-z. Digits,
// punctuation and symbols are excluded from both counts. 0 when the text
// has no alphabetic characters.
inline double non_english_ratio(const std::string& text) {
    std::size_t letters = 0, non_latin = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = detail::next_codepoint(text, i);
        if (cp < 0x80) {
            if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) ++letters;
        } else if (!detail::is_non_letter_symbol(cp)) {
            ++letters;
            ++non_latin;
        }
    }
    if (letters == 0) return 0.0;
    return static_cast<double>(non_latin) / static_cast<double>(letters);
}

inline RepoRecord record_from_json(const nlohmann::json& j) {
    RepoRecord r;
    if (!j.contains("full_name") || !j["full_name"].is_string())
        throw DataError("missing or non-string full_name");
    r.full_name = j["full_name"].get<std::string>();
    auto slash = r.full_name.find('/');
    if (slash == std::string::npos || slash == 0 ||
        slash + 1 == r.full_name.size() ||
        r.full_name.find('/', slash + 1) != std::string::npos)
        throw DataError("full_name must be owner/name: " + r.full_name);
    if (!j.contains("stars") || !j["stars"].is_number_integer())
        throw DataError("missing or non-integer stars");
    r.stars = j["stars"].get<std::int64_t>();
    if (r.stars < 0) throw DataError("stars must be non-negative");
    auto opt_str = [&](const char* key) -> std::optional<std::string> {
        if (j.contains(key) && j[key].is_string())
            return j[key].get<std::string>();
        return std::nullopt;
    };
    r.description = opt_str("description");
    r.readme = opt_str("readme");
    r.wiki = opt_str("wiki");
    if (j.contains("file_paths") && j["file_paths"].is_array())
        for (const auto& p : j["file_paths"])
            if (p.is_string()) r.file_paths.push_back(p.get<std::string>());
    if (j.contains("topics") && j["topics"].is_array())
        for (const auto& t : j["topics"])
            if (t.is_string() && !t.get<std::string>().empty())
                r.user_topics.push_back(t.get<std::string>());
    return r;
}

// Parses newline-delimited JSON, one record per non-empty line. Errors name
// the 1-based line number.
inline std::vector<RepoRecord> parse_corpus(std::istream& in) {
    std::vector<RepoRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError("line " + std::to_string(lineno) + ": malformed JSON");
        try {
            out.push_back(record_from_json(j));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline bool passes_filter(const RepoRecord& r, const FilterConfig& cfg) {
    if (r.stars < cfg.min_stars) return false;
    std::string text;
    if (r.readme) text += *r.readme;
    if (r.description) {
        if (!text.empty()) text += ' ';
        text += *r.description;
    }
    if (cfg.require_text && text.find_first_not_of(" \t\r\n") == std::string::npos)
        return false;
    if (non_english_ratio(text) > cfg.max_non_english_ratio) return false;
    return true;
}

inline std::vector<RepoRecord> filter_corpus(const std::vector<RepoRecord>& records,
                                             const FilterConfig& cfg) {
    std::vector<RepoRecord> out;
    for (const auto& r : records)
        if (passes_filter(r, cfg)) out.push_back(r);
    return out;
}

// Deterministic shuffle + 80/20 test split, then 90/10 train/validation on
// the remainder. Identical across platforms for a given seed (the engine is
// consumed directly, no distribution adapters).
inline CorpusSplit split_corpus(std::size_t n_records, std::uint64_t seed) {
    if (n_records == 0) throw DataError("split_corpus: empty corpus");
    std::vector<std::size_t> idx(n_records);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 eng(seed);
    for (std::size_t i = n_records - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(eng() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
    CorpusSplit s;
    s.seed = seed;
    std::size_t n_test = n_records / 5;                      // floor(0.20 N)
    std::size_t remainder = n_records - n_test;
    std::size_t n_val = remainder / 10;                      // floor(0.10 rem)
    s.test.assign(idx.begin(), idx.begin() + n_test);
    s.validation.assign(idx.begin() + n_test, idx.begin() + n_test + n_val);
    s.train.assign(idx.begin() + n_test + n_val, idx.end());
    return s;
}

}  // namespace toprec
