#include "ctxcomp/tokenizer.hpp"

#include <array>
#include <cctype>

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

namespace {

// Version 1 of the built-in list. Changing it changes content-token driven
// scores everywhere, so treat edits as a breaking change.
constexpr std::array<const char*, 129> kStopwords = {
    "a",         "about",    "above",   "after",   "again",      "against",  "all",
    "am",        "an",       "and",     "another", "any",        "are",      "as",
    "at",        "be",       "because", "been",    "before",     "being",    "below",
    "between",   "both",     "but",     "by",      "can",        "cannot",   "could",
    "did",       "do",       "does",    "doing",   "down",       "during",   "each",
    "few",       "for",      "from",    "further", "had",        "has",      "have",
    "having",    "he",       "her",     "here",    "hers",       "herself",  "him",
    "himself",   "his",      "how",     "i",       "if",         "in",       "into",
    "is",        "it",       "its",     "itself",  "just",       "me",       "more",
    "most",      "my",       "myself",  "no",      "nor",        "not",      "now",
    "of",        "off",      "on",      "once",    "only",       "or",       "other",
    "our",       "ours",     "ourselves", "out",   "over",       "own",      "s",
    "same",      "she",      "should",  "so",      "some",       "such",     "t",
    "than",      "that",     "the",     "their",   "theirs",     "them",     "themselves",
    "then",      "there",    "these",   "they",    "this",       "those",    "through",
    "to",        "too",      "under",   "until",   "up",         "very",     "was",
    "we",        "were",     "what",    "when",    "where",      "which",    "while",
    "who",       "whom",     "why",     "will",    "with",       "you",      "your",
    "yours",     "yourself", "yourselves",
};

bool is_token_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

}  // namespace

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words(kStopwords.begin(), kStopwords.end());
    return words;
}

TokenizerSpec::TokenizerSpec() : stopwords(default_stopwords()) {}

bool is_valid_utf8(const std::string& text) {
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    size_t n = text.size();
    size_t i = 0;
    while (i < n) {
        unsigned char c = p[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        int len;
        unsigned cp_min;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp_min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp_min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp_min = 0x10000;
        } else {
            return false;
        }
        if (i + len > n) return false;
        unsigned cp = c & (0xFF >> (len + 1));
        for (int k = 1; k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (p[i + k] & 0x3F);
        }
        if (cp < cp_min) return false;                  // overlong
        if (cp > 0x10FFFF) return false;                // out of range
        if (cp >= 0xD800 && cp <= 0xDFFF) return false; // surrogate
        i += len;
    }
    return true;
}

std::vector<std::string> tokenize(const std::string& text, const TokenizerSpec& spec) {
    if (spec.kind == TokenizerKind::External) {
        if (!spec.external_fn) throw InputError("external tokenizer not registered");
        return spec.external_fn(text);
    }
    if (!is_valid_utf8(text)) throw InputError("tokenize: input is not valid UTF-8");

    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_token_byte(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::set<std::string> content_tokens(const std::string& text, const TokenizerSpec& spec) {
    std::set<std::string> out;
    for (auto& tok : tokenize(text, spec)) {
        if (!spec.stopwords.count(tok)) out.insert(std::move(tok));
    }
    return out;
}

std::map<std::string, int> content_token_counts(const std::string& text,
                                                const TokenizerSpec& spec) {
    std::map<std::string, int> counts;
    for (const auto& tok : tokenize(text, spec)) {
        if (!spec.stopwords.count(tok)) ++counts[tok];
    }
    return counts;
}

int count_tokens(const std::string& text, const TokenizerSpec& spec) {
    return static_cast<int>(tokenize(text, spec).size());
}

std::string truncate_to_tokens(const std::string& text, int cap, const TokenizerSpec& spec) {
    if (cap <= 0) return "";
    if (spec.kind == TokenizerKind::External) {
        // External tokenizers carry no byte offsets; rebuild from tokens.
        auto tokens = tokenize(text, spec);
        if (static_cast<int>(tokens.size()) <= cap) return text;
        std::string out;
        for (int i = 0; i < cap; ++i) {
            if (i) out.push_back(' ');
            out += tokens[i];
        }
        return out;
    }
    if (!is_valid_utf8(text)) throw InputError("truncate_to_tokens: input is not valid UTF-8");

    // Cut at the end of the cap-th token.
    int seen = 0;
    bool in_token = false;
    for (size_t i = 0; i < text.size(); ++i) {
        bool tok = is_token_byte(static_cast<unsigned char>(text[i]));
        if (tok && !in_token) {
            in_token = true;
        } else if (!tok && in_token) {
            ++seen;
            in_token = false;
            if (seen == cap) return text.substr(0, i);
        }
    }
    return text;
}

}  // namespace ctxcomp
