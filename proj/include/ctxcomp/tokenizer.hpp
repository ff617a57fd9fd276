#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ctxcomp {

enum class TokenizerKind { DefaultLexical, External };

/**
 * Tokenizer configuration. The default lexical tokenizer is deterministic:
 * a token is a maximal run of ASCII alphanumerics (lowercased) or non-ASCII
 * UTF-8 bytes; every other character is a boundary and is discarded.
 *
 * All token budget math in the engine uses one TokenizerSpec end to end;
 * mixing tokenizers within a run is not supported.
 */
struct TokenizerSpec {
    TokenizerKind kind = TokenizerKind::DefaultLexical;
    /// Lowercase stopword set used by content_tokens(). Defaults to the
    /// built-in English list (see default_stopwords()).
    std::set<std::string> stopwords;
    /// Required when kind == External: full replacement for the lexical split.
    std::function<std::vector<std::string>(const std::string&)> external_fn;

    TokenizerSpec();
};

/// The built-in English stopword list (129 words, versioned with the tool).
const std::set<std::string>& default_stopwords();

/// Split text into lowercased tokens. Punctuation acts as a boundary and is
/// dropped; empty input yields an empty list. Throws InputError on invalid
/// UTF-8 or on an External spec without a registered function.
std::vector<std::string> tokenize(const std::string& text, const TokenizerSpec& spec = {});

/// Distinct non-stopword tokens of text.
std::set<std::string> content_tokens(const std::string& text, const TokenizerSpec& spec = {});

/// Non-stopword token counts (term-frequency vector), keyed in sorted order.
std::map<std::string, int> content_token_counts(const std::string& text,
                                                const TokenizerSpec& spec = {});

/// Number of tokens in text. Additive over whitespace-joined concatenation.
int count_tokens(const std::string& text, const TokenizerSpec& spec = {});

/// Prefix of the original text ending at the cap-th token (the whole text
/// when it has at most cap tokens). Enforces local caps on remote summaries.
std::string truncate_to_tokens(const std::string& text, int cap, const TokenizerSpec& spec = {});

/// Structural UTF-8 validity check (lead/continuation byte forms and ranges).
bool is_valid_utf8(const std::string& text);

}  // namespace ctxcomp
