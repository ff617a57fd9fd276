#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

/**
 * One indexed dialogue utterance. token_count is cached at construction and
 * always equals the tokenizer's count of text; a Turn created with an
 * explicit count that disagrees with the recount is rejected.
 */
struct Turn {
    std::string turn_id;
    int index = 0;
    std::string speaker;
    std::string text;
    int token_count = -1;  // -1: compute on validation
};

struct QaPair {
    std::string question;
    std::string answer;
    std::vector<std::string> evidence_turn_ids;
};

/**
 * An ordered dialogue session. Construction validates the core invariants:
 * turn indices unique and contiguous from 0, turn ids unique, cached token
 * counts consistent, and every QA evidence id resolving to a real turn.
 */
class Conversation {
public:
    Conversation(std::string conversation_id, std::vector<Turn> turns,
                 std::vector<QaPair> qa_pairs = {}, const TokenizerSpec& spec = {});

    const std::string& id() const { return id_; }
    const std::vector<Turn>& turns() const { return turns_; }
    const std::vector<QaPair>& qa_pairs() const { return qa_pairs_; }

    const Turn* find_turn(const std::string& turn_id) const;
    long long total_tokens() const { return total_tokens_; }

    /// The first `count` turns as a new validated Conversation (replay prefix).
    Conversation prefix(int count) const;

private:
    std::string id_;
    std::vector<Turn> turns_;
    std::vector<QaPair> qa_pairs_;
    long long total_tokens_ = 0;
};

/// Current request against the history: free text plus the step index t.
struct Query {
    std::string text;
    int step = 0;
};

}  // namespace ctxcomp
