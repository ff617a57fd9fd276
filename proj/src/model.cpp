#include "ctxcomp/model.hpp"

#include <set>

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

Conversation::Conversation(std::string conversation_id, std::vector<Turn> turns,
                           std::vector<QaPair> qa_pairs, const TokenizerSpec& spec)
    : id_(std::move(conversation_id)), turns_(std::move(turns)), qa_pairs_(std::move(qa_pairs)) {
    std::set<std::string> ids;
    for (size_t i = 0; i < turns_.size(); ++i) {
        Turn& t = turns_[i];
        if (t.index != static_cast<int>(i)) {
            throw InputError("conversation '" + id_ + "': turn indices must be contiguous from 0, got " +
                             std::to_string(t.index) + " at position " + std::to_string(i));
        }
        if (!ids.insert(t.turn_id).second) {
            throw InputError("conversation '" + id_ + "': duplicate turn_id '" + t.turn_id + "'");
        }
        int counted = count_tokens(t.text, spec);
        if (t.token_count < 0) {
            t.token_count = counted;
        } else if (t.token_count != counted) {
            throw InputError("conversation '" + id_ + "': turn '" + t.turn_id +
                             "' cached token_count " + std::to_string(t.token_count) +
                             " != recount " + std::to_string(counted));
        }
        total_tokens_ += t.token_count;
    }
    for (size_t q = 0; q < qa_pairs_.size(); ++q) {
        for (const auto& ev : qa_pairs_[q].evidence_turn_ids) {
            if (!ids.count(ev)) {
                throw InputError("conversation '" + id_ + "': qa_pairs[" + std::to_string(q) +
                                 "] references unknown turn_id '" + ev + "'");
            }
        }
    }
}

const Turn* Conversation::find_turn(const std::string& turn_id) const {
    for (const auto& t : turns_) {
        if (t.turn_id == turn_id) return &t;
    }
    return nullptr;
}

Conversation Conversation::prefix(int count) const {
    if (count < 0 || count > static_cast<int>(turns_.size())) {
        throw InputError("prefix: count " + std::to_string(count) + " out of range");
    }
    std::vector<Turn> head(turns_.begin(), turns_.begin() + count);
    // QA pairs are attached at replay level, not to prefixes.
    return Conversation(id_, std::move(head));
}

}  // namespace ctxcomp
