#include "ctxcomp/memory.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctxcomp/errors.hpp"
#include "ctxcomp/tokenizer.hpp"

namespace ctxcomp {

void Thresholds::validate() const {
    if (!(q_l > 0.0) || !(q_s < 1.0) || !(q_l < q_s)) {
        throw InputError("thresholds: require 0 < q_l < q_s < 1, got q_l=" + std::to_string(q_l) +
                         " q_s=" + std::to_string(q_s));
    }
    if (tau_l > tau_s) {
        throw InputError("thresholds: tau_l must not exceed tau_s");
    }
}

namespace {

/// Nearest-rank quantile of an ascending-sorted sample: index ceil(q*n)-1.
double nearest_rank(const std::vector<double>& sorted_asc, double q) {
    const auto n = static_cast<long long>(sorted_asc.size());
    long long idx = static_cast<long long>(std::ceil(q * static_cast<double>(n))) - 1;
    idx = std::max(0LL, std::min(idx, n - 1));
    return sorted_asc[static_cast<size_t>(idx)];
}

}  // namespace

Thresholds compute_thresholds(const std::vector<double>& z_scores, double q_s, double q_l) {
    if (z_scores.empty()) {
        throw InputError("compute_thresholds: empty score list");
    }
    if (!(q_l > 0.0) || !(q_s < 1.0) || !(q_l < q_s)) {
        throw InputError("compute_thresholds: require 0 < q_l < q_s < 1");
    }
    std::vector<double> sorted = z_scores;
    std::sort(sorted.begin(), sorted.end());
    Thresholds th;
    th.q_s = q_s;
    th.q_l = q_l;
    th.tau_s = nearest_rank(sorted, q_s);
    th.tau_l = nearest_rank(sorted, q_l);
    return th;
}

MemoryState partition(const std::vector<ScoredTurn>& scored, const Thresholds& th) {
    th.validate();
    MemoryState state;
    for (const auto& st : scored) {
        if (st.z > th.tau_s) {
            state.retained.push_back(st.turn_id);
        } else if (st.z > th.tau_l) {
            state.band.push_back(st.turn_id);
        } else {
            state.dropped.push_back(st.turn_id);
        }
    }
    return state;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    const auto flush = [&]() {
        size_t a = current.find_first_not_of(" \t\r\n");
        if (a != std::string::npos) {
            size_t b = current.find_last_not_of(" \t\r\n");
            sentences.push_back(current.substr(a, b - a + 1));
        }
        current.clear();
    };
    for (size_t i = 0; i < text.size(); ++i) {
        current.push_back(text[i]);
        const char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            const bool at_end = i + 1 >= text.size();
            const char next = at_end ? ' ' : text[i + 1];
            if (at_end || next == ' ' || next == '\t' || next == '\r' || next == '\n') {
                flush();
            }
        }
    }
    flush();
    return sentences;
}

namespace {

struct RankedSentence {
    std::string text;
    int position = 0;
    double score = 0.0;
    long long tokens = 0;
};

/// Extractive body for one block: sentences ranked by mean TF-IDF of their
/// distinct content tokens, admitted greedily under cap, emitted in original
/// order and joined by single spaces. df spans the whole history and is
/// computed once per call site, not per block.
std::string extract_block(const std::vector<const Turn*>& members, double n_turns,
                          const std::map<std::string, long long>& df, long long cap,
                          const TokenizerSpec& spec) {
    std::map<std::string, long long> tf;
    for (const Turn* t : members) {
        for (const auto& [tok, n] : content_token_counts(t->text, spec)) {
            tf[tok] += n;
        }
    }

    std::vector<RankedSentence> ranked;
    int position = 0;
    for (const Turn* t : members) {
        for (auto& sent : split_sentences(t->text)) {
            RankedSentence rs;
            rs.position = position++;
            rs.tokens = count_tokens(sent, spec);
            const auto content = content_tokens(sent, spec);
            if (!content.empty()) {
                double sum = 0.0;
                for (const auto& tok : content) {
                    const auto it = tf.find(tok);
                    if (it == tf.end()) continue;
                    sum += static_cast<double>(it->second) *
                           std::log(n_turns / static_cast<double>(df.at(tok)));
                }
                rs.score = sum / static_cast<double>(content.size());
            }
            rs.text = std::move(sent);
            ranked.push_back(std::move(rs));
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedSentence& a, const RankedSentence& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.position < b.position;
    });

    std::vector<const RankedSentence*> admitted;
    long long used = 0;
    for (const auto& rs : ranked) {
        if (rs.tokens <= 0) continue;
        if (used + rs.tokens <= cap) {
            admitted.push_back(&rs);
            used += rs.tokens;
        }
    }
    std::sort(admitted.begin(), admitted.end(),
              [](const RankedSentence* a, const RankedSentence* b) {
                  return a->position < b->position;
              });

    std::string body;
    for (const RankedSentence* rs : admitted) {
        if (!body.empty()) body += ' ';
        body += rs->text;
    }
    return body;
}

}  // namespace

std::vector<SummarySegment> summarize_band(const std::vector<std::string>& band_ids,
                                           const std::vector<Turn>& history_turns,
                                           const std::vector<ScoredTurn>& scored,
                                           double cap_fraction, const TokenizerSpec& spec,
                                           const SummarizeHook& hook,
                                           std::set<std::string>* flags) {
    if (!(cap_fraction > 0.0) || !(cap_fraction <= 1.0)) {
        throw InputError("summarize_band: cap_fraction must lie in (0, 1]");
    }
    std::map<std::string, const Turn*> by_id;
    for (const auto& t : history_turns) by_id[t.turn_id] = &t;
    std::map<std::string, double> z_by_id;
    for (const auto& st : scored) z_by_id[st.turn_id] = st.z;

    const double n_turns = static_cast<double>(history_turns.size());
    std::map<std::string, long long> df;
    for (const auto& turn : history_turns) {
        for (const auto& tok : content_tokens(turn.text, spec)) {
            df[tok] += 1;
        }
    }

    std::vector<const Turn*> band;
    band.reserve(band_ids.size());
    for (const auto& id : band_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw InputError("summarize_band: band turn '" + id + "' not in history");
        }
        band.push_back(it->second);
    }

    std::vector<SummarySegment> segments;
    size_t i = 0;
    while (i < band.size()) {
        size_t j = i + 1;
        while (j < band.size() && band[j]->index == band[j - 1]->index + 1) ++j;

        long long block_tokens = 0;
        for (size_t k = i; k < j; ++k) block_tokens += band[k]->token_count;
        const long long cap = std::max<long long>(
            10, static_cast<long long>(std::floor(cap_fraction * static_cast<double>(block_tokens))));

        std::string body;
        bool done = false;
        if (hook) {
            std::string block_text;
            for (size_t k = i; k < j; ++k) {
                if (!block_text.empty()) block_text += '\n';
                block_text += band[k]->text;
            }
            try {
                body = truncate_to_tokens(hook(block_text, static_cast<int>(cap)),
                                          static_cast<int>(cap), spec);
                done = true;
            } catch (const std::exception&) {
                if (flags) flags->insert("summary-fallback");
            }
        }
        if (!done) {
            std::vector<const Turn*> members(band.begin() + static_cast<long>(i),
                                             band.begin() + static_cast<long>(j));
            body = extract_block(members, n_turns, df, cap, spec);
        }

        SummarySegment seg;
        seg.first_index = band[i]->index;
        seg.summary_text = std::string(kSummaryMarker) + body;
        seg.token_count = count_tokens(body, spec);
        double z_max = 0.0;
        for (size_t k = i; k < j; ++k) {
            seg.member_turn_ids.push_back(band[k]->turn_id);
            const auto it = z_by_id.find(band[k]->turn_id);
            if (it == z_by_id.end()) {
                throw InputError("summarize_band: no score for turn '" + band[k]->turn_id + "'");
            }
            z_max = std::max(z_max, it->second);
        }
        seg.z_max = z_max;
        segments.push_back(std::move(seg));
        i = j;
    }
    return segments;
}

AdaptResult adapt_retained_fit(const MemoryState& state, const std::vector<ScoredTurn>& scored,
                               const std::vector<Turn>& turns, int budget, double phi,
                               const Thresholds& th) {
    if (budget <= 0) {
        throw InputError("adapt_retained_fit: budget must be positive");
    }
    if (!(phi > 0.0) || !(phi <= 1.0)) {
        throw InputError("adapt_retained_fit: phi must lie in (0, 1]");
    }
    std::map<std::string, long long> tokens_by_id;
    for (const auto& t : turns) tokens_by_id[t.turn_id] = t.token_count;
    const auto retained_tokens = [&](const MemoryState& s) {
        long long total = 0;
        for (const auto& id : s.retained) {
            const auto it = tokens_by_id.find(id);
            if (it == tokens_by_id.end()) {
                throw InputError("adapt_retained_fit: retained turn '" + id + "' not in history");
            }
            total += it->second;
        }
        return total;
    };

    std::vector<double> z;
    z.reserve(scored.size());
    for (const auto& st : scored) z.push_back(st.z);

    AdaptResult result;
    result.state = state;
    result.thresholds = th;
    const double limit = phi * static_cast<double>(budget);
    // q_s steps counted in integers to make the 0.95 cap exact.
    int round = 0;
    while (static_cast<double>(retained_tokens(result.state)) > limit &&
           result.thresholds.q_s < 0.95 - 1e-12) {
        ++round;
        const double q_s = std::min(0.95, th.q_s + 0.05 * round);
        result.thresholds = compute_thresholds(z, q_s, th.q_l);
        auto next = partition(scored, result.thresholds);
        next.summaries = result.state.summaries;
        result.state = std::move(next);
        result.rounds = round;
    }
    return result;
}

}  // namespace ctxcomp
