#include "ctxcomp/metrics.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "ctxcomp/errors.hpp"
#include "ctxcomp/memory.hpp"

namespace ctxcomp {

namespace {

/// N-gram multiset of tokens, keyed by the tokens joined with an unprintable
/// separator (tokens never contain it, so keys are collision-free).
std::map<std::string, long long> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, long long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key += '\x1f';
            key += tokens[i + static_cast<size_t>(k)];
        }
        counts[key] += 1;
    }
    return counts;
}

}  // namespace

BleuBreakdown bleu_breakdown(const std::string& candidate, const std::string& reference,
                             const TokenizerSpec& spec) {
    const auto cand = tokenize(candidate, spec);
    const auto ref = tokenize(reference, spec);

    BleuBreakdown out;
    out.candidate_len = static_cast<long long>(cand.size());
    out.reference_len = static_cast<long long>(ref.size());
    if (cand.empty() || ref.empty()) {
        out.flags.insert("empty-input");
        return out;
    }

    double log_sum = 0.0;
    int included = 0;
    bool zero_precision = false;
    for (int n = 1; n <= 4; ++n) {
        const long long cand_total =
            std::max<long long>(0, static_cast<long long>(cand.size()) - n + 1);
        if (cand_total == 0) {
            out.skipped[static_cast<size_t>(n - 1)] = true;
            continue;
        }
        const auto cand_counts = ngram_counts(cand, n);
        const auto ref_counts = ngram_counts(ref, n);
        long long clipped = 0;
        for (const auto& [gram, count] : cand_counts) {
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        double p;
        if (clipped == 0 && n >= 2) {
            p = 1.0 / static_cast<double>(cand_total + 1);
            out.smoothed[static_cast<size_t>(n - 1)] = true;
        } else {
            p = static_cast<double>(clipped) / static_cast<double>(cand_total);
        }
        out.precisions[static_cast<size_t>(n - 1)] = p;
        if (p == 0.0) {
            zero_precision = true;
        } else {
            log_sum += std::log(p);
        }
        ++included;
    }

    out.brevity_penalty =
        out.candidate_len < out.reference_len
            ? std::exp(1.0 - static_cast<double>(out.reference_len) /
                                 static_cast<double>(out.candidate_len))
            : 1.0;
    if (included == 0 || zero_precision) {
        out.score = 0.0;
    } else {
        out.score = out.brevity_penalty * std::exp(log_sum / static_cast<double>(included));
    }
    return out;
}

double bleu(const std::string& candidate, const std::string& reference,
            const TokenizerSpec& spec) {
    return bleu_breakdown(candidate, reference, spec).score;
}

double reconstruction_loss(const std::vector<Turn>& history, const CompressedContext& context,
                           const TokenizerSpec& spec) {
    if (history.empty()) {
        throw InputError("reconstruction_loss: empty history");
    }
    std::string reference;
    for (const auto& turn : history) {
        if (!reference.empty()) reference += ' ';
        reference += turn.text;
    }
    const size_t marker_len = std::strlen(kSummaryMarker);
    std::string rendering;
    for (const auto& seg : context.segments) {
        std::string text = seg.text;
        if (text.compare(0, marker_len, kSummaryMarker) == 0) {
            text.erase(0, marker_len);
        }
        if (text.empty()) continue;
        if (!rendering.empty()) rendering += ' ';
        rendering += text;
    }
    return 1.0 - bleu(rendering, reference, spec);
}

double task_loss(const std::optional<std::string>& generated_answer,
                 const std::optional<std::string>& gold_answer, const TokenizerSpec& spec,
                 std::set<std::string>* flags) {
    if (!generated_answer.has_value() || !gold_answer.has_value()) {
        if (flags) flags->insert("no-qa-pairs");
        return 0.0;
    }
    const auto gen = content_token_counts(*generated_answer, spec);
    const auto gold = content_token_counts(*gold_answer, spec);
    long long gen_total = 0;
    long long gold_total = 0;
    for (const auto& [tok, n] : gen) gen_total += n;
    for (const auto& [tok, n] : gold) gold_total += n;
    if (gen_total == 0 && gold_total == 0) return 0.0;
    if (gen_total == 0 || gold_total == 0) return 1.0;

    long long overlap = 0;
    for (const auto& [tok, n] : gen) {
        const auto it = gold.find(tok);
        if (it != gold.end()) overlap += std::min<long long>(n, it->second);
    }
    if (overlap == 0) return 1.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(gen_total);
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold_total);
    const double f1 = 2.0 * precision * recall / (precision + recall);
    return 1.0 - f1;
}

double coherence_loss(const std::vector<ScoredTurn>& dropped) {
    if (dropped.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& st : dropped) {
        sum += st.s * (1.0 - st.c);
    }
    return sum / static_cast<double>(dropped.size());
}

double token_loss(double ratio) {
    if (!(ratio >= 0.0) || !(ratio <= 1.0)) {
        throw InputError("token_loss: ratio must lie in [0, 1]");
    }
    return ratio;
}

void ObjectiveWeights::validate() const {
    for (const double eta : {eta1, eta2, eta3}) {
        if (!std::isfinite(eta) || eta < 0.0) {
            throw InputError("objective weights must be finite and non-negative");
        }
    }
}

ObjectiveReport compose(double l_task, double l_coh, double l_token, double l_rec,
                        const ObjectiveWeights& w) {
    w.validate();
    for (const double v : {l_task, l_coh, l_token, l_rec}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InputError("compose: losses must be finite and non-negative");
        }
    }
    ObjectiveReport r;
    r.l_task = l_task;
    r.l_coh = l_coh;
    r.l_token = l_token;
    r.l_rec = l_rec;
    r.l_comp = l_task + w.eta1 * l_coh + w.eta2 * l_token;
    r.l_final = r.l_comp + w.eta3 * l_rec;
    return r;
}

}  // namespace ctxcomp
