#include "ctxcomp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

void ThresholdConfig::validate() const {
    if (!(q_l > 0.0) || !(q_s < 1.0) || !(q_l < q_s)) {
        throw InputError("thresholds: require 0 < q_l < q_s < 1");
    }
    if (!(phi > 0.0) || !(phi <= 1.0)) {
        throw InputError("thresholds: phi must lie in (0, 1]");
    }
    if (!(cap_fraction > 0.0) || !(cap_fraction <= 1.0)) {
        throw InputError("thresholds: cap_fraction must lie in (0, 1]");
    }
}

void EngineConfig::validate() const {
    scoring.validate();
    budget.validate();
    thresholds.validate();
    objective.validate();
}

namespace {

/// Runs one stage, rewrapping any failure so the error names the stage.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

}  // namespace

StepResult compress_step(const Conversation& history, const Query& query, const EngineConfig& cfg,
                         const std::optional<std::string>& prev_response,
                         const std::optional<std::string>& gold_answer, const EngineHooks& hooks,
                         const TokenizerSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    const auto& turns = history.turns();
    if (turns.empty()) {
        throw InputError("compress_step: empty history");
    }
    if (query.step != static_cast<int>(turns.size())) {
        throw InputError("compress_step: query.step must equal the history length, got step=" +
                         std::to_string(query.step) + " for " + std::to_string(turns.size()) +
                         " turns");
    }

    StepResult res;
    res.step = query.step;
    res.query_text = query.text;

    res.scored = stage("score", [&] {
        return score_turns(turns, query, prev_response, cfg.scoring, spec, hooks.scorers,
                           &res.flags);
    });

    std::vector<double> z;
    z.reserve(res.scored.size());
    for (const auto& st : res.scored) z.push_back(st.z);
    res.thresholds = stage(
        "thresholds", [&] { return compute_thresholds(z, cfg.thresholds.q_s, cfg.thresholds.q_l); });

    res.memory = stage("partition", [&] { return partition(res.scored, res.thresholds); });

    // A partition can drop the whole history (every z at or below tau_l, e.g.
    // all scores equal). Retaining nothing would starve the context even
    // under a generous budget, so fall back to the full history and let the
    // budget do the limiting. Adaptation is moot in that branch.
    const bool degenerate = res.memory.retained.empty() && res.memory.band.empty();
    if (degenerate) {
        res.flags.insert("degenerate-partition");
        res.memory.retained.clear();
        res.memory.dropped.clear();
        for (const auto& t : turns) res.memory.retained.push_back(t.turn_id);
    }

    res.h_hat = stage("entropy", [&] { return dialogue_entropy(turns, cfg.budget.window, spec); });
    res.b_t = stage("budget", [&] { return dynamic_budget(res.h_hat, cfg.budget); });

    if (!degenerate) {
        auto adapted = stage("adapt", [&] {
            return adapt_retained_fit(res.memory, res.scored, turns, res.b_t, cfg.thresholds.phi,
                                      res.thresholds);
        });
        res.memory = std::move(adapted.state);
        res.thresholds = adapted.thresholds;
        res.adapt_rounds = adapted.rounds;
    }

    res.memory.summaries = stage("summarize", [&] {
        return summarize_band(res.memory.band, turns, res.scored, cfg.thresholds.cap_fraction,
                              spec, hooks.summarize, &res.flags);
    });

    res.compressed = stage("select", [&] {
        std::map<std::string, const Turn*> by_id;
        for (const auto& t : turns) by_id[t.turn_id] = &t;
        std::map<std::string, double> z_by_id;
        for (const auto& st : res.scored) z_by_id[st.turn_id] = st.z;

        std::vector<Segment> candidates;
        candidates.reserve(res.memory.retained.size() + res.memory.summaries.size());
        for (const auto& id : res.memory.retained) {
            const Turn* t = by_id.at(id);
            if (t->token_count < 1) continue;
            Segment seg;
            seg.kind = SegmentKind::Turn;
            seg.id = id;
            seg.index = t->index;
            seg.speaker = t->speaker;
            seg.text = t->text;
            seg.token_count = t->token_count;
            seg.z = z_by_id.at(id);
            candidates.push_back(std::move(seg));
        }
        for (const auto& s : res.memory.summaries) {
            if (s.token_count < 1) continue;
            Segment seg;
            seg.kind = SegmentKind::Summary;
            seg.id = "summary@" + std::to_string(s.first_index);
            seg.member_turn_ids = s.member_turn_ids;
            seg.index = s.first_index;
            seg.speaker = "summary";
            seg.text = s.summary_text;
            seg.token_count = s.token_count;
            seg.z = s.z_max;
            candidates.push_back(std::move(seg));
        }
        return select_under_budget(candidates, res.b_t, history.total_tokens());
    });
    res.flags.insert(res.compressed.flags.begin(), res.compressed.flags.end());
    if (res.compressed.segments.empty()) {
        res.flags.insert("empty-context");
    }

    stage("objective", [&] {
        std::set<std::string> oflags;
        const double l_rec = reconstruction_loss(turns, res.compressed, spec);
        double ratio = res.compressed.ratio;
        // A remote summary may legally exceed a tiny block it stands in for;
        // the loss term is bounded, the anomaly is flagged.
        if (ratio > 1.0) {
            ratio = 1.0;
            res.flags.insert("ratio-clamped");
        }
        const double l_token = token_loss(ratio);

        std::set<std::string> dropped_ids(res.memory.dropped.begin(), res.memory.dropped.end());
        std::vector<ScoredTurn> dropped;
        for (const auto& st : res.scored) {
            if (dropped_ids.count(st.turn_id)) dropped.push_back(st);
        }
        const double l_coh = coherence_loss(dropped);

        std::optional<std::string> generated;
        if (hooks.answer) {
            try {
                generated = hooks.answer(res.compressed, query.text);
            } catch (const std::exception&) {
                res.flags.insert("answer-failed");
            }
        }
        std::optional<std::string> task_candidate = generated;
        if (!task_candidate.has_value() && gold_answer.has_value()) {
            task_candidate = gold_answer;
            oflags.insert("gold-vs-gold");
        }
        const double l_task = task_loss(task_candidate, gold_answer, spec, &oflags);

        auto report = compose(l_task, l_coh, l_token, l_rec, cfg.objective);
        report.flags = std::move(oflags);
        res.objective = std::move(report);
        res.generated_response = std::move(generated);
        return 0;
    });

    const auto elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    res.wall_time_ns = std::max<std::int64_t>(1, elapsed);
    return res;
}

namespace {

struct QueryPoint {
    int step = 0;
    std::string text;
    std::optional<std::string> gold;
};

std::vector<QueryPoint> query_points(const Conversation& conv, int stride) {
    std::vector<QueryPoint> points;
    const auto& turns = conv.turns();
    const int total = static_cast<int>(turns.size());
    if (!conv.qa_pairs().empty()) {
        std::map<std::string, int> index_by_id;
        for (const auto& t : turns) index_by_id[t.turn_id] = t.index;
        for (const auto& qa : conv.qa_pairs()) {
            int step = total;
            if (!qa.evidence_turn_ids.empty()) {
                int last = -1;
                for (const auto& id : qa.evidence_turn_ids) {
                    last = std::max(last, index_by_id.at(id));
                }
                step = std::min(total, last + 1);
            }
            if (step >= 1) {
                points.push_back({step, qa.question, qa.answer});
            }
        }
        std::stable_sort(points.begin(), points.end(),
                         [](const QueryPoint& a, const QueryPoint& b) { return a.step < b.step; });
    } else {
        for (int t = stride; t < total; t += stride) {
            points.push_back({t, turns[static_cast<size_t>(t)].text, std::nullopt});
        }
        if (points.empty() && total >= 2) {
            points.push_back({total - 1, turns[static_cast<size_t>(total - 1)].text, std::nullopt});
        }
    }
    return points;
}

Aggregate summarize_values(const std::vector<double>& values) {
    Aggregate ag;
    if (values.empty()) return ag;
    double sum = 0.0;
    ag.min = values.front();
    ag.max = values.front();
    for (const double v : values) {
        sum += v;
        ag.min = std::min(ag.min, v);
        ag.max = std::max(ag.max, v);
    }
    ag.mean = sum / static_cast<double>(values.size());
    return ag;
}

}  // namespace

ReplayResult replay(const Conversation& conversation, const EngineConfig& cfg,
                    const EngineHooks& hooks, const TokenizerSpec& spec, int query_stride) {
    cfg.validate();
    if (query_stride < 1) {
        throw InputError("replay: query_stride must be at least 1");
    }
    ReplayResult rr;
    rr.conversation_id = conversation.id();
    if (conversation.qa_pairs().empty()) {
        rr.aggregate.flags.insert("no-qa-pairs");
    } else if (!hooks.answer) {
        rr.aggregate.flags.insert("no-generation");
    }
    const auto points = query_points(conversation, query_stride);
    if (points.empty()) {
        rr.aggregate.flags.insert("no-query-points");
        return rr;
    }

    std::optional<std::string> last_generated;
    for (const auto& qp : points) {
        StepOutcome outcome;
        outcome.step = qp.step;
        std::optional<std::string> prev = last_generated;
        if (!prev.has_value() && qp.step >= 1) {
            prev = conversation.turns()[static_cast<size_t>(qp.step - 1)].text;
        }
        try {
            const auto prefix = conversation.prefix(qp.step);
            Query query;
            query.text = qp.text;
            query.step = qp.step;
            outcome.result = compress_step(prefix, query, cfg, prev, qp.gold, hooks, spec);
            if (outcome.result.generated_response.has_value()) {
                last_generated = outcome.result.generated_response;
            }
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.error = e.what();
        }
        rr.steps.push_back(std::move(outcome));
    }

    auto& ag = rr.aggregate;
    ag.steps = static_cast<int>(rr.steps.size());
    std::vector<double> ratios;
    std::vector<double> reductions;
    std::vector<double> latencies;
    double sum_task = 0.0;
    double sum_coh = 0.0;
    double sum_token = 0.0;
    double sum_rec = 0.0;
    double sum_final = 0.0;
    int scored_steps = 0;
    for (const auto& outcome : rr.steps) {
        if (outcome.failed) {
            ++ag.failed_steps;
            ag.flags.insert("step-failed");
            continue;
        }
        const auto& sr = outcome.result;
        ratios.push_back(sr.compressed.ratio);
        reductions.push_back(1.0 - sr.compressed.ratio);
        latencies.push_back(static_cast<double>(sr.wall_time_ns));
        ag.step_latencies_ns.push_back(sr.wall_time_ns);
        for (const auto& f : sr.flags) ag.flags.insert(f);
        if (sr.objective.has_value()) {
            sum_task += sr.objective->l_task;
            sum_coh += sr.objective->l_coh;
            sum_token += sr.objective->l_token;
            sum_rec += sr.objective->l_rec;
            sum_final += sr.objective->l_final;
            ++scored_steps;
            for (const auto& f : sr.objective->flags) ag.flags.insert(f);
        }
    }
    ag.ratio = summarize_values(ratios);
    ag.reduction = summarize_values(reductions);
    ag.latency_ns = summarize_values(latencies);
    if (scored_steps > 0) {
        const auto n = static_cast<double>(scored_steps);
        ag.mean_l_task = sum_task / n;
        ag.mean_l_coh = sum_coh / n;
        ag.mean_l_token = sum_token / n;
        ag.mean_l_rec = sum_rec / n;
        ag.mean_l_final = sum_final / n;
    }
    return rr;
}

}  // namespace ctxcomp
