#include "ctxcomp/serialization.hpp"

#include "ctxcomp/errors.hpp"

namespace ctxcomp {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw InputError(where.empty() ? what : where + ": " + what);
}

const ojson& member(const ojson& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing '") + key + "'");
    return *it;
}

std::string as_string(const ojson& j, const char* key, const std::string& where) {
    const auto& v = member(j, key, where);
    if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

long long as_int(const ojson& j, const char* key, const std::string& where) {
    const auto& v = member(j, key, where);
    if (!v.is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
    return v.get<long long>();
}

double as_number(const ojson& v, const char* key, const std::string& where) {
    if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
    return v.get<double>();
}

void reject_unknown(const ojson& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) fail(where, "unknown key '" + key + "'");
    }
}

ojson string_array(const std::vector<std::string>& values) {
    ojson arr = ojson::array();
    for (const auto& v : values) arr.push_back(v);
    return arr;
}

ojson flag_array(const std::set<std::string>& flags) {
    ojson arr = ojson::array();
    for (const auto& f : flags) arr.push_back(f);
    return arr;
}

ojson aggregate_to_json(const Aggregate& ag) {
    return ojson{{"mean", ag.mean}, {"min", ag.min}, {"max", ag.max}};
}

}  // namespace

ojson config_to_json(const EngineConfig& cfg) {
    ojson j;
    j["scoring"] = {{"alpha", cfg.scoring.alpha},
                    {"beta", cfg.scoring.beta},
                    {"gamma", cfg.scoring.gamma},
                    {"rho", cfg.scoring.rho}};
    j["budget"] = {{"b_max", cfg.budget.b_max},
                   {"b_min", cfg.budget.b_min},
                   {"lambda", cfg.budget.lambda},
                   {"window", cfg.budget.window}};
    j["budget_orientation"] =
        cfg.budget.orientation == BudgetOrientation::EntropyExpands ? "prose" : "literal";
    j["thresholds"] = {{"q_s", cfg.thresholds.q_s},
                       {"q_l", cfg.thresholds.q_l},
                       {"phi", cfg.thresholds.phi},
                       {"cap_fraction", cfg.thresholds.cap_fraction}};
    j["objective"] = {{"eta1", cfg.objective.eta1},
                      {"eta2", cfg.objective.eta2},
                      {"eta3", cfg.objective.eta3}};
    j["seed"] = cfg.seed;
    return j;
}

EngineConfig config_from_json(const ojson& j) {
    EngineConfig cfg;
    reject_unknown(
        j, {"scoring", "budget", "budget_orientation", "thresholds", "objective", "seed"},
        "config");
    if (j.contains("scoring")) {
        const auto& s = j.at("scoring");
        reject_unknown(s, {"alpha", "beta", "gamma", "rho"}, "config.scoring");
        if (s.contains("alpha")) cfg.scoring.alpha = as_number(s.at("alpha"), "alpha", "config.scoring");
        if (s.contains("beta")) cfg.scoring.beta = as_number(s.at("beta"), "beta", "config.scoring");
        if (s.contains("gamma")) cfg.scoring.gamma = as_number(s.at("gamma"), "gamma", "config.scoring");
        if (s.contains("rho")) cfg.scoring.rho = as_number(s.at("rho"), "rho", "config.scoring");
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        reject_unknown(b, {"b_max", "b_min", "lambda", "window"}, "config.budget");
        if (b.contains("b_max")) cfg.budget.b_max = static_cast<int>(as_int(b, "b_max", "config.budget"));
        if (b.contains("b_min")) cfg.budget.b_min = static_cast<int>(as_int(b, "b_min", "config.budget"));
        if (b.contains("lambda")) cfg.budget.lambda = as_number(b.at("lambda"), "lambda", "config.budget");
        if (b.contains("window")) cfg.budget.window = static_cast<int>(as_int(b, "window", "config.budget"));
    }
    if (j.contains("budget_orientation")) {
        const auto o = j.at("budget_orientation");
        if (!o.is_string()) fail("config", "'budget_orientation' must be a string");
        const auto s = o.get<std::string>();
        if (s == "prose") {
            cfg.budget.orientation = BudgetOrientation::EntropyExpands;
        } else if (s == "literal") {
            cfg.budget.orientation = BudgetOrientation::Literal;
        } else {
            fail("config", "budget_orientation must be 'prose' or 'literal', got '" + s + "'");
        }
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        reject_unknown(t, {"q_s", "q_l", "phi", "cap_fraction"}, "config.thresholds");
        if (t.contains("q_s")) cfg.thresholds.q_s = as_number(t.at("q_s"), "q_s", "config.thresholds");
        if (t.contains("q_l")) cfg.thresholds.q_l = as_number(t.at("q_l"), "q_l", "config.thresholds");
        if (t.contains("phi")) cfg.thresholds.phi = as_number(t.at("phi"), "phi", "config.thresholds");
        if (t.contains("cap_fraction")) {
            cfg.thresholds.cap_fraction =
                as_number(t.at("cap_fraction"), "cap_fraction", "config.thresholds");
        }
    }
    if (j.contains("objective")) {
        const auto& o = j.at("objective");
        reject_unknown(o, {"eta1", "eta2", "eta3"}, "config.objective");
        if (o.contains("eta1")) cfg.objective.eta1 = as_number(o.at("eta1"), "eta1", "config.objective");
        if (o.contains("eta2")) cfg.objective.eta2 = as_number(o.at("eta2"), "eta2", "config.objective");
        if (o.contains("eta3")) cfg.objective.eta3 = as_number(o.at("eta3"), "eta3", "config.objective");
    }
    if (j.contains("seed")) cfg.seed = as_int(j, "seed", "config");
    cfg.validate();
    return cfg;
}

ojson conversation_to_json(const Conversation& conv) {
    ojson j;
    j["conversation_id"] = conv.id();
    ojson turns = ojson::array();
    for (const auto& t : conv.turns()) {
        turns.push_back(ojson{{"turn_id", t.turn_id},
                              {"index", t.index},
                              {"speaker", t.speaker},
                              {"text", t.text}});
    }
    j["turns"] = std::move(turns);
    ojson qa = ojson::array();
    for (const auto& pair : conv.qa_pairs()) {
        qa.push_back(ojson{{"question", pair.question},
                           {"answer", pair.answer},
                           {"evidence_turn_ids", string_array(pair.evidence_turn_ids)}});
    }
    j["qa_pairs"] = std::move(qa);
    return j;
}

Conversation conversation_from_json(const ojson& j, const TokenizerSpec& spec) {
    const std::string id = as_string(j, "conversation_id", "conversation");
    const auto& jturns = member(j, "turns", "conversation");
    if (!jturns.is_array()) fail("conversation", "'turns' must be an array");

    std::vector<Turn> turns;
    turns.reserve(jturns.size());
    size_t i = 0;
    for (const auto& jt : jturns) {
        const std::string where = "turns[" + std::to_string(i) + "]";
        Turn t;
        t.turn_id = as_string(jt, "turn_id", where);
        t.index = static_cast<int>(as_int(jt, "index", where));
        t.speaker = as_string(jt, "speaker", where);
        t.text = as_string(jt, "text", where);
        if (jt.contains("token_count")) {
            t.token_count = static_cast<int>(as_int(jt, "token_count", where));
        }
        turns.push_back(std::move(t));
        ++i;
    }

    std::vector<QaPair> qa_pairs;
    if (j.contains("qa_pairs")) {
        const auto& jqa = j.at("qa_pairs");
        if (!jqa.is_array()) fail("conversation", "'qa_pairs' must be an array");
        size_t k = 0;
        for (const auto& jq : jqa) {
            const std::string where = "qa_pairs[" + std::to_string(k) + "]";
            QaPair pair;
            pair.question = as_string(jq, "question", where);
            pair.answer = as_string(jq, "answer", where);
            if (jq.contains("evidence_turn_ids")) {
                const auto& ev = jq.at("evidence_turn_ids");
                if (!ev.is_array()) fail(where, "'evidence_turn_ids' must be an array");
                for (const auto& e : ev) {
                    if (!e.is_string()) fail(where, "evidence ids must be strings");
                    pair.evidence_turn_ids.push_back(e.get<std::string>());
                }
            }
            qa_pairs.push_back(std::move(pair));
            ++k;
        }
    }
    return Conversation(id, std::move(turns), std::move(qa_pairs), spec);
}

ojson objective_to_json(const ObjectiveReport& report) {
    ojson j;
    j["l_task"] = report.l_task;
    j["l_coh"] = report.l_coh;
    j["l_token"] = report.l_token;
    j["l_rec"] = report.l_rec;
    j["l_comp"] = report.l_comp;
    j["l_final"] = report.l_final;
    j["flags"] = flag_array(report.flags);
    return j;
}

ojson memory_to_json(const MemoryState& state) {
    ojson j;
    j["retained"] = string_array(state.retained);
    j["band"] = string_array(state.band);
    ojson summaries = ojson::array();
    for (const auto& s : state.summaries) {
        summaries.push_back(ojson{{"member_turn_ids", string_array(s.member_turn_ids)},
                                  {"first_index", s.first_index},
                                  {"summary_text", s.summary_text},
                                  {"z_max", s.z_max},
                                  {"token_count", s.token_count}});
    }
    j["summaries"] = std::move(summaries);
    j["dropped"] = string_array(state.dropped);
    return j;
}

ojson context_to_json(const CompressedContext& context) {
    ojson j;
    ojson segments = ojson::array();
    for (const auto& seg : context.segments) {
        ojson js;
        js["kind"] = seg.kind == SegmentKind::Turn ? "retained" : "summary";
        js["id"] = seg.id;
        js["index"] = seg.index;
        js["speaker"] = seg.speaker;
        js["text"] = seg.text;
        js["token_count"] = seg.token_count;
        js["z"] = seg.z;
        if (seg.kind == SegmentKind::Summary) {
            js["member_turn_ids"] = string_array(seg.member_turn_ids);
        }
        segments.push_back(std::move(js));
    }
    j["segments"] = std::move(segments);
    j["total_tokens"] = context.used_tokens;
    j["budget"] = context.budget;
    j["history_tokens"] = context.history_tokens;
    j["ratio"] = context.ratio;
    return j;
}

ojson step_to_json(const StepResult& result) {
    ojson j;
    j["step"] = result.step;
    j["query_text"] = result.query_text;
    ojson scored = ojson::array();
    for (const auto& st : result.scored) {
        scored.push_back(
            ojson{{"turn_id", st.turn_id}, {"s", st.s}, {"c", st.c}, {"z", st.z}});
    }
    j["scored"] = std::move(scored);
    j["thresholds"] = {{"tau_s", result.thresholds.tau_s},
                       {"tau_l", result.thresholds.tau_l},
                       {"q_s", result.thresholds.q_s},
                       {"q_l", result.thresholds.q_l}};
    j["adapt_rounds"] = result.adapt_rounds;
    j["memory"] = memory_to_json(result.memory);
    j["h_hat"] = result.h_hat;
    j["b_t"] = result.b_t;
    j["compressed"] = context_to_json(result.compressed);
    j["objective"] = result.objective.has_value() ? objective_to_json(*result.objective)
                                                  : ojson(nullptr);
    j["generated_response"] = result.generated_response.has_value()
                                  ? ojson(*result.generated_response)
                                  : ojson(nullptr);
    j["flags"] = flag_array(result.flags);
    return j;
}

ojson replay_to_json(const ReplayResult& result) {
    ojson j;
    j["conversation_id"] = result.conversation_id;
    ojson steps = ojson::array();
    for (const auto& outcome : result.steps) {
        ojson js;
        js["step"] = outcome.step;
        js["failed"] = outcome.failed;
        if (outcome.failed) {
            js["error"] = outcome.error;
        } else {
            js["result"] = step_to_json(outcome.result);
        }
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);

    const auto& ag = result.aggregate;
    ojson ja;
    ja["steps"] = ag.steps;
    ja["failed_steps"] = ag.failed_steps;
    ja["ratio"] = aggregate_to_json(ag.ratio);
    ja["reduction"] = aggregate_to_json(ag.reduction);
    ja["latency_ns"] = aggregate_to_json(ag.latency_ns);
    ojson lat = ojson::array();
    for (const auto v : ag.step_latencies_ns) lat.push_back(v);
    ja["step_latencies_ns"] = std::move(lat);
    ja["mean_l_task"] = ag.mean_l_task;
    ja["mean_l_coh"] = ag.mean_l_coh;
    ja["mean_l_token"] = ag.mean_l_token;
    ja["mean_l_rec"] = ag.mean_l_rec;
    ja["mean_l_final"] = ag.mean_l_final;
    ja["flags"] = flag_array(ag.flags);
    j["aggregate"] = std::move(ja);
    return j;
}

ojson strip_volatile(const ojson& j) {
    if (j.is_object()) {
        ojson out = ojson::object();
        for (const auto& [key, value] : j.items()) {
            if (key.find("latenc") != std::string::npos ||
                key.find("wall_time") != std::string::npos) {
                continue;
            }
            out[key] = strip_volatile(value);
        }
        return out;
    }
    if (j.is_array()) {
        ojson out = ojson::array();
        for (const auto& value : j) out.push_back(strip_volatile(value));
        return out;
    }
    return j;
}

std::string dump_json(const ojson& j) {
    return j.dump(2) + "\n";
}

}  // namespace ctxcomp
