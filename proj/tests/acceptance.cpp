// Acceptance gate: ten end-to-end checks, one verdict line each.
// Exit status is the number of failed checks.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctxcomp/budget.hpp"
#include "ctxcomp/engine.hpp"
#include "ctxcomp/errors.hpp"
#include "ctxcomp/ingest.hpp"
#include "ctxcomp/memory.hpp"
#include "ctxcomp/metrics.hpp"
#include "ctxcomp/scoring.hpp"
#include "ctxcomp/serialization.hpp"
#include "ctxcomp/tokenizer.hpp"

using namespace ctxcomp;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

Verdict ok(std::string detail) { return {true, std::move(detail)}; }
Verdict bad(std::string detail) { return {false, std::move(detail)}; }

std::string data_path(const std::string& name) {
    return std::string(CTXCOMP_TEST_DATA_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

const char* kFuzzWords[] = {
    "budget",   "review",   "zeppelin", "vienna", "charter",  "crew",    "ballast",
    "navigation", "weather", "fuel",    "hangar", "briefing", "checklist", "monday",
    "friday",   "quarterly", "demo",    "forecast", "skies",  "charts",  "logs",
    "route",    "valve",    "engine",   "lift",   "mast",     "dock",    "port",
    "cargo",    "manifest", "wind",     "dawn",   "alps",     "42",      "7",
    "not",      "never",    "the",      "and",    "for",      "we",      "is",
    "about",    "again",    "over",     "under",  "very",     "so",
};
constexpr int kFuzzWordCount = static_cast<int>(sizeof kFuzzWords / sizeof *kFuzzWords);

// 1. Every randomized step stays within its dynamic budget.
Verdict check_budget_safety() {
    std::mt19937_64 rng(20240816ULL);
    auto real = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto sentence = [&](int lo, int hi) {
        const int n = integer(lo, hi);
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (!text.empty()) text += ' ';
            text += kFuzzWords[integer(0, kFuzzWordCount - 1)];
        }
        return text + ".";
    };

    TokenizerSpec spec;
    const auto start = std::chrono::steady_clock::now();
    const int kSteps = 1000;
    for (int it = 0; it < kSteps; ++it) {
        const int n_turns = integer(1, 40);
        std::vector<Turn> turns;
        turns.reserve(static_cast<size_t>(n_turns));
        for (int i = 0; i < n_turns; ++i) {
            Turn t;
            t.turn_id = "t" + std::to_string(i);
            t.index = i;
            t.speaker = (i % 2 == 0) ? "user" : "assistant";
            t.text = sentence(3, 12);
            turns.push_back(std::move(t));
        }
        Conversation conv("fuzz-" + std::to_string(it), std::move(turns), {}, spec);

        EngineConfig cfg;
        cfg.scoring.alpha = real(0.0, 1.0);
        cfg.scoring.beta = real(0.0, 1.0);
        cfg.scoring.gamma = real(0.0, 1.0);
        if (cfg.scoring.alpha + cfg.scoring.beta + cfg.scoring.gamma < 1e-6) {
            cfg.scoring.alpha = 1.0;
        }
        cfg.scoring.rho = real(0.5, 50.0);
        cfg.budget.b_max = integer(16, 6000);
        cfg.budget.b_min = integer(0, cfg.budget.b_max);
        cfg.budget.lambda = real(0.0, static_cast<double>(cfg.budget.b_max - cfg.budget.b_min));
        cfg.budget.window = integer(1, 25);
        cfg.budget.orientation =
            integer(0, 1) == 0 ? BudgetOrientation::EntropyExpands : BudgetOrientation::Literal;
        cfg.thresholds.q_s = real(0.55, 0.95);
        cfg.thresholds.q_l = real(0.05, cfg.thresholds.q_s - 0.05);
        cfg.thresholds.phi = real(0.15, 1.0);
        cfg.thresholds.cap_fraction = real(0.05, 1.0);
        cfg.objective.eta1 = real(0.0, 2.0);
        cfg.objective.eta2 = real(0.0, 2.0);
        cfg.objective.eta3 = real(0.0, 2.0);

        Query q;
        q.step = n_turns;
        q.text = sentence(1, 5);
        std::optional<std::string> prev;
        if (integer(0, 1) == 0) prev = sentence(3, 10);

        StepResult res;
        try {
            res = compress_step(conv, q, cfg, prev, std::nullopt, {}, spec);
        } catch (const std::exception& e) {
            return bad("step " + std::to_string(it) + " threw: " + e.what());
        }
        if (res.compressed.used_tokens > res.b_t) {
            return bad("step " + std::to_string(it) + " used " +
                       std::to_string(res.compressed.used_tokens) + " of budget " +
                       std::to_string(res.b_t));
        }
        if (res.b_t < cfg.budget.b_min || res.b_t > cfg.budget.b_max) {
            return bad("step " + std::to_string(it) + " budget " + std::to_string(res.b_t) +
                       " escaped [" + std::to_string(cfg.budget.b_min) + ", " +
                       std::to_string(cfg.budget.b_max) + "]");
        }
        long long sum = 0;
        for (const auto& seg : res.compressed.segments) sum += seg.token_count;
        if (sum != res.compressed.used_tokens) {
            return bad("step " + std::to_string(it) + " segment sum mismatch");
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) return bad("took " + fmt("%.1f", elapsed) + "s, limit 30s");
    return ok(std::to_string(kSteps) + " randomized steps within budget in " +
              fmt("%.2f", elapsed) + "s");
}

// 2. The shipped 200-turn corpus compresses into the documented band.
Verdict check_corpus_reduction() {
    TokenizerSpec spec;
    const auto start = std::chrono::steady_clock::now();
    auto convs = load_auto(data_path("synthetic_200turn.json"), spec);
    if (convs.size() != 1) return bad("expected one conversation in the corpus");
    if (convs[0].turns().size() != 200) {
        return bad("corpus has " + std::to_string(convs[0].turns().size()) + " turns, want 200");
    }
    EngineConfig cfg;
    ReplayResult rr = replay(convs[0], cfg, {}, spec);
    if (rr.steps.empty()) return bad("replay produced no steps");
    if (rr.aggregate.failed_steps != 0) {
        return bad(std::to_string(rr.aggregate.failed_steps) + " replay steps failed");
    }
    const double reduction = rr.aggregate.reduction.mean;
    const double elapsed = seconds_since(start);
    if (elapsed >= 10.0) return bad("took " + fmt("%.1f", elapsed) + "s, limit 10s");
    if (reduction < 0.25) {
        return bad("mean token reduction " + fmt("%.4f", reduction) + " below the 0.25 floor");
    }
    const std::string upper = reduction <= 0.55 ? "inside" : "above";
    return ok("mean token reduction " + fmt("%.1f", reduction * 100.0) + "% (floor asserted, " +
              upper + " the reported 55% upper side) over " + std::to_string(rr.aggregate.steps) +
              " steps in " + fmt("%.2f", elapsed) + "s");
}

// 3. BLEU behaves as a metric: identity, disjoint, and a frozen vector.
Verdict check_bleu_oracle() {
    TokenizerSpec spec;
    const std::string same = "the zeppelin crossed the alps at dawn heading south";
    const double identity = bleu(same, same, spec);
    if (std::fabs(identity - 1.0) > 1e-9) {
        return bad("identity BLEU " + fmt("%.12f", identity));
    }
    const double disjoint = bleu("alpha bravo charlie delta", "echo foxtrot golf hotel", spec);
    if (disjoint != 0.0) return bad("disjoint BLEU " + fmt("%.12f", disjoint));
    const double frozen = bleu("alpha bravo charlie delta echo foxtrot golf hotel india kilo",
                               "alpha bravo charlie kilo delta echo foxtrot india golf hotel", spec);
    if (std::fabs(frozen - 0.362989764558) > 1e-6) {
        return bad("frozen vector BLEU " + fmt("%.12f", frozen));
    }
    return ok("identity, disjoint, and frozen ten-token vector all match");
}

// 4. Entropy endpoints are exact and the budget responds monotonically.
Verdict check_entropy_and_budget() {
    TokenizerSpec spec;
    std::vector<Turn> uniform{{"t0", 0, "user", "alpha bravo charlie delta echo", -1}};
    Conversation u("uniform", std::move(uniform), {}, spec);
    const double h_uniform = dialogue_entropy(u.turns(), 10, spec);
    if (std::fabs(h_uniform - 1.0) > 1e-12) {
        return bad("uniform entropy " + fmt("%.15f", h_uniform));
    }
    std::vector<Turn> flat{{"t0", 0, "user", "alpha alpha alpha alpha", -1}};
    Conversation f("flat", std::move(flat), {}, spec);
    const double h_flat = dialogue_entropy(f.turns(), 10, spec);
    if (h_flat != 0.0) return bad("degenerate entropy " + fmt("%.15f", h_flat));

    BudgetConfig cfg;
    int prev = dynamic_budget(0.0, cfg);
    for (int i = 1; i <= 100; ++i) {
        const int b = dynamic_budget(static_cast<double>(i) / 100.0, cfg);
        if (b < prev) return bad("budget not monotone at h=" + std::to_string(i));
        prev = b;
    }
    BudgetConfig literal = cfg;
    literal.orientation = BudgetOrientation::Literal;
    prev = dynamic_budget(0.0, literal);
    for (int i = 1; i <= 100; ++i) {
        const int b = dynamic_budget(static_cast<double>(i) / 100.0, literal);
        if (b > prev) return bad("literal budget not antitone at h=" + std::to_string(i));
        prev = b;
    }
    return ok("entropy endpoints exact; budget monotone across a 101-point sweep");
}

// 5. Greedy selection equals an independent trace; knapsack gap reported.
Verdict check_selection_oracle() {
    std::mt19937_64 rng(5150ULL);
    auto real = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    double ratio_sum = 0.0;
    double ratio_min = 1.0;
    int ratio_count = 0;
    for (int it = 0; it < 500; ++it) {
        const int n = integer(0, 12);
        std::vector<Segment> cands;
        cands.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Segment s;
            s.kind = SegmentKind::Turn;
            s.id = "s" + std::to_string(i);
            s.index = i;
            s.speaker = "user";
            s.text = "w";
            s.token_count = integer(1, 30);
            s.z = integer(0, 1) == 0 ? static_cast<double>(integer(0, 100)) / 100.0
                                     : real(0.0, 1.0);
            cands.push_back(std::move(s));
        }
        const int budget = integer(0, 60);
        long long history = 1;
        for (const auto& c : cands) history += c.token_count;

        CompressedContext got = select_under_budget(cands, budget, history);

        // Trace oracle: repeated max scans instead of a sort.
        std::vector<bool> seen(static_cast<size_t>(n), false);
        std::vector<bool> admit(static_cast<size_t>(n), false);
        long long used = 0;
        if (budget > 0) {
            for (int round = 0; round < n; ++round) {
                int best = -1;
                for (int i = 0; i < n; ++i) {
                    if (seen[static_cast<size_t>(i)]) continue;
                    if (best < 0 || cands[static_cast<size_t>(i)].z >
                                        cands[static_cast<size_t>(best)].z) {
                        best = i;
                    }
                }
                seen[static_cast<size_t>(best)] = true;
                if (used + cands[static_cast<size_t>(best)].token_count <= budget) {
                    admit[static_cast<size_t>(best)] = true;
                    used += cands[static_cast<size_t>(best)].token_count;
                }
            }
        }
        std::vector<std::string> expect_ids;
        for (int i = 0; i < n; ++i) {
            if (admit[static_cast<size_t>(i)]) expect_ids.push_back(cands[static_cast<size_t>(i)].id);
        }
        std::vector<std::string> got_ids;
        for (const auto& seg : got.segments) got_ids.push_back(seg.id);
        if (got_ids != expect_ids || got.used_tokens != used) {
            return bad("instance " + std::to_string(it) + " diverged from the trace oracle");
        }

        // Exhaustive knapsack for the quality diagnostic only.
        double best_z = 0.0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            long long tok = 0;
            double zsum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (mask & (1u << i)) {
                    tok += cands[static_cast<size_t>(i)].token_count;
                    zsum += cands[static_cast<size_t>(i)].z;
                }
            }
            if (tok <= budget && zsum > best_z) best_z = zsum;
        }
        double greedy_z = 0.0;
        for (const auto& seg : got.segments) greedy_z += seg.z;
        if (greedy_z > best_z + 1e-9) {
            return bad("greedy beat the exhaustive optimum, instance " + std::to_string(it));
        }
        if (best_z > 0.0) {
            const double q = greedy_z / best_z;
            ratio_sum += q;
            ratio_min = std::min(ratio_min, q);
            ++ratio_count;
        }
    }
    return ok("500 instances match the trace oracle; greedy/knapsack z ratio mean " +
              fmt("%.3f", ratio_sum / std::max(1, ratio_count)) + ", min " +
              fmt("%.3f", ratio_min));
}

// 6. Partition is a disjoint, exhaustive split honoring both boundaries.
Verdict check_partition_rules() {
    std::mt19937_64 rng(616ULL);
    auto real = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    long long at_tau_s = 0;
    long long at_tau_l = 0;
    for (int it = 0; it < 1000; ++it) {
        const int n = integer(1, 50);
        std::vector<ScoredTurn> scored;
        scored.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double z = integer(0, 1) == 0 ? static_cast<double>(integer(0, 20)) / 20.0
                                                : real(0.0, 1.0);
            scored.push_back({"t" + std::to_string(i), z, 1.0, z});
        }
        double q_s = 0.7;
        double q_l = 0.3;
        if (integer(0, 1) == 0) {
            q_l = real(0.05, 0.5);
            q_s = real(q_l + 0.05, 0.95);
        }
        std::vector<double> zs;
        for (const auto& st : scored) zs.push_back(st.z);
        const Thresholds th = compute_thresholds(zs, q_s, q_l);
        if (th.tau_l > th.tau_s) return bad("tau_l above tau_s, instance " + std::to_string(it));
        const MemoryState state = partition(scored, th);

        if (state.retained.size() + state.band.size() + state.dropped.size() !=
            static_cast<size_t>(n)) {
            return bad("partition lost turns, instance " + std::to_string(it));
        }
        std::vector<int> bucket(static_cast<size_t>(n), -1);
        auto mark = [&](const std::vector<std::string>& ids, int which) {
            for (const auto& id : ids) {
                const int i = std::stoi(id.substr(1));
                if (bucket[static_cast<size_t>(i)] != -1) return false;
                bucket[static_cast<size_t>(i)] = which;
            }
            return true;
        };
        if (!mark(state.retained, 0) || !mark(state.band, 1) || !mark(state.dropped, 2)) {
            return bad("partition overlapped, instance " + std::to_string(it));
        }
        for (int i = 0; i < n; ++i) {
            const double z = scored[static_cast<size_t>(i)].z;
            const int want = z > th.tau_s ? 0 : (z > th.tau_l ? 1 : 2);
            if (bucket[static_cast<size_t>(i)] != want) {
                return bad("misplaced turn, instance " + std::to_string(it));
            }
            if (z == th.tau_s) ++at_tau_s;
            if (z == th.tau_l) ++at_tau_l;
        }
    }
    if (at_tau_s == 0 || at_tau_l == 0) return bad("boundaries never exercised");
    return ok("1000 instances disjoint and exhaustive; " + std::to_string(at_tau_s) +
              " hits at tau_s, " + std::to_string(at_tau_l) + " at tau_l");
}

// 7. Scaling every importance score by k > 0 leaves the z ranking unchanged.
Verdict check_rank_invariance() {
    std::mt19937_64 rng(2718ULL);
    auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const double ks[] = {0.001, 0.37, 2.0, 1000.0};

    for (int it = 0; it < 200; ++it) {
        const int n = integer(2, 40);
        std::vector<double> z(static_cast<size_t>(n));
        for (auto& v : z) v = static_cast<double>(integer(0, 1000)) / 1000.0;

        auto order_of = [&](const std::vector<double>& values) {
            std::vector<int> idx(values.size());
            for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                const double za = values[static_cast<size_t>(a)];
                const double zb = values[static_cast<size_t>(b)];
                if (za != zb) return za > zb;
                return a < b;
            });
            return idx;
        };
        const auto base = order_of(z);
        for (const double k : ks) {
            std::vector<double> scaled(z.size());
            for (size_t i = 0; i < z.size(); ++i) scaled[i] = k * z[i];
            if (order_of(scaled) != base) {
                return bad("order changed under k=" + fmt("%.3f", k) + ", instance " +
                           std::to_string(it));
            }
        }
    }
    return ok("argsort(z) stable under four scale factors across 200 instances");
}

// 8. The golden eight-turn fixture reproduces its frozen step bytes.
Verdict check_golden_step() {
    TokenizerSpec spec;
    auto convs = load_auto(data_path("golden/conversation.json"), spec);
    if (convs.size() != 1) return bad("golden fixture must hold one conversation");
    const Conversation& conv = convs[0];

    EngineConfig cfg;
    Query q;
    q.step = static_cast<int>(conv.turns().size());
    q.text = "when is the budget review";
    const std::optional<std::string> prev = conv.turns().back().text;

    const StepResult r1 = compress_step(conv, q, cfg, prev, std::nullopt, {}, spec);
    const StepResult r2 = compress_step(conv, q, cfg, prev, std::nullopt, {}, spec);
    const std::string d1 = dump_json(step_to_json(r1));
    const std::string d2 = dump_json(step_to_json(r2));
    if (d1 != d2) return bad("two in-process runs disagree");
    const std::string frozen = read_file(data_path("golden/compress_step.json"));
    if (frozen.empty()) return bad("frozen golden step missing");
    if (d1 != frozen) return bad("step output deviates from the frozen bytes");
    return ok("two runs and the frozen file agree byte for byte");
}

// 9. Replay through the CLI is reproducible once latency fields are masked.
Verdict check_replay_determinism() {
    const std::string base = "/tmp/ctxcomp_acc_" + std::to_string(getpid());
    const std::string cmd_prefix = std::string(CTXCOMP_CLI_PATH) + " replay --config " +
                                   data_path("golden/config.json") + " --dataset " +
                                   data_path("synthetic_200turn.json") + " --jobs 1 --out ";
    for (int i = 1; i <= 2; ++i) {
        const std::string cmd =
            cmd_prefix + base + "_r" + std::to_string(i) + ".json >/dev/null 2>/dev/null";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            return bad("replay run " + std::to_string(i) + " failed");
        }
    }
    const auto j1 = strip_volatile(ojson::parse(read_file(base + "_r1.json")));
    const auto j2 = strip_volatile(ojson::parse(read_file(base + "_r2.json")));
    std::remove((base + "_r1.json").c_str());
    std::remove((base + "_r2.json").c_str());
    std::remove((base + "_r1.md").c_str());
    std::remove((base + "_r2.md").c_str());
    if (dump_json(j1) != dump_json(j2)) return bad("masked reports differ");
    return ok("two CLI replays byte-identical after masking latency fields");
}

// 10. A 1000-turn step lands under a second; doubling stays near linear.
Verdict check_throughput() {
    TokenizerSpec spec;
    auto median_step_seconds = [&](int n_turns) {
        Conversation conv = synthesize(n_turns, 77, SyntheticProfile::TopicalDrift, spec);
        Query q;
        q.step = n_turns;
        q.text = conv.turns().back().text;
        const std::optional<std::string> prev = conv.turns().back().text;
        EngineConfig cfg;
        compress_step(conv, q, cfg, prev, std::nullopt, {}, spec);
        std::vector<double> times;
        for (int rep = 0; rep < 5; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            compress_step(conv, q, cfg, prev, std::nullopt, {}, spec);
            times.push_back(seconds_since(start));
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };
    const double m1 = median_step_seconds(1000);
    const double m2 = median_step_seconds(2000);
    if (m1 >= 1.0) return bad("1000-turn median " + fmt("%.3f", m1) + "s, limit 1s");
    if (m2 >= 2.5 * m1) {
        return bad("2000-turn median " + fmt("%.3f", m2) + "s vs 2.5x bound " +
                   fmt("%.3f", 2.5 * m1) + "s");
    }
    return ok("medians " + fmt("%.3f", m1) + "s at 1000 turns, " + fmt("%.3f", m2) +
              "s at 2000");
}

struct Criterion {
    const char* name;
    std::function<Verdict()> run;
};

}  // namespace

int main() {
    unsetenv("CTX_LLM_ENDPOINT");
    unsetenv("CTX_LLM_API_KEY");
    unsetenv("CTX_LLM_MODEL");

    const Criterion criteria[] = {
        {"budget safety", check_budget_safety},
        {"corpus reduction", check_corpus_reduction},
        {"bleu oracle", check_bleu_oracle},
        {"entropy and budget", check_entropy_and_budget},
        {"selection oracle", check_selection_oracle},
        {"partition rules", check_partition_rules},
        {"rank invariance", check_rank_invariance},
        {"golden step", check_golden_step},
        {"replay determinism", check_replay_determinism},
        {"throughput", check_throughput},
    };

    int failures = 0;
    int number = 0;
    for (const auto& criterion : criteria) {
        ++number;
        Verdict v;
        try {
            v = criterion.run();
        } catch (const std::exception& e) {
            v = bad(std::string("threw: ") + e.what());
        }
        if (!v.pass) ++failures;
        std::printf("criterion %2d %s %s: %s\n", number, v.pass ? "PASS" : "FAIL", criterion.name,
                    v.detail.c_str());
    }
    if (failures > 0) {
        std::printf("%d of 10 criteria failed\n", failures);
    } else {
        std::printf("all 10 criteria passed\n");
    }
    return failures;
}
