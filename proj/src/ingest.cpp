#include "ctxcomp/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctxcomp/errors.hpp"
#include "ctxcomp/rng.hpp"
#include "ctxcomp/serialization.hpp"

namespace fs = std::filesystem;

namespace ctxcomp {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ojson parse_json(const std::string& text, const std::string& locator) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(locator + ": " + e.what());
    }
}

[[noreturn]] void fail(const std::string& locator, const std::string& what) {
    throw InputError(locator + ": " + what);
}

std::string need_string(const ojson& j, const char* key, const std::string& locator) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
        fail(locator, std::string("missing or non-string '") + key + "'");
    }
    return j.at(key).get<std::string>();
}

/// Answers in benchmark dumps are occasionally bare numbers.
std::string string_or_number(const ojson& v, const char* key, const std::string& locator) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return v.dump();
    fail(locator, std::string("'") + key + "' must be a string or number");
}

Conversation validated(const std::string& locator, std::string id, std::vector<Turn> turns,
                       std::vector<QaPair> qa, const TokenizerSpec& tok) {
    try {
        return Conversation(std::move(id), std::move(turns), std::move(qa), tok);
    } catch (const InputError& e) {
        throw InputError(locator + ": " + e.what());
    }
}

Conversation load_canonical(const ojson& j, const std::string& path, const TokenizerSpec& tok) {
    try {
        return conversation_from_json(j, tok);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

/// {"sample_id", "conversation": {"session_1": [{speaker, text, dia_id?}]},
///  "qa": [{question, answer, evidence: [dia_id]}]}. Sessions are flattened
/// chronologically; the session survives as a speaker prefix "s<N>/".
Conversation load_locomo(const ojson& j, const std::string& path, const TokenizerSpec& tok) {
    const std::string id = need_string(j, "sample_id", path);
    if (!j.contains("conversation") || !j.at("conversation").is_object()) {
        fail(path, "missing 'conversation' object");
    }
    const auto& conv = j.at("conversation");

    std::vector<std::pair<long long, std::string>> sessions;
    for (const auto& [key, value] : conv.items()) {
        if (key.rfind("session_", 0) != 0) continue;
        const std::string suffix = key.substr(8);
        if (suffix.empty() ||
            suffix.find_first_not_of("0123456789") != std::string::npos) {
            continue;  // session_1_date_time and friends
        }
        if (!value.is_array()) fail(path, "'" + key + "' must be an array of turns");
        sessions.emplace_back(std::stoll(suffix), key);
    }
    if (sessions.empty()) fail(path, "no session_<n> arrays in 'conversation'");
    std::sort(sessions.begin(), sessions.end());

    std::vector<Turn> turns;
    int index = 0;
    for (const auto& [num, key] : sessions) {
        const auto& session = conv.at(key);
        size_t pos = 0;
        for (const auto& jt : session) {
            const std::string where =
                path + ": conversation." + key + "[" + std::to_string(pos) + "]";
            Turn t;
            t.index = index;
            t.speaker = "s" + std::to_string(num) + "/" + need_string(jt, "speaker", where);
            t.text = need_string(jt, "text", where);
            t.turn_id = jt.contains("dia_id") && jt.at("dia_id").is_string()
                            ? jt.at("dia_id").get<std::string>()
                            : "s" + std::to_string(num) + "t" + std::to_string(pos);
            turns.push_back(std::move(t));
            ++index;
            ++pos;
        }
    }

    std::vector<QaPair> qa;
    if (j.contains("qa")) {
        if (!j.at("qa").is_array()) fail(path, "'qa' must be an array");
        size_t pos = 0;
        for (const auto& jq : j.at("qa")) {
            const std::string where = path + ": qa[" + std::to_string(pos) + "]";
            QaPair pair;
            pair.question = need_string(jq, "question", where);
            if (!jq.contains("answer")) fail(where, "missing 'answer'");
            pair.answer = string_or_number(jq.at("answer"), "answer", where);
            if (jq.contains("evidence")) {
                const auto& ev = jq.at("evidence");
                if (!ev.is_array()) fail(where, "'evidence' must be an array");
                for (const auto& e : ev) {
                    if (!e.is_string()) fail(where, "evidence entries must be strings");
                    pair.evidence_turn_ids.push_back(e.get<std::string>());
                }
            }
            qa.push_back(std::move(pair));
            ++pos;
        }
    }
    return validated(path, id, std::move(turns), std::move(qa), tok);
}

/// {"conversation_id"?, "dialogue": [{role, content, turn_id?}],
///  "qa_pairs": canonical shape}. Missing ids fall back to the file stem
/// and t<i>.
Conversation load_locco(const ojson& j, const std::string& path, const TokenizerSpec& tok) {
    std::string id = j.contains("conversation_id") && j.at("conversation_id").is_string()
                         ? j.at("conversation_id").get<std::string>()
                         : fs::path(path).stem().string();
    if (!j.contains("dialogue") || !j.at("dialogue").is_array()) {
        fail(path, "missing 'dialogue' array");
    }
    std::vector<Turn> turns;
    int index = 0;
    for (const auto& jt : j.at("dialogue")) {
        const std::string where = path + ": dialogue[" + std::to_string(index) + "]";
        Turn t;
        t.index = index;
        t.speaker = need_string(jt, "role", where);
        t.text = need_string(jt, "content", where);
        t.turn_id = jt.contains("turn_id") && jt.at("turn_id").is_string()
                        ? jt.at("turn_id").get<std::string>()
                        : "t" + std::to_string(index);
        turns.push_back(std::move(t));
        ++index;
    }

    std::vector<QaPair> qa;
    if (j.contains("qa_pairs")) {
        if (!j.at("qa_pairs").is_array()) fail(path, "'qa_pairs' must be an array");
        size_t pos = 0;
        for (const auto& jq : j.at("qa_pairs")) {
            const std::string where = path + ": qa_pairs[" + std::to_string(pos) + "]";
            QaPair pair;
            pair.question = need_string(jq, "question", where);
            if (!jq.contains("answer")) fail(where, "missing 'answer'");
            pair.answer = string_or_number(jq.at("answer"), "answer", where);
            if (jq.contains("evidence_turn_ids")) {
                const auto& ev = jq.at("evidence_turn_ids");
                if (!ev.is_array()) fail(where, "'evidence_turn_ids' must be an array");
                for (const auto& e : ev) {
                    if (!e.is_string()) fail(where, "evidence ids must be strings");
                    pair.evidence_turn_ids.push_back(e.get<std::string>());
                }
            }
            qa.push_back(std::move(pair));
            ++pos;
        }
    }
    return validated(path, id, std::move(turns), std::move(qa), tok);
}

/// Optional header line {"conversation_id": ...}, then one {speaker, text,
/// turn_id?} object per line. Blank lines are skipped; extra keys tolerated.
Conversation load_jsonl(const std::string& text, const std::string& path,
                        const TokenizerSpec& tok) {
    std::string id = fs::path(path).stem().string();
    std::vector<Turn> turns;
    std::istringstream in(text);
    std::string line;
    long long line_no = 0;
    int index = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const ojson j = parse_json(line, where);
        if (!j.is_object()) fail(where, "expected a JSON object");
        if (!saw_header && index == 0 && j.contains("conversation_id") && !j.contains("text")) {
            id = need_string(j, "conversation_id", where);
            saw_header = true;
            continue;
        }
        Turn t;
        t.index = index;
        t.speaker = need_string(j, "speaker", where);
        t.text = need_string(j, "text", where);
        t.turn_id = j.contains("turn_id") && j.at("turn_id").is_string()
                        ? j.at("turn_id").get<std::string>()
                        : "t" + std::to_string(index);
        turns.push_back(std::move(t));
        ++index;
    }
    return validated(path, id, std::move(turns), {}, tok);
}

const char* kind_name(AdapterKind kind) {
    switch (kind) {
        case AdapterKind::Canonical: return "canonical";
        case AdapterKind::LocomoLike: return "locomo-like";
        case AdapterKind::LoccoLike: return "locco-like";
        case AdapterKind::GenericJsonl: return "generic-jsonl";
        case AdapterKind::Synthetic: return "synthetic";
    }
    return "unknown";
}

long long option_int(const AdapterSpec& spec, const char* key, long long fallback) {
    const auto it = spec.options.find(key);
    if (it == spec.options.end()) return fallback;
    try {
        size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError(std::string("synthetic option '") + key + "' must be an integer, got '" +
                         it->second + "'");
    }
}

}  // namespace

AdapterKind detect_kind(const std::string& path) {
    if (fs::path(path).extension() == ".jsonl") {
        return AdapterKind::GenericJsonl;
    }
    const ojson j = parse_json(read_file(path), path);
    if (j.is_object()) {
        if (j.contains("conversation_id") && j.contains("turns")) return AdapterKind::Canonical;
        if (j.contains("sample_id") && j.contains("conversation")) return AdapterKind::LocomoLike;
        if (j.contains("dialogue")) return AdapterKind::LoccoLike;
    }
    throw InputError("cannot detect conversation format of " + path);
}

std::vector<Conversation> load(const AdapterSpec& spec, const TokenizerSpec& tok) {
    if (spec.kind == AdapterKind::Synthetic) {
        for (const auto& [key, value] : spec.options) {
            if (key != "n_turns" && key != "seed" && key != "profile") {
                throw InputError("synthetic adapter: unknown option '" + key + "'");
            }
        }
        const auto n_turns = option_int(spec, "n_turns", 200);
        const auto seed = option_int(spec, "seed", 0);
        SyntheticProfile profile = SyntheticProfile::QaHeavy;
        const auto it = spec.options.find("profile");
        if (it != spec.options.end()) {
            if (it->second == "topical-drift") {
                profile = SyntheticProfile::TopicalDrift;
            } else if (it->second == "qa-heavy") {
                profile = SyntheticProfile::QaHeavy;
            } else {
                throw InputError("synthetic option 'profile' must be 'topical-drift' or "
                                 "'qa-heavy', got '" +
                                 it->second + "'");
            }
        }
        return {synthesize(static_cast<int>(n_turns), static_cast<std::uint64_t>(seed), profile,
                           tok)};
    }

    if (!spec.options.empty()) {
        throw InputError(std::string(kind_name(spec.kind)) + " adapter takes no options, got '" +
                         spec.options.begin()->first + "'");
    }
    const std::string text = read_file(spec.path);
    switch (spec.kind) {
        case AdapterKind::Canonical:
            return {load_canonical(parse_json(text, spec.path), spec.path, tok)};
        case AdapterKind::LocomoLike:
            return {load_locomo(parse_json(text, spec.path), spec.path, tok)};
        case AdapterKind::LoccoLike:
            return {load_locco(parse_json(text, spec.path), spec.path, tok)};
        case AdapterKind::GenericJsonl:
            return {load_jsonl(text, spec.path, tok)};
        case AdapterKind::Synthetic:
            break;
    }
    throw InputError("unsupported adapter kind");
}

std::vector<Conversation> load_auto(const std::string& path, const TokenizerSpec& tok) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            const auto ext = entry.path().extension();
            if (ext == ".json" || ext == ".jsonl") files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
        std::vector<Conversation> out;
        for (const auto& file : files) {
            AdapterSpec spec;
            spec.kind = detect_kind(file);
            spec.path = file;
            auto loaded = load(spec, tok);
            for (auto& conv : loaded) out.push_back(std::move(conv));
        }
        if (out.empty()) {
            throw InputError("no conversations found in " + path);
        }
        return out;
    }
    if (!fs::is_regular_file(path, ec)) {
        throw InputError("no such file or directory: " + path);
    }
    AdapterSpec spec;
    spec.kind = detect_kind(path);
    spec.path = path;
    return load(spec, tok);
}

void save_canonical(const Conversation& conv, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write file: " + path);
    }
    out << dump_json(conversation_to_json(conv));
    if (!out) {
        throw InputError("write failed: " + path);
    }
}

namespace {

constexpr int kTopicCount = 6;
constexpr int kTopicWords = 14;
const char* const kTopicVocab[kTopicCount][kTopicWords] = {
    {"nebula", "galaxy", "orbit", "telescope", "comet", "quasar", "eclipse", "crater", "asteroid",
     "satellite", "spectrum", "parallax", "aurora", "zenith"},
    {"saffron", "risotto", "braise", "simmer", "skillet", "marinade", "zest", "caramel",
     "sourdough", "brine", "julienne", "glaze", "umami", "ganache"},
    {"ledger", "dividend", "equity", "portfolio", "hedge", "margin", "liquidity", "bond",
     "futures", "audit", "invoice", "arbitrage", "yield", "escrow"},
    {"compost", "seedling", "trellis", "mulch", "pruning", "pollinator", "perennial", "loam",
     "graft", "greenhouse", "irrigation", "blossom", "topsoil", "harvest"},
    {"itinerary", "passport", "harbor", "plateau", "monsoon", "hostel", "caravan", "lagoon",
     "summit", "ferry", "customs", "dialect", "souvenir", "transit"},
    {"gambit", "endgame", "rook", "bishop", "zugzwang", "tempo", "castling", "blunder",
     "checkmate", "opening", "sacrifice", "knight", "stalemate", "fianchetto"}};
// All connectors are stopwords, so they pad sentences without touching
// content-token scoring.
const char* const kConnectors[] = {"the", "and", "we", "then", "about", "with"};

std::string pad_turn_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%04d", index);
    return buf;
}

}  // namespace

Conversation synthesize(int n_turns, std::uint64_t seed, SyntheticProfile profile,
                        const TokenizerSpec& tok) {
    if (n_turns < 2) {
        throw InputError("synthesize: n_turns must be at least 2");
    }
    std::mt19937_64 rng(seed);
    const bool qa_heavy = profile == SyntheticProfile::QaHeavy;
    const int topic_run = qa_heavy ? 6 : 8;

    std::vector<Turn> turns;
    std::vector<QaPair> qa;
    std::vector<std::vector<std::string>> words_by_turn;
    turns.reserve(static_cast<size_t>(n_turns));

    const auto topic_word = [&](int topic) {
        return std::string(kTopicVocab[topic][uniform_int(rng, 0, kTopicWords - 1)]);
    };
    const auto sentence = [&](int topic, int content_words, std::vector<std::string>* collector) {
        std::string s;
        for (int w = 0; w < content_words; ++w) {
            if (!s.empty()) s += ' ';
            if (w > 0) {
                s += kConnectors[uniform_int(rng, 0, 5)];
                s += ' ';
            }
            const auto word = topic_word(topic);
            if (collector) collector->push_back(word);
            s += word;
        }
        s += '.';
        return s;
    };

    int plant_counter = 0;
    for (int i = 0; i < n_turns; ++i) {
        const int topic = (i / topic_run) % kTopicCount;
        const bool plant = qa_heavy && i % 10 == 5;
        std::vector<std::string> own_words;
        std::string text;

        const int sentences = plant ? 2 : static_cast<int>(uniform_int(rng, 1, 2));
        for (int sc = 0; sc < sentences; ++sc) {
            if (!text.empty()) text += ' ';
            text += sentence(topic, static_cast<int>(uniform_int(rng, 4, 6)), &own_words);
        }
        // Occasional callback to an earlier turn: seeds the forward-
        // dependency signal without extra bookkeeping downstream.
        if (i >= 4 && uniform_unit(rng) < 0.25) {
            const auto& earlier =
                words_by_turn[static_cast<size_t>(uniform_int(rng, 0, i - 1))];
            if (earlier.size() >= 2) {
                text += " we discussed " + earlier[0] + " and " + earlier[1] + " earlier.";
            }
        }
        if (plant) {
            ++plant_counter;
            std::string token = "zq";
            for (int h = 0; h < 6; ++h) {
                token += "0123456789abcdef"[uniform_int(rng, 0, 15)];
            }
            token += std::to_string(plant_counter);
            const std::string subject = topic_word(topic);
            text += " the " + subject + " code is " + token + ".";
            QaPair pair;
            pair.question = "what is the " + subject + " code?";
            pair.answer = token;
            pair.evidence_turn_ids = {pad_turn_id(i)};
            qa.push_back(std::move(pair));
        }

        Turn t;
        t.turn_id = pad_turn_id(i);
        t.index = i;
        t.speaker = i % 2 == 0 ? "user" : "assistant";
        t.text = std::move(text);
        turns.push_back(std::move(t));
        words_by_turn.push_back(std::move(own_words));
    }

    const std::string id = std::string("synthetic-") +
                           (qa_heavy ? "qa-heavy" : "topical-drift") + "-" +
                           std::to_string(n_turns) + "-s" + std::to_string(seed);
    return Conversation(id, std::move(turns), std::move(qa), tok);
}

}  // namespace ctxcomp
