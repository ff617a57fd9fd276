#pragma once

#include <string>

#include <json.hpp>

#include "ctxcomp/engine.hpp"
#include "ctxcomp/model.hpp"

namespace ctxcomp {

/// All serialization uses insertion-ordered JSON so output is byte-stable.
using ojson = nlohmann::ordered_json;

/// Config document layout (also the CLI config file format):
///   {"scoring": {...}, "budget": {...}, "budget_orientation": "prose",
///    "thresholds": {...}, "objective": {...}, "seed": 0}
ojson config_to_json(const EngineConfig& cfg);

/// Parse a config document. Missing fields keep their defaults; unknown keys
/// are rejected so typos cannot silently fall back. Validates the result.
EngineConfig config_from_json(const ojson& j);

/// Canonical conversation file format. Turn token counts are derived, so
/// they are not written.
ojson conversation_to_json(const Conversation& conv);

/// Parse and validate a canonical conversation. Structural problems raise
/// InputError naming the offending record, e.g. "turns[3]: missing 'text'".
Conversation conversation_from_json(const ojson& j, const TokenizerSpec& spec = {});

ojson objective_to_json(const ObjectiveReport& report);
ojson memory_to_json(const MemoryState& state);
ojson context_to_json(const CompressedContext& context);

/// Step output. Wall time is deliberately not serialized: step JSON is
/// compared byte-for-byte in golden tests.
ojson step_to_json(const StepResult& result);

/// Replay output: per-step results (or recorded failures) plus the
/// aggregate, including per-step latencies.
ojson replay_to_json(const ReplayResult& result);

/// Copy with every key containing "latenc" or "wall_time" removed, at any
/// depth. Byte-identity checks of timed output compare stripped documents.
ojson strip_volatile(const ojson& j);

/// Pretty-print with 2-space indent and a trailing newline.
std::string dump_json(const ojson& j);

}  // namespace ctxcomp
