#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctxcomp/model.hpp"

namespace ctxcomp {

enum class AdapterKind { Canonical, LocomoLike, LoccoLike, GenericJsonl, Synthetic };

/// Source description for load(). Options are kind-specific (the synthetic
/// kind takes n_turns, seed, profile); unknown keys are rejected.
struct AdapterSpec {
    AdapterKind kind = AdapterKind::Canonical;
    std::string path;
    std::map<std::string, std::string> options;
};

/**
 * Sniff the format of a conversation file.
 *   - *.jsonl                               -> GenericJsonl
 *   - {"conversation_id", "turns"}          -> Canonical
 *   - {"sample_id", "conversation"}         -> LocomoLike (session_N maps)
 *   - {"conversation_id"?, "dialogue"}      -> LoccoLike (role/content turns)
 * Anything else raises InputError.
 */
AdapterKind detect_kind(const std::string& path);

/// Load conversations per the spec. Structural problems raise InputError
/// naming the file and record; malformed JSON raises ParseError with the
/// byte offset. Loaded conversations always pass full model validation.
std::vector<Conversation> load(const AdapterSpec& spec, const TokenizerSpec& tok = {});

/// Detect-and-load for a file, or every *.json / *.jsonl file of a directory
/// in sorted path order. An input yielding no conversations raises InputError.
std::vector<Conversation> load_auto(const std::string& path, const TokenizerSpec& tok = {});

/// Write the canonical JSON form (pretty-printed, trailing newline).
void save_canonical(const Conversation& conv, const std::string& path);

enum class SyntheticProfile { TopicalDrift, QaHeavy };

/**
 * Deterministic synthetic conversation: rotating topic vocabularies,
 * controlled forward references, speakers alternating user/assistant. The
 * qa-heavy profile plants one fact turn per ten turns whose unique answer
 * token appears nowhere else, and records a QA pair pointing at it; the
 * topical-drift profile ships no QA pairs. Identical (n_turns, seed,
 * profile) always yields an identical conversation.
 */
Conversation synthesize(int n_turns, std::uint64_t seed, SyntheticProfile profile,
                        const TokenizerSpec& tok = {});

}  // namespace ctxcomp
