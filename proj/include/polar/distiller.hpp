#pragma once

#include "polar/encoder.hpp"
#include "polar/episode.hpp"
#include "polar/memory_graph.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace polar {

struct SemanticStatement {
    std::string object_id;
    std::string text;
    std::string source_fact_key;
    std::optional<std::string> supersedes_key;

    friend bool operator==(const SemanticStatement&, const SemanticStatement&) = default;
};

using EpisodicSummary = EpisodicRecord;

enum class DistillerMode { builtin, remote };

struct DistillerConfig {
    DistillerMode mode = DistillerMode::builtin;
    std::string endpoint;
    std::chrono::milliseconds timeout{5000};
};

// "user: <key> = <value> refers to <category> <object id>"
std::string render_statement(const Fact& fact, const std::string& category, const std::string& object_id);

// Inverse of render_statement; nullopt for text not in that shape.
std::optional<Fact> parse_statement(const std::string& text);

// One statement per fact, in fact order. Remote mode posts
// {"instruction", "trajectory_text"} and expects
// {"statements": [{"text", "fact_key"}], "summary_text"}.
std::vector<SemanticStatement> distill_semantic(const EpisodeLog& episode,
                                                const DistillerConfig& config = {});

EpisodicSummary summarize_episodic(const EpisodeLog& episode);

struct MutationReport {
    std::size_t nodes_created = 0;
    std::size_t edges_created = 0;
    std::size_t supersessions = 0;
    std::string object_node;

    friend bool operator==(const MutationReport&, const MutationReport&) = default;
};

// Writes one episode into the graph: object upsert, semantic statements with
// dedup and fact-key supersession, then one episodic node. Every edge is
// stamped with the episode timestamp.
MutationReport memorize(const EpisodeLog& episode,
                        MemoryGraph& graph,
                        const EncoderConfig& encoder = {},
                        const DistillerConfig& distiller = {});

}  // namespace polar
