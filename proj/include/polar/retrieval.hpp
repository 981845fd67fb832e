#pragma once

#include "polar/encoder.hpp"
#include "polar/episode.hpp"
#include "polar/memory_graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polar {

struct SemanticHit {
    std::string node_id;
    double score = 0.0;
    Timestamp timestamp = 0;  // newest eligible edge into the node
    std::vector<std::string> object_ids;

    friend bool operator==(const SemanticHit&, const SemanticHit&) = default;
};

struct CandidateStatement {
    std::string node_id;
    std::string text;
    double score = 0.0;
    Timestamp timestamp = 0;
    bool active = true;
    bool retrieved = false;  // among the hits that produced this candidate

    friend bool operator==(const CandidateStatement&, const CandidateStatement&) = default;
};

// Episodic context attached to a candidate. `record` is the structured
// memory; ablations may drop it and leave only `text`.
struct CandidateMemory {
    std::string episode_id;
    Timestamp timestamp = 0;
    std::string text;
    std::optional<EpisodicRecord> record;

    friend bool operator==(const CandidateMemory&, const CandidateMemory&) = default;
};

struct CandidateObject {
    std::string object_id;
    std::string category;
    std::vector<CandidateStatement> statements;
    std::vector<CandidateMemory> episodic_memories;  // newest first
    std::vector<std::string> instructions;

    friend bool operator==(const CandidateObject&, const CandidateObject&) = default;
};

struct RetrievalResult {
    std::string instruction;
    std::vector<SemanticHit> hits;
    std::vector<CandidateObject> candidates;

    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

struct RetrievalOptions {
    std::size_t k = 5;
    bool active_only = true;
    // Newer edges win score ties; off for the recency ablation.
    bool recency_tiebreak = true;
};

// Exact scan over semantic nodes ranked by (score desc, timestamp desc, id asc).
std::vector<SemanticHit> retrieve_semantic(const MemoryGraph& graph,
                                           const Embedding& query,
                                           const RetrievalOptions& options = {});
std::vector<SemanticHit> retrieve_semantic(const MemoryGraph& graph,
                                           const std::string& instruction,
                                           const EncoderConfig& encoder = {},
                                           const RetrievalOptions& options = {});

// Expands hits to their actively linked objects, merged per object in the
// order of each object's best hit. Statement scores are cosines to `query`.
std::vector<CandidateObject> assemble_candidates(const MemoryGraph& graph,
                                                 const std::vector<SemanticHit>& hits,
                                                 const Embedding& query);

// retrieve_semantic + assemble_candidates.
RetrievalResult retrieve(const MemoryGraph& graph,
                         const std::string& instruction,
                         const EncoderConfig& encoder = {},
                         const RetrievalOptions& options = {});

enum class RawMode { bm25, dense };

struct RawHit {
    std::string episode_id;
    double score = 0.0;

    friend bool operator==(const RawHit&, const RawHit&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Ranks whole episodes (instruction + flat trajectory) against the
// instruction. Ties break by episode id.
std::vector<RawHit> raw_retrieve(const std::vector<EpisodeLog>& episodes,
                                 const std::string& instruction,
                                 std::size_t k,
                                 RawMode mode,
                                 const EncoderConfig& encoder = {},
                                 const Bm25Params& bm25 = {});

// Okapi BM25 over whitespace-split lowercase tokens.
std::vector<double> bm25_scores(const std::vector<std::string>& documents,
                                const std::string& query,
                                const Bm25Params& params = {});

// Object-level recall: gold object among the candidates.
int recall_at_k(const RetrievalResult& result, const std::string& gold_object_id);
// Episode-level recall: every gold episode among the raw hits.
int recall_at_k(const std::vector<RawHit>& hits, const std::vector<std::string>& gold_episode_ids);

}  // namespace polar
