#pragma once

#include "polar/agent.hpp"
#include "polar/memory_graph.hpp"
#include "polar/scenario.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polar {

struct EpisodeRow {
    std::string scenario_id;
    bool success = false;
    double path_length_m = 0.0;  // p_i
    double shortest_m = 0.0;     // l_i
    bool grounding_correct = false;
    bool category_match = false;
    std::string chosen_object_id;
    int steps = 0;
    int recall_semantic = 0;
    int recall_bm25 = 0;
    int recall_dense = 0;
    std::optional<std::string> failure_reason;

    friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

struct MetricsReport {
    std::string mode;
    std::string ablation;
    std::string kind;
    std::size_t k = 5;
    std::vector<EpisodeRow> rows;

    std::size_t n() const { return rows.size(); }
    double sr() const;
    double spl() const;
    double cm() const;
    double mean_path_length() const;
    double recall_semantic() const;
    double recall_bm25() const;
    double recall_dense() const;
};

// S * l / max(p, l); zero for failures and unreachable goals.
double spl_term(bool success, double p, double l);

// Inputs produced by the acquisition and memorization stages, keyed by
// scenario id.
struct EvalMemory {
    std::map<std::string, std::vector<EpisodeLog>> logs;
    std::map<std::string, MemoryGraph> graphs;
};

struct EvalOptions {
    RunConfig run;
    EncoderConfig encoder;
    std::size_t raw_sample = 15;
    // Keep only episodes where both the semantic and the dense raw
    // retriever hit.
    bool only_retrieval_hits = false;
    // Overrides the default planner (oracle, or token matching for raw mode).
    Planner* planner = nullptr;
};

// Seeded sample of min(n, available) logs that always contains every gold
// episode, returned in episode-id order.
std::vector<EpisodeLog> sample_raw_episodes(const ScenarioSpec& spec,
                                            const std::vector<EpisodeLog>& logs,
                                            std::size_t n,
                                            std::uint64_t seed);

// Builds the planner context for one specification under the given mode.
GroundingContext build_context(const ScenarioSpec& spec, const World& world,
                               const EvalMemory& memory, const EvalOptions& options);

MetricsReport evaluate(const std::vector<ScenarioSpec>& specs, const EvalMemory& memory,
                       const EvalOptions& options = {});

Json to_json(const MetricsReport& report);
MetricsReport report_from_json(const Json& j);
// Fixed-width table: mode, kind, SR, SPL, CM, recall@k (semantic/bm25/dense).
std::string render_table(const std::vector<MetricsReport>& reports);

// Writes metrics.json and table.txt under `dir`.
void report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir);
void report(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace polar
