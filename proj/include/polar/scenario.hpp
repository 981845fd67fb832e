#pragma once

#include "polar/agent.hpp"
#include "polar/episode.hpp"
#include "polar/world.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace polar {

enum class ScenarioKind { compositional_single, compositional_joint, distractor, temporal_context, temporal_object };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);
const std::vector<ScenarioKind>& all_scenario_kinds();

// One prior interaction to execute during acquisition.
struct AcquisitionScript {
    std::string episode_id;
    std::string instruction;
    std::vector<Fact> facts;
    std::string target_object_id;
    Timestamp timestamp = 0;
    Vec2 object_position;
    AgentState agent_start;

    friend bool operator==(const AcquisitionScript&, const AcquisitionScript&) = default;
};

struct ScenarioSpec {
    std::string scenario_id;
    ScenarioKind kind = ScenarioKind::compositional_single;
    std::uint64_t world_seed = 0;
    int n_rooms = 5;
    std::vector<std::pair<std::string, int>> objects_spec;
    std::vector<AcquisitionScript> scripts;  // timestamp order
    std::string eval_instruction;
    std::string gold_object_id;
    std::vector<std::string> gold_episode_ids;
    std::map<std::string, Vec2> eval_positions;  // objects moved before evaluation
    AgentState eval_start;
    int filler_count = 12;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct ScenarioOptions {
    int n_rooms = 5;
    int filler_count = 12;
    int distractor_instances = 3;
    // Minimum start-to-gold distance at evaluation, meters.
    double min_start_distance = 3.0;
};

std::vector<ScenarioSpec> gen_scenarios(std::uint64_t seed, ScenarioKind kind, int n,
                                        const ScenarioOptions& options = {});

// World as seen during acquisition and during evaluation (objects moved).
World acquisition_world(const ScenarioSpec& spec);
World evaluation_world(const ScenarioSpec& spec);

// Runs every script with its target given explicitly.
std::vector<EpisodeLog> acquire(const ScenarioSpec& spec, Planner& planner, const RunConfig& config = {});

Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j);
std::string dump_scenarios(const std::vector<ScenarioSpec>& specs);
std::vector<ScenarioSpec> parse_scenarios(const std::string& text);

}  // namespace polar
