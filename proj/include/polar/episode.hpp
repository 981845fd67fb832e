#pragma once

#include "polar/io.hpp"
#include "polar/memory_graph.hpp"
#include "polar/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polar {

struct Fact {
    std::string key;
    std::string value;

    friend bool operator==(const Fact&, const Fact&) = default;
};

// Pose the action was taken from, the action, and what was seen there.
struct TrajectoryStep {
    Vec2 position;
    int heading = 0;
    ActionLow action = ActionLow::stop;
    std::string room;
    std::vector<std::string> visible_object_ids;

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

// One finished user-agent interaction.
struct EpisodeLog {
    std::string episode_id;
    Timestamp timestamp = 0;
    std::string instruction;
    std::vector<Fact> facts;
    std::optional<std::vector<double>> reference_feature;
    std::string target_object_id;
    std::string target_category;
    std::vector<TrajectoryStep> trajectory;
    bool success = false;
    Vec2 final_position;
    // Set when the episode was cut short by an unavailable planner.
    std::optional<std::string> failure_reason;

    // Non-empty trajectory and valid headings. Throws RejectedInput.
    void validate() const;

    friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

Json to_json(const EpisodeLog& log);
EpisodeLog episode_from_json(const Json& j);

std::string dump_episodes(const std::vector<EpisodeLog>& logs);
std::vector<EpisodeLog> parse_episodes(const std::string& text);

// Room and action names in trajectory order, e.g. "kitchen MOVE_FORWARD
// kitchen TURN_LEFT hallway MOVE_FORWARD".
std::string render_trajectory(const EpisodeLog& log);

// Instruction followed by the flat trajectory rendering; the document the
// raw-episode retrievers index.
std::string raw_document(const EpisodeLog& log);

// Number of forward actions that actually changed the position.
std::size_t effective_forward_moves(const EpisodeLog& log);

}  // namespace polar
