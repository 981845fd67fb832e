#pragma once

#include "polar/encoder.hpp"
#include "polar/episode.hpp"
#include "polar/retrieval.hpp"
#include "polar/world.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace polar {

enum class GroundingSource { polar, raw, none };

std::string_view to_string(GroundingSource source);

struct GroundingDecision {
    std::string chosen_object_id;  // empty for category-only grounding
    std::string chosen_category;
    std::optional<std::string> prior_room;
    std::string rationale;
    GroundingSource source = GroundingSource::none;

    friend bool operator==(const GroundingDecision&, const GroundingDecision&) = default;
};

Json to_json(const GroundingDecision& decision);

// What the planner sees besides the instruction. Exactly one of the polar
// candidates or the raw episodes is populated outside no-prior mode.
struct GroundingContext {
    GroundingSource source = GroundingSource::none;
    std::optional<RetrievalResult> retrieval;
    std::vector<EpisodeLog> raw_episodes;
    std::vector<std::string> world_categories;
};

// Rooms the agent has entered and rooms it has searched (reached the
// waypoint and looked around).
struct RoomProgress {
    std::set<std::string> visited;
    std::set<std::string> searched;
};

class Planner {
public:
    virtual ~Planner() = default;

    virtual GroundingDecision ground(const std::string& instruction,
                                     const GroundingContext& context,
                                     const SceneGraph& scene) = 0;

    // Next room to search, or nullopt when every room has been searched.
    virtual std::optional<std::string> choose_room(const SceneGraph& scene,
                                                   const GroundingDecision& decision,
                                                   const RoomProgress& progress,
                                                   const std::string& current_room);
};

struct ScoredCandidate {
    std::string object_id;
    std::string category;
    double score = 0.0;
    Timestamp latest = 0;
};

// Oracle scoring: summed statement cosines plus scores inherited from
// retrieved statements of other candidates that mention one of this
// candidate's fact values. Sorted best first (score, latest edge, id).
std::vector<ScoredCandidate> score_candidates(const RetrievalResult& retrieval);

// Room prior from a candidate's episodic context, newest memory first:
// the structured found room, else a "found_in=" field, else the last room
// token of a flat trajectory rendering.
std::optional<std::string> prior_room_from(const CandidateObject& candidate);

// Category mentioned in the instruction, else the most similar category name.
std::string ground_category(const std::string& instruction,
                            const std::vector<std::string>& categories,
                            const EncoderConfig& encoder = {});

class OraclePlanner : public Planner {
public:
    explicit OraclePlanner(EncoderConfig encoder = {}) : encoder_(std::move(encoder)) {}

    GroundingDecision ground(const std::string& instruction,
                             const GroundingContext& context,
                             const SceneGraph& scene) override;

private:
    EncoderConfig encoder_;
};

// Picks the raw episode with the largest lowercase token overlap.
class NaiveMatcher : public Planner {
public:
    explicit NaiveMatcher(EncoderConfig encoder = {}) : encoder_(std::move(encoder)) {}

    GroundingDecision ground(const std::string& instruction,
                             const GroundingContext& context,
                             const SceneGraph& scene) override;

private:
    EncoderConfig encoder_;
};

struct RemotePlannerConfig {
    std::string endpoint;  // base URL; requests go to <endpoint>/ground and <endpoint>/choose_room
    std::chrono::milliseconds timeout{10000};
};

// Delegates both decisions to an HTTP service. Any transport failure,
// non-200 status or malformed body raises PlannerUnavailable.
class RemotePlanner : public Planner {
public:
    explicit RemotePlanner(RemotePlannerConfig config);

    GroundingDecision ground(const std::string& instruction,
                             const GroundingContext& context,
                             const SceneGraph& scene) override;
    std::optional<std::string> choose_room(const SceneGraph& scene,
                                           const GroundingDecision& decision,
                                           const RoomProgress& progress,
                                           const std::string& current_room) override;

private:
    Json call(const std::string& path, const Json& body) const;

    RemotePlannerConfig config_;
};

Json to_json(const CandidateObject& candidate);

// Room sequence after `current_room` leading to the room to search next:
// the prior room until it has been searched; else the nearest room not yet
// visited; else the nearest room entered but not searched. Nearest means
// fewest hops, then the closer waypoint, then room id. The current room
// itself is returned as {current_room}; nullopt once every room is searched.
std::optional<std::vector<std::string>> plan_high(const SceneGraph& scene,
                                                  const GroundingDecision& decision,
                                                  const RoomProgress& progress,
                                                  const std::string& current_room);

// Minimal turn from one heading toward another; an exact reversal turns right.
// STOP when the headings already match.
ActionLow turn_toward(int heading, int required);

// Distance fields keyed by goal cell, reused across the steps of an episode.
class FieldCache {
public:
    explicit FieldCache(const World& world) : world_(&world) {}
    const DistanceField& get(Cell goal);

private:
    const World* world_;
    std::map<std::pair<int, int>, std::unique_ptr<DistanceField>> fields_;
};

// One step toward `goal`. Looks ahead over short sequences of valid 1 m
// moves (3 deep, up to 5 when nothing closer is found) and commits to the
// first move of the sequence that ends closest to the goal along the grid
// geodesic, turning first when needed; ties favor fewer turns. When no
// sequence gets closer, face the goal.
ActionLow navigate(const World& world, const AgentState& state, Vec2 goal, FieldCache& fields);

// Low-level policy: STOP once the target is visible within the success
// radius, head for it when it is visible further away, else head for the
// waypoint; a blocked move is answered by one right turn.
ActionLow plan_low(const World& world,
                   const AgentState& state,
                   const Observation& observation,
                   Vec2 waypoint,
                   const std::string& target_object_id,
                   double success_radius,
                   FieldCache& fields);

enum class RunMode { no_prior, raw_interaction, polar };
enum class Ablation { full_episodic, instruction_only, raw_trajectory, summary_text };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);
std::string_view to_string(Ablation ablation);
Ablation ablation_from_string(std::string_view name);

struct RunConfig {
    int max_steps = 700;
    double success_radius_m = 2.0;
    std::size_t k = 5;
    RunMode mode = RunMode::polar;
    Ablation ablation = Ablation::full_episodic;
    std::uint64_t seed = 0;
    // Distance from the final waypoint at which a room counts as reached.
    double waypoint_radius_m = 1.0;
    int look_around_turns = 3;

    void validate() const;
};

struct EpisodeRequest {
    std::string episode_id;
    Timestamp timestamp = 0;
    std::string instruction;
    std::vector<Fact> facts;
    std::optional<std::vector<double>> reference_feature;
    std::string gold_object_id;
    AgentState start;
    // Acquisition runs skip grounding and go straight for this decision.
    std::optional<GroundingDecision> explicit_decision;
};

struct EpisodeOutcome {
    EpisodeLog log;
    GroundingDecision decision;
    std::string final_target;  // instance the agent committed to, if any
    double path_length_m = 0.0;
    int steps = 0;
};

EpisodeOutcome run_episode(const World& world,
                           const SceneGraph& scene,
                           const EpisodeRequest& request,
                           const GroundingContext& context,
                           Planner& planner,
                           const RunConfig& config);

}  // namespace polar
