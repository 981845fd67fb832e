#pragma once

#include "polar/io.hpp"
#include "polar/rng.hpp"
#include "polar/types.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polar {

inline constexpr double kVisibilityRange = 5.0;
inline constexpr double kViewHalfAngle = 45.0;
inline constexpr double kForwardStep = 1.0;
inline constexpr int kTurnStep = 30;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct ObjectInstance {
    std::string object_id;
    std::string category;
    Vec2 position;
    std::optional<std::vector<double>> feature;

    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

// Occupancy grid at kCellSize resolution. Cell (x, y) covers
// [x, x+1) * kCellSize by [y, y+1) * kCellSize. Free cells carry a room index;
// walls carry -1. Immutable after construction.
class World {
public:
    World(int width, int height, std::vector<int> labels, std::vector<std::string> room_ids,
          std::vector<ObjectInstance> objects);

    int width() const { return width_; }
    int height() const { return height_; }
    double width_m() const { return width_ * kCellSize; }
    double height_m() const { return height_ * kCellSize; }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    bool in_bounds(Vec2 p) const;
    bool is_free(Cell c) const { return in_bounds(c) && labels_[index(c)] >= 0; }
    bool is_free(Vec2 p) const { return in_bounds(p) && is_free(cell_of(p)); }

    static Cell cell_of(Vec2 p);
    static Vec2 cell_center(Cell c);

    int label(Cell c) const { return in_bounds(c) ? labels_[index(c)] : -1; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::string>& room_ids() const { return room_ids_; }
    std::optional<std::string> room_at(Vec2 p) const;
    int room_index(const std::string& room_id) const;

    // Pairs of room ids (a < b) whose free cells touch through a doorway.
    const std::vector<std::pair<std::string, std::string>>& adjacency() const { return adjacency_; }

    const std::vector<ObjectInstance>& objects() const { return objects_; }
    const ObjectInstance* find_object(const std::string& object_id) const;
    std::vector<std::string> categories() const;

    // Copy with the given objects moved; unknown ids are rejected.
    World with_object_positions(const std::map<std::string, Vec2>& positions) const;

    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
    Cell cell_at(std::size_t idx) const { return {static_cast<int>(idx % width_), static_cast<int>(idx / width_)}; }

    friend bool operator==(const World&, const World&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<int> labels_;
    std::vector<std::string> room_ids_;
    std::vector<ObjectInstance> objects_;
    std::vector<std::pair<std::string, std::string>> adjacency_;
};

struct AgentState {
    Vec2 position;
    int heading = 0;
    int steps_taken = 0;

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct VisibleObject {
    std::string object_id;
    std::string category;
    double distance = 0.0;

    friend bool operator==(const VisibleObject&, const VisibleObject&) = default;
};

struct View {
    int view_heading = 0;
    std::vector<VisibleObject> visible;  // nearest first
    std::string room;

    friend bool operator==(const View&, const View&) = default;
};

struct Observation {
    std::array<View, 3> views;  // front, left, right
    bool blocked = false;

    const View& front() const { return views[0]; }
    const View& left() const { return views[1]; }
    const View& right() const { return views[2]; }

    // Nearest sighting of an object across the three views.
    std::optional<VisibleObject> find(const std::string& object_id) const;
    std::vector<VisibleObject> all_visible() const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepResult {
    AgentState state;
    Observation observation;
    bool done = false;
};

// True when the straight segment crosses no wall cell.
bool line_of_sight(const World& world, Vec2 from, Vec2 to);

// True when every kCellSize sample along the 1 m move lies in free space.
bool can_move_forward(const World& world, Vec2 from, int heading);

Observation observe(const World& world, const AgentState& state, bool blocked = false);
StepResult step(const World& world, const AgentState& state, ActionLow action);

// Geodesic distance from every free cell to a goal cell over the 8-connected
// grid (no corner cutting), steps cost kCellSize or kCellSize*sqrt(2).
class DistanceField {
public:
    DistanceField(const World& world, Cell goal);

    double at(Cell c) const;
    double at(Vec2 p) const { return at(World::cell_of(p)); }
    Cell goal() const { return goal_; }

private:
    int width_ = 0;
    int height_ = 0;
    Cell goal_;
    std::vector<double> dist_;
};

// Nearest free cell to p (p's own cell when free).
Cell snap_to_free(const World& world, Vec2 p);

// Grid geodesic between two positions; kUnreachable when disconnected.
// Throws RejectedInput for positions outside the world bounds.
double shortest_path_length(const World& world, Vec2 from, Vec2 to);

struct SceneGraph {
    std::vector<std::string> rooms;  // sorted
    std::vector<std::pair<std::string, std::string>> edges;
    std::map<std::string, Vec2> waypoints;

    std::vector<std::string> neighbors(const std::string& room) const;
    std::map<std::string, int> hop_distances(const std::string& from) const;
    // Rooms after `from` on a breadth-first path to `to`; empty when from == to
    // or unreachable.
    std::vector<std::string> bfs_path(const std::string& from, const std::string& to) const;
    bool connected() const;
};

SceneGraph build_scene_graph(const World& world);

Json to_json(const SceneGraph& graph);

struct WorldGenOptions {
    std::size_t feature_dim = 32;
    double min_object_separation = 1.0;
    double max_waypoint_offset = 4.0;  // objects stay within view of the room waypoint
    int wall_margin_cells = 2;
};

// Free cells suitable for an object or an agent start: at least
// `wall_margin_cells` from any wall and within max_waypoint_offset of the
// room waypoint. Restricted to one room when `room` is given.
std::vector<Cell> placement_cells(const World& world, const SceneGraph& scene,
                                  const WorldGenOptions& options,
                                  const std::optional<std::string>& room = std::nullopt);

std::vector<double> random_unit_vector(Rng& rng, std::size_t dim);

// Seeded house: a hallway spine with side rooms (4-8 m sides) above and
// below, 1 m doorways, objects on free cells at least 1 m apart.
World gen_world(std::uint64_t seed, int n_rooms,
                const std::vector<std::pair<std::string, int>>& objects_spec,
                const WorldGenOptions& options = {});

Json to_json(const World& world);
World world_from_json(const Json& j);

// Top-down text map: '#' wall, '.' free, '+' doorway, letters for objects,
// '@' for the agent.
std::string render_map(const World& world, const std::optional<AgentState>& agent = std::nullopt);

}  // namespace polar
