#include "polar/world.hpp"

#include "polar/encoder.hpp"
#include "polar/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <queue>
#include <set>

namespace polar {

namespace {

const std::vector<std::string> kRoomNames = {
    "kitchen", "bedroom", "bathroom", "living_room", "office", "dining_room",
    "laundry_room", "garage", "study", "nursery", "pantry",
};

}  // namespace

World::World(int width, int height, std::vector<int> labels, std::vector<std::string> room_ids,
             std::vector<ObjectInstance> objects)
    : width_(width), height_(height), labels_(std::move(labels)), room_ids_(std::move(room_ids)),
      objects_(std::move(objects)) {
    if (width_ <= 0 || height_ <= 0) throw RejectedInput("world dimensions must be positive");
    if (labels_.size() != static_cast<std::size_t>(width_) * height_) {
        throw RejectedInput("label grid does not match world dimensions");
    }
    const int n_rooms = static_cast<int>(room_ids_.size());
    std::vector<std::size_t> cells_per_room(room_ids_.size(), 0);
    for (int l : labels_) {
        if (l < -1 || l >= n_rooms) throw RejectedInput("cell label out of range");
        if (l >= 0) ++cells_per_room[static_cast<std::size_t>(l)];
    }
    for (std::size_t r = 0; r < cells_per_room.size(); ++r) {
        if (cells_per_room[r] == 0) throw RejectedInput("room '" + room_ids_[r] + "' has no free cell");
    }
    std::set<std::string> ids;
    for (const auto& o : objects_) {
        if (!ids.insert(o.object_id).second) throw RejectedInput("duplicate object id '" + o.object_id + "'");
        if (!is_free(o.position)) throw RejectedInput("object '" + o.object_id + "' is not on a free cell");
    }

    std::set<std::pair<std::string, std::string>> adj;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int a = label({x, y});
            if (a < 0) continue;
            for (Cell n : {Cell{x + 1, y}, Cell{x, y + 1}}) {
                const int b = label(n);
                if (b < 0 || b == a) continue;
                auto p = std::minmax(room_ids_[static_cast<std::size_t>(a)], room_ids_[static_cast<std::size_t>(b)]);
                adj.insert({p.first, p.second});
            }
        }
    }
    adjacency_.assign(adj.begin(), adj.end());
}

bool World::in_bounds(Vec2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x < width_m() && p.y < height_m();
}

Cell World::cell_of(Vec2 p) {
    return {static_cast<int>(std::floor(p.x / kCellSize)), static_cast<int>(std::floor(p.y / kCellSize))};
}

Vec2 World::cell_center(Cell c) {
    return {(c.x + 0.5) * kCellSize, (c.y + 0.5) * kCellSize};
}

std::optional<std::string> World::room_at(Vec2 p) const {
    if (!in_bounds(p)) return std::nullopt;
    const int l = label(cell_of(p));
    if (l < 0) return std::nullopt;
    return room_ids_[static_cast<std::size_t>(l)];
}

int World::room_index(const std::string& room_id) const {
    auto it = std::find(room_ids_.begin(), room_ids_.end(), room_id);
    if (it == room_ids_.end()) throw NotFound("no room '" + room_id + "'");
    return static_cast<int>(it - room_ids_.begin());
}

const ObjectInstance* World::find_object(const std::string& object_id) const {
    for (const auto& o : objects_) {
        if (o.object_id == object_id) return &o;
    }
    return nullptr;
}

std::vector<std::string> World::categories() const {
    std::set<std::string> cats;
    for (const auto& o : objects_) cats.insert(o.category);
    return {cats.begin(), cats.end()};
}

World World::with_object_positions(const std::map<std::string, Vec2>& positions) const {
    auto objects = objects_;
    for (const auto& [id, pos] : positions) {
        auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectInstance& o) { return o.object_id == id; });
        if (it == objects.end()) throw RejectedInput("no object '" + id + "' to move");
        it->position = pos;
    }
    return World(width_, height_, labels_, room_ids_, std::move(objects));
}

std::optional<VisibleObject> Observation::find(const std::string& object_id) const {
    std::optional<VisibleObject> best;
    for (const auto& v : views) {
        for (const auto& o : v.visible) {
            if (o.object_id == object_id && (!best || o.distance < best->distance)) best = o;
        }
    }
    return best;
}

std::vector<VisibleObject> Observation::all_visible() const {
    std::vector<VisibleObject> out;
    for (const auto& v : views) {
        for (const auto& o : v.visible) {
            auto it = std::find_if(out.begin(), out.end(), [&](const VisibleObject& x) { return x.object_id == o.object_id; });
            if (it == out.end()) out.push_back(o);
        }
    }
    std::sort(out.begin(), out.end(), [](const VisibleObject& a, const VisibleObject& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.object_id < b.object_id;
    });
    return out;
}

bool line_of_sight(const World& world, Vec2 from, Vec2 to) {
    // Amanatides-Woo traversal; when the ray passes exactly through a cell
    // corner both side cells must be free.
    Cell c = World::cell_of(from);
    const Cell end = World::cell_of(to);
    if (!world.is_free(c) || !world.is_free(end)) return false;
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    const double t_delta_x = step_x ? kCellSize / std::fabs(dx) : inf;
    const double t_delta_y = step_y ? kCellSize / std::fabs(dy) : inf;
    double t_max_x = inf;
    double t_max_y = inf;
    if (step_x > 0) t_max_x = ((c.x + 1) * kCellSize - from.x) / dx;
    if (step_x < 0) t_max_x = (c.x * kCellSize - from.x) / dx;
    if (step_y > 0) t_max_y = ((c.y + 1) * kCellSize - from.y) / dy;
    if (step_y < 0) t_max_y = (c.y * kCellSize - from.y) / dy;

    const int max_iter = world.width() + world.height() + 4;
    for (int i = 0; i < max_iter * 2 && !(c == end); ++i) {
        if (t_max_x < t_max_y) {
            if (t_max_x > 1.0) break;
            c.x += step_x;
            t_max_x += t_delta_x;
        } else if (t_max_y < t_max_x) {
            if (t_max_y > 1.0) break;
            c.y += step_y;
            t_max_y += t_delta_y;
        } else {
            if (t_max_x > 1.0) break;
            if (!world.is_free(Cell{c.x + step_x, c.y}) || !world.is_free(Cell{c.x, c.y + step_y})) return false;
            c.x += step_x;
            c.y += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        if (!world.is_free(c)) return false;
    }
    return true;
}

bool can_move_forward(const World& world, Vec2 from, int heading) {
    const Vec2 d = heading_direction(heading);
    const int samples = static_cast<int>(std::lround(kForwardStep / kCellSize));
    for (int i = 1; i <= samples; ++i) {
        const double t = kForwardStep * i / samples;
        if (!world.is_free(Vec2{from.x + d.x * t, from.y + d.y * t})) return false;
    }
    return true;
}

Observation observe(const World& world, const AgentState& state, bool blocked) {
    Observation obs;
    obs.blocked = blocked;
    const std::string room = world.room_at(state.position).value_or("");
    const std::array<int, 3> offsets = {0, -90, 90};
    for (std::size_t v = 0; v < 3; ++v) {
        obs.views[v].view_heading = normalize_heading(state.heading + offsets[v]);
        obs.views[v].room = room;
    }
    for (const auto& o : world.objects()) {
        const double d = distance(state.position, o.position);
        if (d > kVisibilityRange) continue;
        if (d > 1e-9 && !line_of_sight(world, state.position, o.position)) continue;
        const double bearing = bearing_deg(state.position, o.position);
        for (std::size_t v = 0; v < 3; ++v) {
            const bool in_cone = d <= 1e-9 ? v == 0 : angle_diff_deg(bearing, obs.views[v].view_heading) <= kViewHalfAngle;
            if (in_cone) obs.views[v].visible.push_back({o.object_id, o.category, d});
        }
    }
    for (auto& v : obs.views) {
        std::sort(v.visible.begin(), v.visible.end(), [](const VisibleObject& a, const VisibleObject& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            return a.object_id < b.object_id;
        });
    }
    return obs;
}

StepResult step(const World& world, const AgentState& state, ActionLow action) {
    StepResult r;
    r.state = state;
    r.state.steps_taken += 1;
    bool blocked = false;
    switch (action) {
        case ActionLow::move_forward:
            if (can_move_forward(world, state.position, state.heading)) {
                const Vec2 d = heading_direction(state.heading);
                r.state.position = {state.position.x + d.x * kForwardStep, state.position.y + d.y * kForwardStep};
            } else {
                blocked = true;
            }
            break;
        case ActionLow::turn_left:
            r.state.heading = normalize_heading(state.heading - kTurnStep);
            break;
        case ActionLow::turn_right:
            r.state.heading = normalize_heading(state.heading + kTurnStep);
            break;
        case ActionLow::stop:
            r.done = true;
            break;
    }
    r.observation = observe(world, r.state, blocked);
    return r;
}

DistanceField::DistanceField(const World& world, Cell goal)
    : width_(world.width()), height_(world.height()), goal_(goal),
      dist_(static_cast<std::size_t>(world.width()) * world.height(), kUnreachable) {
    if (!world.is_free(goal)) return;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist_[world.index(goal)] = 0.0;
    open.push({0.0, world.index(goal)});
    const double diag = kCellSize * std::sqrt(2.0);
    while (!open.empty()) {
        auto [d, idx] = open.top();
        open.pop();
        if (d > dist_[idx]) continue;
        const Cell c = world.cell_at(idx);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy) continue;
                const Cell n{c.x + dx, c.y + dy};
                if (!world.is_free(n)) continue;
                if (dx && dy && (!world.is_free(Cell{c.x + dx, c.y}) || !world.is_free(Cell{c.x, c.y + dy}))) continue;
                const double nd = d + (dx && dy ? diag : kCellSize);
                const std::size_t ni = world.index(n);
                if (nd < dist_[ni]) {
                    dist_[ni] = nd;
                    open.push({nd, ni});
                }
            }
        }
    }
}

double DistanceField::at(Cell c) const {
    if (c.x < 0 || c.y < 0 || c.x >= width_ || c.y >= height_) return kUnreachable;
    return dist_[static_cast<std::size_t>(c.y) * width_ + c.x];
}

Cell snap_to_free(const World& world, Vec2 p) {
    const Cell own = World::cell_of(p);
    if (world.is_free(own)) return own;
    std::optional<Cell> best;
    double best_d = kUnreachable;
    for (int y = 0; y < world.height(); ++y) {
        for (int x = 0; x < world.width(); ++x) {
            if (!world.is_free(Cell{x, y})) continue;
            const double d = distance(p, World::cell_center({x, y}));
            if (d < best_d) {
                best_d = d;
                best = Cell{x, y};
            }
        }
    }
    if (!best) throw RejectedInput("world has no free cell");
    return *best;
}

double shortest_path_length(const World& world, Vec2 from, Vec2 to) {
    if (!world.in_bounds(from) || !world.in_bounds(to)) throw RejectedInput("position outside world bounds");
    const Cell a = snap_to_free(world, from);
    const Cell b = snap_to_free(world, to);
    if (a == b) return 0.0;
    return DistanceField(world, b).at(a);
}

std::vector<std::string> SceneGraph::neighbors(const std::string& room) const {
    std::vector<std::string> out;
    for (const auto& [a, b] : edges) {
        if (a == room) out.push_back(b);
        if (b == room) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::map<std::string, int> SceneGraph::hop_distances(const std::string& from) const {
    std::map<std::string, int> dist;
    if (std::find(rooms.begin(), rooms.end(), from) == rooms.end()) return dist;
    std::deque<std::string> q{from};
    dist[from] = 0;
    while (!q.empty()) {
        const auto cur = q.front();
        q.pop_front();
        for (const auto& n : neighbors(cur)) {
            if (dist.count(n)) continue;
            dist[n] = dist[cur] + 1;
            q.push_back(n);
        }
    }
    return dist;
}

std::vector<std::string> SceneGraph::bfs_path(const std::string& from, const std::string& to) const {
    if (from == to) return {};
    std::map<std::string, std::string> parent;
    std::deque<std::string> q{from};
    parent[from] = from;
    while (!q.empty()) {
        const auto cur = q.front();
        q.pop_front();
        if (cur == to) break;
        for (const auto& n : neighbors(cur)) {
            if (parent.count(n)) continue;
            parent[n] = cur;
            q.push_back(n);
        }
    }
    if (!parent.count(to)) return {};
    std::vector<std::string> path;
    for (std::string cur = to; cur != from; cur = parent[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
}

bool SceneGraph::connected() const {
    if (rooms.empty()) return true;
    return hop_distances(rooms.front()).size() == rooms.size();
}

SceneGraph build_scene_graph(const World& world) {
    SceneGraph g;
    g.rooms = world.room_ids();
    std::sort(g.rooms.begin(), g.rooms.end());
    g.edges = world.adjacency();

    const auto n = world.room_ids().size();
    std::vector<double> sx(n, 0.0), sy(n, 0.0), count(n, 0.0);
    for (std::size_t i = 0; i < world.labels().size(); ++i) {
        const int l = world.labels()[i];
        if (l < 0) continue;
        const Vec2 c = World::cell_center(world.cell_at(i));
        sx[static_cast<std::size_t>(l)] += c.x;
        sy[static_cast<std::size_t>(l)] += c.y;
        count[static_cast<std::size_t>(l)] += 1.0;
    }
    std::vector<double> best_d(n, kUnreachable);
    std::vector<std::size_t> best_i(n, 0);
    for (std::size_t i = 0; i < world.labels().size(); ++i) {
        const int l = world.labels()[i];
        if (l < 0) continue;
        const auto r = static_cast<std::size_t>(l);
        const Vec2 centroid{sx[r] / count[r], sy[r] / count[r]};
        const double d = distance(centroid, World::cell_center(world.cell_at(i)));
        if (d < best_d[r]) {
            best_d[r] = d;
            best_i[r] = i;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        g.waypoints[world.room_ids()[r]] = World::cell_center(world.cell_at(best_i[r]));
    }
    return g;
}

Json to_json(const SceneGraph& graph) {
    Json rooms = Json::array();
    for (const auto& r : graph.rooms) {
        const Vec2 w = graph.waypoints.at(r);
        rooms.push_back({{"id", r}, {"waypoint", {w.x, w.y}}});
    }
    Json edges = Json::array();
    for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
    return {{"rooms", rooms}, {"edges", edges}};
}

std::vector<Cell> placement_cells(const World& world, const SceneGraph& scene,
                                  const WorldGenOptions& options,
                                  const std::optional<std::string>& room) {
    const int only = room ? world.room_index(*room) : -1;
    const int m = options.wall_margin_cells;
    std::vector<Cell> out;
    for (int y = 0; y < world.height(); ++y) {
        for (int x = 0; x < world.width(); ++x) {
            const int l = world.label({x, y});
            if (l < 0 || (only >= 0 && l != only)) continue;
            bool clear = true;
            for (int dy = -m; dy <= m && clear; ++dy) {
                for (int dx = -m; dx <= m && clear; ++dx) {
                    if (world.label({x + dx, y + dy}) != l) clear = false;
                }
            }
            if (!clear) continue;
            const Vec2 wp = scene.waypoints.at(world.room_ids()[static_cast<std::size_t>(l)]);
            if (distance(wp, World::cell_center({x, y})) > options.max_waypoint_offset) continue;
            out.push_back({x, y});
        }
    }
    return out;
}

std::vector<double> random_unit_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    double n = 0.0;
    do {
        for (auto& x : v) x = rng.uniform01() * 2.0 - 1.0;
        n = l2_norm(v);
    } while (n < 1e-6);
    for (auto& x : v) x /= n;
    return v;
}

World gen_world(std::uint64_t seed, int n_rooms,
                const std::vector<std::pair<std::string, int>>& objects_spec,
                const WorldGenOptions& options) {
    if (n_rooms < 2 || n_rooms > 12) throw RejectedInput("n_rooms must be in [2, 12]");
    Rng rng(seed);

    const int side_rooms = n_rooms - 1;
    const int n_top = (side_rooms + 1) / 2;
    const int n_bottom = side_rooms / 2;
    constexpr int kMinSide = 16;  // 4 m
    constexpr int kMaxSide = 32;  // 8 m
    constexpr int kHall = 8;      // 2 m
    constexpr int kDoor = 4;      // 1 m

    struct Rect {
        int x0, y0, w, h;
    };
    std::vector<int> top_w, top_h, bot_w, bot_h;
    for (int i = 0; i < n_top; ++i) {
        top_w.push_back(static_cast<int>(rng.uniform_int(kMinSide, kMaxSide)));
        top_h.push_back(static_cast<int>(rng.uniform_int(kMinSide, kMaxSide)));
    }
    for (int i = 0; i < n_bottom; ++i) {
        bot_w.push_back(static_cast<int>(rng.uniform_int(kMinSide, kMaxSide)));
        bot_h.push_back(static_cast<int>(rng.uniform_int(kMinSide, kMaxSide)));
    }
    auto span = [](const std::vector<int>& ws) {
        int s = 0;
        for (int w : ws) s += w;
        return ws.empty() ? 0 : s + static_cast<int>(ws.size()) - 1;
    };
    const int hall_w = std::max({span(top_w), span(bot_w), kMinSide});
    const int max_bot_h = bot_h.empty() ? 0 : *std::max_element(bot_h.begin(), bot_h.end());
    const int max_top_h = top_h.empty() ? 0 : *std::max_element(top_h.begin(), top_h.end());
    const int hall_y0 = max_bot_h > 0 ? max_bot_h + 2 : 1;
    const int top_y0 = hall_y0 + kHall + 1;
    const int width = hall_w + 2;
    const int height = top_y0 + max_top_h + 1;

    std::vector<std::string> names = kRoomNames;
    rng.shuffle(names);
    std::vector<std::string> room_ids = {"hallway"};
    std::vector<int> labels(static_cast<std::size_t>(width) * height, -1);
    auto set = [&](int x, int y, int l) { labels[static_cast<std::size_t>(y) * width + x] = l; };
    auto fill = [&](const Rect& r, int l) {
        for (int y = r.y0; y < r.y0 + r.h; ++y)
            for (int x = r.x0; x < r.x0 + r.w; ++x) set(x, y, l);
    };

    fill({1, hall_y0, hall_w, kHall}, 0);

    auto place_side = [&](const std::vector<int>& ws, const std::vector<int>& hs, bool top) {
        int x0 = 1;
        std::vector<Rect> rects;
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const int label = static_cast<int>(room_ids.size());
            room_ids.push_back(names[static_cast<std::size_t>(label - 1)]);
            const Rect r{x0, top ? top_y0 : hall_y0 - 1 - hs[i], ws[i], hs[i]};
            fill(r, label);
            // doorway to the hallway through the separating wall row
            const int d = static_cast<int>(rng.uniform_int(2, ws[i] - kDoor - 2));
            const int wall_y = top ? top_y0 - 1 : hall_y0 - 1;
            for (int x = x0 + d; x < x0 + d + kDoor; ++x) set(x, wall_y, label);
            // optional doorway to the previous room on the same side
            if (!rects.empty() && rng.coin(0.5)) {
                const Rect& prev = rects.back();
                const int overlap = std::min(prev.h, r.h);
                const int off = static_cast<int>(rng.uniform_int(2, overlap - kDoor - 2));
                const int wall_x = x0 - 1;
                for (int k = off; k < off + kDoor; ++k) {
                    const int y = top ? top_y0 + k : hall_y0 - 2 - k;
                    set(wall_x, y, label);
                }
            }
            rects.push_back(r);
            x0 += ws[i] + 1;
        }
    };
    place_side(top_w, top_h, true);
    place_side(bot_w, bot_h, false);

    World bare(width, height, labels, room_ids, {});
    const SceneGraph scene = build_scene_graph(bare);

    std::vector<Cell> cells = placement_cells(bare, scene, options);
    rng.shuffle(cells);

    std::vector<ObjectInstance> objects;
    std::size_t next_cell = 0;
    for (const auto& [category, count] : objects_spec) {
        if (count < 0) throw RejectedInput("negative object count");
        for (int i = 1; i <= count; ++i) {
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "_%02d", i);
            ObjectInstance o;
            o.object_id = category + suffix;
            o.category = category;
            bool placed = false;
            while (next_cell < cells.size()) {
                const Vec2 p = World::cell_center(cells[next_cell++]);
                const bool clear = std::all_of(objects.begin(), objects.end(), [&](const ObjectInstance& other) {
                    return distance(other.position, p) >= options.min_object_separation;
                });
                if (clear) {
                    o.position = p;
                    placed = true;
                    break;
                }
            }
            if (!placed) throw GenerationError("not enough free space for " + std::to_string(objects.size() + 1) + " objects");
            o.feature = random_unit_vector(rng, options.feature_dim);
            objects.push_back(std::move(o));
        }
    }
    return World(width, height, std::move(labels), std::move(room_ids), std::move(objects));
}

Json to_json(const World& world) {
    Json rows = Json::array();
    for (int y = 0; y < world.height(); ++y) {
        Json runs = Json::array();
        int cur = world.label({0, y});
        int len = 0;
        for (int x = 0; x < world.width(); ++x) {
            const int l = world.label({x, y});
            if (l == cur) {
                ++len;
            } else {
                runs.push_back({cur, len});
                cur = l;
                len = 1;
            }
        }
        runs.push_back({cur, len});
        rows.push_back(runs);
    }
    Json rooms = Json::array();
    for (std::size_t i = 0; i < world.room_ids().size(); ++i) rooms.push_back({{"index", i}, {"id", world.room_ids()[i]}});
    Json objects = Json::array();
    for (const auto& o : world.objects()) {
        objects.push_back({{"object_id", o.object_id},
                           {"category", o.category},
                           {"position", {o.position.x, o.position.y}},
                           {"feature", o.feature ? Json(*o.feature) : Json(nullptr)}});
    }
    return {{"format_version", 1},
            {"cell_size", kCellSize},
            {"width", world.width()},
            {"height", world.height()},
            {"rows", rows},
            {"rooms", rooms},
            {"objects", objects}};
}

World world_from_json(const Json& j) {
    try {
        if (j.at("format_version").get<int>() != 1) throw ParseError("unsupported world format_version");
        const int width = j.at("width").get<int>();
        const int height = j.at("height").get<int>();
        std::vector<int> labels;
        labels.reserve(static_cast<std::size_t>(width) * height);
        for (const auto& row : j.at("rows")) {
            int n = 0;
            for (const auto& run : row) {
                const int l = run.at(0).get<int>();
                const int len = run.at(1).get<int>();
                if (len <= 0) throw ParseError("non-positive run length");
                labels.insert(labels.end(), static_cast<std::size_t>(len), l);
                n += len;
            }
            if (n != width) throw ParseError("row length does not match width");
        }
        std::vector<std::string> rooms(j.at("rooms").size());
        for (const auto& r : j.at("rooms")) {
            const auto idx = r.at("index").get<std::size_t>();
            if (idx >= rooms.size()) throw ParseError("room index out of range");
            rooms[idx] = r.at("id").get<std::string>();
        }
        std::vector<ObjectInstance> objects;
        for (const auto& o : j.at("objects")) {
            ObjectInstance inst;
            inst.object_id = o.at("object_id").get<std::string>();
            inst.category = o.at("category").get<std::string>();
            inst.position = {o.at("position").at(0).get<double>(), o.at("position").at(1).get<double>()};
            if (!o.at("feature").is_null()) inst.feature = o.at("feature").get<std::vector<double>>();
            objects.push_back(std::move(inst));
        }
        return World(width, height, std::move(labels), std::move(rooms), std::move(objects));
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed world: ") + e.what());
    } catch (const RejectedInput& e) {
        throw ParseError(std::string("invalid world: ") + e.what());
    }
}

std::string render_map(const World& world, const std::optional<AgentState>& agent) {
    std::vector<std::string> rows(static_cast<std::size_t>(world.height()), std::string(static_cast<std::size_t>(world.width()), '#'));
    for (int y = 0; y < world.height(); ++y) {
        for (int x = 0; x < world.width(); ++x) {
            const int l = world.label({x, y});
            if (l < 0) continue;
            char ch = '.';
            for (Cell n : {Cell{x + 1, y}, Cell{x - 1, y}, Cell{x, y + 1}, Cell{x, y - 1}}) {
                const int o = world.label(n);
                if (o >= 0 && o != l) ch = '+';
            }
            rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = ch;
        }
    }
    for (const auto& o : world.objects()) {
        const Cell c = World::cell_of(o.position);
        rows[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] =
            static_cast<char>(std::toupper(static_cast<unsigned char>(o.category.empty() ? '?' : o.category[0])));
    }
    if (agent) {
        const Cell c = World::cell_of(agent->position);
        if (world.in_bounds(c)) rows[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] = '@';
    }
    std::string out;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        out += *it;
        out += '\n';
    }
    return out;
}

}  // namespace polar
