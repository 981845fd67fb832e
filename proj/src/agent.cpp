#include "polar/agent.hpp"

#include "polar/distiller.hpp"
#include "polar/error.hpp"
#include "polar/http.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace polar {

namespace {

constexpr double kScoreEps = 1e-9;
constexpr int kMinLookahead = 3;
constexpr int kMaxLookahead = 5;

std::set<std::string> token_set(std::string_view text) {
    auto toks = word_tokens(text);
    return {toks.begin(), toks.end()};
}

bool is_action_name(const std::string& token) {
    return token == "MOVE_FORWARD" || token == "TURN_LEFT" || token == "TURN_RIGHT" || token == "STOP";
}

GroundingDecision category_only(const std::string& instruction, const GroundingContext& context,
                                const EncoderConfig& encoder) {
    GroundingDecision d;
    d.chosen_category = ground_category(instruction, context.world_categories, encoder);
    d.rationale = "category-only grounding: " + d.chosen_category;
    d.source = GroundingSource::none;
    return d;
}

GroundingDecision match_raw(const std::string& instruction, const GroundingContext& context) {
    if (context.raw_episodes.empty()) throw GroundingFailed("no raw episodes to ground against");
    const auto query = token_set(instruction);
    const EpisodeLog* best = nullptr;
    std::size_t best_overlap = 0;
    for (const auto& e : context.raw_episodes) {
        const auto doc = token_set(raw_document(e));
        std::size_t overlap = 0;
        for (const auto& t : query) overlap += doc.count(t);
        if (!best || overlap > best_overlap || (overlap == best_overlap && e.episode_id < best->episode_id)) {
            best = &e;
            best_overlap = overlap;
        }
    }
    GroundingDecision d;
    d.chosen_object_id = best->target_object_id;
    d.chosen_category = best->target_category;
    if (best->success && !best->trajectory.empty()) d.prior_room = best->trajectory.back().room;
    d.rationale = "episode " + best->episode_id + " shares " + std::to_string(best_overlap) + " tokens";
    d.source = GroundingSource::raw;
    return d;
}

}  // namespace

std::string_view to_string(GroundingSource source) {
    switch (source) {
        case GroundingSource::polar: return "polar";
        case GroundingSource::raw: return "raw";
        case GroundingSource::none: return "none";
    }
    return "none";
}

Json to_json(const GroundingDecision& d) {
    return {{"chosen_object_id", d.chosen_object_id},
            {"chosen_category", d.chosen_category},
            {"prior_room", d.prior_room ? Json(*d.prior_room) : Json(nullptr)},
            {"rationale", d.rationale},
            {"source", std::string(to_string(d.source))}};
}

Json to_json(const CandidateObject& c) {
    Json statements = Json::array();
    for (const auto& s : c.statements) {
        statements.push_back({{"node_id", s.node_id},
                              {"text", s.text},
                              {"score", s.score},
                              {"timestamp", s.timestamp},
                              {"retrieved", s.retrieved}});
    }
    Json memories = Json::array();
    for (const auto& m : c.episodic_memories) {
        Json row = {{"episode_id", m.episode_id}, {"timestamp", m.timestamp}, {"text", m.text}};
        if (m.record) {
            row["success"] = m.record->success;
            row["room_sequence"] = m.record->room_sequence;
            row["unpromising_rooms"] = m.record->unpromising_rooms;
            row["found_room"] = m.record->found_room ? Json(*m.record->found_room) : Json(nullptr);
            row["path_length_m"] = m.record->path_length_m;
        }
        memories.push_back(std::move(row));
    }
    return {{"object_id", c.object_id},
            {"category", c.category},
            {"statements", statements},
            {"episodic_memories", memories},
            {"instructions", c.instructions}};
}

std::optional<std::string> Planner::choose_room(const SceneGraph& scene,
                                                const GroundingDecision& decision,
                                                const RoomProgress& progress,
                                                const std::string& current_room) {
    auto path = plan_high(scene, decision, progress, current_room);
    if (!path || path->empty()) return std::nullopt;
    return path->back();
}

std::vector<ScoredCandidate> score_candidates(const RetrievalResult& retrieval) {
    std::map<std::string, std::string> statement_text;
    for (const auto& c : retrieval.candidates) {
        for (const auto& s : c.statements) statement_text.emplace(s.node_id, s.text);
    }

    std::vector<ScoredCandidate> out;
    for (const auto& c : retrieval.candidates) {
        ScoredCandidate sc{c.object_id, c.category, 0.0, 0};
        std::set<std::string> values;
        for (const auto& s : c.statements) {
            if (!s.active) continue;
            sc.score += s.score;
            sc.latest = std::max(sc.latest, s.timestamp);
            if (auto fact = parse_statement(s.text)) {
                for (auto& t : word_tokens(fact->value)) values.insert(std::move(t));
            }
        }
        for (const auto& hit : retrieval.hits) {
            if (std::binary_search(hit.object_ids.begin(), hit.object_ids.end(), c.object_id)) continue;
            auto it = statement_text.find(hit.node_id);
            if (it == statement_text.end()) continue;
            const auto toks = token_set(it->second);
            const bool shares = std::any_of(values.begin(), values.end(), [&](const std::string& v) { return toks.count(v) > 0; });
            if (shares) sc.score += hit.score;
        }
        out.push_back(std::move(sc));
    }
    std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (std::fabs(a.score - b.score) > kScoreEps) return a.score > b.score;
        if (a.latest != b.latest) return a.latest > b.latest;
        return a.object_id < b.object_id;
    });
    return out;
}

std::optional<std::string> prior_room_from(const CandidateObject& candidate) {
    for (const auto& m : candidate.episodic_memories) {
        if (m.record) {
            if (m.record->success && m.record->found_room) return m.record->found_room;
            continue;
        }
        const auto pos = m.text.find("found_in=");
        if (pos != std::string::npos) {
            const auto start = pos + 9;
            const auto end = m.text.find(';', start);
            const std::string room = m.text.substr(start, end == std::string::npos ? std::string::npos : end - start);
            if (!room.empty() && room != "none") return room;
            continue;
        }
        std::istringstream in(m.text);
        std::vector<std::string> toks;
        for (std::string t; in >> t;) toks.push_back(t);
        for (auto it = toks.rbegin(); it != toks.rend(); ++it) {
            if (!is_action_name(*it)) return *it;
        }
    }
    return std::nullopt;
}

std::string ground_category(const std::string& instruction,
                            const std::vector<std::string>& categories,
                            const EncoderConfig& encoder) {
    if (categories.empty()) throw GroundingFailed("no categories to ground against");
    const auto toks = word_tokens(instruction);
    std::optional<std::string> best;
    std::size_t best_pos = std::numeric_limits<std::size_t>::max();
    for (const auto& c : categories) {
        const auto ctoks = word_tokens(c);
        if (ctoks.empty() || ctoks.size() > toks.size()) continue;
        for (std::size_t i = 0; i + ctoks.size() <= toks.size(); ++i) {
            if (!std::equal(ctoks.begin(), ctoks.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) continue;
            if (i < best_pos || (i == best_pos && c.size() > best->size())) {
                best = c;
                best_pos = i;
            }
            break;
        }
    }
    if (best) return *best;

    const Embedding q = encode(encoder, instruction);
    double best_score = -2.0;
    for (const auto& c : categories) {
        const double s = cosine(q, encode(encoder, c));
        if (s > best_score + kScoreEps || (std::fabs(s - best_score) <= kScoreEps && c < *best)) {
            best = c;
            best_score = s;
        }
    }
    return *best;
}

GroundingDecision OraclePlanner::ground(const std::string& instruction,
                                        const GroundingContext& context,
                                        const SceneGraph&) {
    switch (context.source) {
        case GroundingSource::none:
            return category_only(instruction, context, encoder_);
        case GroundingSource::raw:
            return match_raw(instruction, context);
        case GroundingSource::polar:
            break;
    }
    if (!context.retrieval || context.retrieval->candidates.empty()) {
        throw GroundingFailed("no retrieved candidates for: " + instruction);
    }
    const auto scored = score_candidates(*context.retrieval);
    const auto& top = scored.front();
    const auto it = std::find_if(context.retrieval->candidates.begin(), context.retrieval->candidates.end(),
                                 [&](const CandidateObject& c) { return c.object_id == top.object_id; });
    GroundingDecision d;
    d.chosen_object_id = top.object_id;
    d.chosen_category = top.category;
    d.prior_room = prior_room_from(*it);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "score %.4f, latest edge t=%lld", top.score, static_cast<long long>(top.latest));
    d.rationale = buf;
    d.source = GroundingSource::polar;
    return d;
}

GroundingDecision NaiveMatcher::ground(const std::string& instruction,
                                       const GroundingContext& context,
                                       const SceneGraph&) {
    switch (context.source) {
        case GroundingSource::none:
            return category_only(instruction, context, encoder_);
        case GroundingSource::raw:
            return match_raw(instruction, context);
        case GroundingSource::polar:
            break;
    }
    throw GroundingFailed("token-overlap matching needs raw episodes");
}

RemotePlanner::RemotePlanner(RemotePlannerConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigurationError("remote planner requires an endpoint");
}

Json RemotePlanner::call(const std::string& path, const Json& body) const {
    const auto resp = post_json(config_.endpoint + path, body.dump(), config_.timeout);
    if (!resp) throw PlannerUnavailable("planner unreachable at " + config_.endpoint + path);
    if (resp->status != 200) throw PlannerUnavailable("planner returned HTTP " + std::to_string(resp->status));
    Json j = Json::parse(resp->body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw PlannerUnavailable("planner returned malformed JSON");
    return j;
}

GroundingDecision RemotePlanner::ground(const std::string& instruction,
                                        const GroundingContext& context,
                                        const SceneGraph& scene) {
    Json candidates = Json::array();
    if (context.retrieval) {
        for (const auto& c : context.retrieval->candidates) candidates.push_back(to_json(c));
    }
    const Json resp = call("/ground", {{"instruction", instruction}, {"candidates", candidates}, {"scene_graph", to_json(scene)}});

    const auto oid = resp.find("object_id");
    if (oid == resp.end() || !oid->is_string()) throw PlannerUnavailable("planner response lacks object_id");
    GroundingDecision d;
    d.chosen_object_id = oid->get<std::string>();
    const auto prior = resp.find("prior_room");
    if (prior != resp.end() && !prior->is_null()) {
        if (!prior->is_string()) throw PlannerUnavailable("planner prior_room is not a string");
        const auto room = prior->get<std::string>();
        if (!scene.waypoints.count(room)) throw PlannerUnavailable("planner named unknown room '" + room + "'");
        d.prior_room = room;
    }
    const auto rationale = resp.find("rationale");
    if (rationale != resp.end() && rationale->is_string()) d.rationale = rationale->get<std::string>();
    if (context.retrieval) {
        for (const auto& c : context.retrieval->candidates) {
            if (c.object_id == d.chosen_object_id) d.chosen_category = c.category;
        }
    }
    if (d.chosen_category.empty() && !context.world_categories.empty()) {
        d.chosen_category = ground_category(instruction, context.world_categories);
    }
    d.source = context.source;
    return d;
}

std::optional<std::string> RemotePlanner::choose_room(const SceneGraph& scene,
                                                      const GroundingDecision& decision,
                                                      const RoomProgress& progress,
                                                      const std::string& current_room) {
    const Json resp = call("/choose_room", {{"scene_graph", to_json(scene)},
                                            {"decision", to_json(decision)},
                                            {"visited", Json(std::vector<std::string>(progress.visited.begin(), progress.visited.end()))},
                                            {"searched", Json(std::vector<std::string>(progress.searched.begin(), progress.searched.end()))},
                                            {"current_room", current_room}});
    const auto room = resp.find("room");
    if (room == resp.end()) throw PlannerUnavailable("planner response lacks room");
    if (room->is_null()) return std::nullopt;
    if (!room->is_string() || !scene.waypoints.count(room->get<std::string>())) {
        throw PlannerUnavailable("planner chose an unknown room");
    }
    return room->get<std::string>();
}

std::optional<std::vector<std::string>> plan_high(const SceneGraph& scene,
                                                  const GroundingDecision& decision,
                                                  const RoomProgress& progress,
                                                  const std::string& current_room) {
    std::optional<std::string> target;
    if (decision.prior_room && !progress.searched.count(*decision.prior_room) &&
        scene.waypoints.count(*decision.prior_room)) {
        target = decision.prior_room;
    }
    const auto hops = scene.hop_distances(current_room);
    const auto here = scene.waypoints.find(current_room);
    auto nearest = [&](auto&& eligible) -> std::optional<std::string> {
        std::optional<std::string> best;
        int best_hops = std::numeric_limits<int>::max();
        double best_span = kUnreachable;
        for (const auto& [room, h] : hops) {  // map order breaks exact ties by room id
            if (!eligible(room)) continue;
            const double d = here == scene.waypoints.end() ? 0.0 : distance(here->second, scene.waypoints.at(room));
            if (h < best_hops || (h == best_hops && d < best_span - kScoreEps)) {
                best = room;
                best_hops = h;
                best_span = d;
            }
        }
        return best;
    };
    if (!target) {
        target = nearest([&](const std::string& r) { return !progress.visited.count(r) && !progress.searched.count(r); });
    }
    if (!target) target = nearest([&](const std::string& r) { return !progress.searched.count(r); });
    if (!target) return std::nullopt;
    if (*target == current_room) return std::vector<std::string>{current_room};
    auto path = scene.bfs_path(current_room, *target);
    if (path.empty()) return std::nullopt;
    return path;
}

ActionLow turn_toward(int heading, int required) {
    const int diff = ((required - heading) % 360 + 360) % 360;
    if (diff == 0) return ActionLow::stop;
    return diff <= 180 ? ActionLow::turn_right : ActionLow::turn_left;
}

const DistanceField& FieldCache::get(Cell goal) {
    auto& slot = fields_[{goal.x, goal.y}];
    if (!slot) slot = std::make_unique<DistanceField>(*world_, goal);
    return *slot;
}

ActionLow navigate(const World& world, const AgentState& state, Vec2 goal, FieldCache& fields) {
    const DistanceField& field = fields.get(snap_to_free(world, goal));
    const double here = field.at(state.position);

    // Breadth-first expansion over sequences of 1 m moves. The first move of
    // the sequence ending closest to the goal is taken; positions are merged
    // on a 0.1 m lattice to keep the frontier small.
    struct Node {
        Vec2 p;
        int first;
    };
    auto key = [](Vec2 p) { return std::make_pair(std::lround(p.x * 10.0), std::lround(p.y * 10.0)); };
    std::set<std::pair<long, long>> seen{key(state.position)};
    std::vector<Node> frontier{{state.position, -1}};
    double best = here;
    int best_first = -1;
    for (int depth = 1; depth <= kMaxLookahead && !frontier.empty(); ++depth) {
        std::vector<Node> next;
        for (const auto& node : frontier) {
            for (int i = 0; i < 12; ++i) {
                const int h = normalize_heading(state.heading + (i % 2 ? 1 : -1) * ((i + 1) / 2) * kTurnStep);
                if (!can_move_forward(world, node.p, h)) continue;
                const Vec2 d = heading_direction(h);
                const Vec2 q{node.p.x + d.x * kForwardStep, node.p.y + d.y * kForwardStep};
                if (!seen.insert(key(q)).second) continue;
                const int first = node.first < 0 ? h : node.first;
                const double v = field.at(q);
                if (v < best - kScoreEps) {
                    best = v;
                    best_first = first;
                }
                next.push_back({q, first});
            }
        }
        frontier = std::move(next);
        if (best_first >= 0 && depth >= kMinLookahead) break;
    }

    if (best_first >= 0) {
        return best_first == state.heading ? ActionLow::move_forward : turn_toward(state.heading, best_first);
    }

    const double bearing = bearing_deg(state.position, goal);
    const int required = normalize_heading(static_cast<int>(std::lround(bearing / kTurnStep)) * kTurnStep);
    if (required != state.heading) return turn_toward(state.heading, required);
    return can_move_forward(world, state.position, state.heading) ? ActionLow::move_forward : ActionLow::turn_right;
}

ActionLow plan_low(const World& world,
                   const AgentState& state,
                   const Observation& observation,
                   Vec2 waypoint,
                   const std::string& target_object_id,
                   double success_radius,
                   FieldCache& fields) {
    if (!target_object_id.empty()) {
        if (auto seen = observation.find(target_object_id)) {
            if (seen->distance <= success_radius) return ActionLow::stop;
            if (const auto* obj = world.find_object(target_object_id)) {
                if (observation.blocked) return ActionLow::turn_right;
                return navigate(world, state, obj->position, fields);
            }
        }
    }
    if (observation.blocked) return ActionLow::turn_right;
    return navigate(world, state, waypoint, fields);
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::no_prior: return "no-prior";
        case RunMode::raw_interaction: return "raw-interaction";
        case RunMode::polar: return "polar";
    }
    return "polar";
}

RunMode run_mode_from_string(std::string_view name) {
    if (name == "no-prior") return RunMode::no_prior;
    if (name == "raw-interaction") return RunMode::raw_interaction;
    if (name == "polar") return RunMode::polar;
    throw RejectedInput("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Ablation ablation) {
    switch (ablation) {
        case Ablation::full_episodic: return "full-episodic";
        case Ablation::instruction_only: return "instruction-only";
        case Ablation::raw_trajectory: return "raw-trajectory";
        case Ablation::summary_text: return "summary-text";
    }
    return "full-episodic";
}

Ablation ablation_from_string(std::string_view name) {
    if (name == "full-episodic") return Ablation::full_episodic;
    if (name == "instruction-only") return Ablation::instruction_only;
    if (name == "raw-trajectory") return Ablation::raw_trajectory;
    if (name == "summary-text") return Ablation::summary_text;
    throw RejectedInput("unknown ablation '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    if (max_steps < 1) throw RejectedInput("max_steps must be >= 1");
    if (!(success_radius_m > 0.0)) throw RejectedInput("success radius must be positive");
    if (k < 1) throw RejectedInput("k must be >= 1");
    if (look_around_turns < 0) throw RejectedInput("look_around_turns must be >= 0");
}

EpisodeOutcome run_episode(const World& world,
                           const SceneGraph& scene,
                           const EpisodeRequest& request,
                           const GroundingContext& context,
                           Planner& planner,
                           const RunConfig& config) {
    config.validate();
    const ObjectInstance* gold = world.find_object(request.gold_object_id);
    if (!gold) throw RejectedInput("gold object '" + request.gold_object_id + "' is not in the world");
    if (!world.is_free(request.start.position) || !is_valid_heading(request.start.heading)) {
        throw RejectedInput("episode start is not a valid pose");
    }

    EpisodeOutcome out;
    EpisodeLog& log = out.log;
    log.episode_id = request.episode_id;
    log.timestamp = request.timestamp;
    log.instruction = request.instruction;
    log.facts = request.facts;
    log.reference_feature = request.reference_feature;
    log.target_object_id = gold->object_id;
    log.target_category = gold->category;

    AgentState state = request.start;
    state.steps_taken = 0;
    Observation obs = observe(world, state);

    auto record = [&](ActionLow action) {
        std::vector<std::string> ids;
        for (const auto& v : obs.all_visible()) ids.push_back(v.object_id);
        log.trajectory.push_back({state.position, state.heading, action, world.room_at(state.position).value_or(""), std::move(ids)});
        StepResult r = step(world, state, action);
        state = r.state;
        obs = std::move(r.observation);
        return r.done;
    };

    try {
        out.decision = request.explicit_decision ? *request.explicit_decision
                                                 : planner.ground(request.instruction, context, scene);
        std::string target = out.decision.chosen_object_id;
        FieldCache fields(world);
        RoomProgress progress;
        std::vector<std::string> route;
        std::optional<Vec2> last_sighting;
        int looking = 0;

        while (state.steps_taken < config.max_steps) {
            const std::string room = world.room_at(state.position).value_or("");
            progress.visited.insert(room);
            if (target.empty() && !out.decision.chosen_category.empty()) {
                for (const auto& v : obs.all_visible()) {
                    if (v.category == out.decision.chosen_category) {
                        target = v.object_id;
                        break;
                    }
                }
            }
            if (!target.empty() && obs.find(target)) last_sighting = world.find_object(target)->position;

            std::optional<Vec2> goal;
            if (last_sighting) {
                goal = last_sighting;
            } else if (looking > 0) {
                --looking;
                if (looking == 0) {
                    progress.searched.insert(route.back());
                    route.clear();
                }
                if (record(ActionLow::turn_right)) break;
                continue;
            } else {
                if (route.empty()) {
                    const auto next = planner.choose_room(scene, out.decision, progress, room);
                    if (!next) {
                        record(ActionLow::stop);
                        break;
                    }
                    route = *next == room ? std::vector<std::string>{room} : scene.bfs_path(room, *next);
                    if (route.empty()) {
                        progress.searched.insert(*next);
                        continue;
                    }
                }
                while (route.size() > 1 && route.front() == room) route.erase(route.begin());
                const Vec2 wp = scene.waypoints.at(route.front());
                if (route.size() == 1 && room == route.front() &&
                    fields.get(snap_to_free(world, wp)).at(state.position) <= config.waypoint_radius_m) {
                    if (config.look_around_turns == 0) {
                        progress.searched.insert(room);
                        route.clear();
                        continue;
                    }
                    looking = config.look_around_turns;
                    continue;
                }
                goal = wp;
            }
            const ActionLow action = plan_low(world, state, obs, *goal, target, config.success_radius_m, fields);
            if (record(action)) break;
        }
        out.final_target = target;
    } catch (const PlannerUnavailable& e) {
        log.failure_reason = e.what();
        if (log.trajectory.empty()) record(ActionLow::stop);
    }

    log.final_position = state.position;
    log.success = !log.failure_reason && distance(state.position, gold->position) <= config.success_radius_m;
    out.path_length_m = kForwardStep * static_cast<double>(effective_forward_moves(log));
    out.steps = state.steps_taken;
    return out;
}

}  // namespace polar
