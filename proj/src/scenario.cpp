#include "polar/scenario.hpp"

#include "polar/error.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace polar {

namespace {

const std::vector<std::string> kCategories = {
    "mug", "shoes", "umbrella", "backpack", "laptop", "scarf", "book", "bottle", "headphones", "jacket",
    "lamp", "pillow", "towel", "wallet", "keys", "charger", "hat", "blanket", "camera", "guitar",
};

// Fact keys with the phrasing used in explicit and evaluation instructions.
// Values are token-disjoint across all pools and from category names, and long
// enough that statements with different values stay below the dedup threshold.
struct KeySpec {
    std::string key;
    std::string explicit_phrase;  // "I use it for"
    std::string cue_phrase;       // "that I use for"
    std::vector<std::string> values;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"use", "I use it for", "that I use for",
         {"mountain hiking", "vegetable gardening", "sunrise yoga", "watercolor painting", "fly fishing",
          "bike commuting", "sourdough baking", "desert camping", "marathon training", "lap swimming",
          "sock knitting", "downhill skiing", "bouldering gyms", "charcoal sketching", "wave surfing",
          "salsa dancing"}},
        {"occasion", "I take it to", "that I take to",
         {"weddings", "picnics", "concerts", "interviews", "beach outings", "board meetings", "birthday parties",
          "road trips", "museum visits", "football games", "family dinners", "ski weekends"}},
        {"origin", "I got it from", "that I got from",
         {"big sister", "grandma", "flea market", "roommate", "uncle joe", "neighbor",
          "coworker", "kyoto", "thrift store", "cousin ana", "airport", "aunt rita"}},
    };
    return specs;
}

const KeySpec& key_spec(const std::string& key) {
    for (const auto& k : key_specs()) {
        if (k.key == key) return k;
    }
    throw RejectedInput("unknown fact key '" + key + "'");
}

std::string explicit_instruction(const std::string& category, const std::string& object_id,
                                 const std::vector<Fact>& facts) {
    std::string out = "Go to the " + category + " " + object_id + ".";
    for (const auto& f : facts) out += " " + key_spec(f.key).explicit_phrase + " " + f.value + ".";
    return out;
}

std::string eval_instruction(const std::string& category, const std::vector<Fact>& cues) {
    std::string out = "Bring me the " + category;
    for (std::size_t i = 0; i < cues.size(); ++i) {
        if (i > 0) out += i + 1 == cues.size() ? " and" : ",";
        out += " " + key_spec(cues[i].key).cue_phrase + " " + cues[i].value;
    }
    return out + ".";
}

std::string instance_id(const std::string& category, int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_%02d", n);
    return category + buf;
}

// Draws values without reuse inside one scenario.
class ValuePool {
public:
    explicit ValuePool(Rng& rng) {
        for (const auto& k : key_specs()) {
            auto vs = k.values;
            rng.shuffle(vs);
            pools_[k.key] = std::move(vs);
        }
    }

    Fact take(const std::string& key) {
        auto& vs = pools_.at(key);
        if (vs.empty()) throw GenerationError("value pool for '" + key + "' exhausted");
        Fact f{key, vs.back()};
        vs.pop_back();
        return f;
    }

private:
    std::map<std::string, std::vector<std::string>> pools_;
};

struct Draft {
    std::string target;
    std::vector<Fact> facts;
};

std::string random_key(Rng& rng) {
    return key_specs()[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(key_specs().size()) - 1))].key;
}

int random_heading(Rng& rng) {
    return static_cast<int>(rng.uniform_int(0, 11)) * kTurnStep;
}

// Random cell of `room` (any room when empty) at least min_sep from every
// other object, excluding `avoid`.
std::optional<Vec2> free_spot(Rng& rng, const World& world, const SceneGraph& scene,
                              const std::optional<std::string>& room,
                              const std::map<std::string, Vec2>& occupied, const std::string& self,
                              std::optional<Vec2> avoid) {
    const WorldGenOptions gen;
    auto cells = placement_cells(world, scene, gen, room);
    rng.shuffle(cells);
    for (const auto& c : cells) {
        const Vec2 p = World::cell_center(c);
        if (avoid && distance(p, *avoid) < 1e-9) continue;
        bool ok = true;
        for (const auto& [id, q] : occupied) {
            if (id != self && distance(p, q) < gen.min_object_separation) ok = false;
        }
        if (ok) return p;
    }
    return std::nullopt;
}

ScenarioSpec gen_one(Rng& rng, const std::string& scenario_id, ScenarioKind kind, const ScenarioOptions& opt) {
    auto cats = kCategories;
    rng.shuffle(cats);
    const std::string gold_cat = cats.front();
    ValuePool values(rng);

    int gold_instances = 1;
    int joint_k = 0;
    switch (kind) {
        case ScenarioKind::compositional_single:
        case ScenarioKind::temporal_context:
            gold_instances = 1;
            break;
        case ScenarioKind::compositional_joint:
            joint_k = static_cast<int>(rng.uniform_int(2, 3));
            gold_instances = 1 + joint_k;
            break;
        case ScenarioKind::distractor:
            gold_instances = opt.distractor_instances;
            break;
        case ScenarioKind::temporal_object:
            gold_instances = 2;
            break;
    }
    const int gold_index = static_cast<int>(rng.uniform_int(1, gold_instances));
    const std::string gold_id = instance_id(gold_cat, gold_index);
    std::vector<std::string> others;  // same-category non-gold instances
    for (int i = 1; i <= gold_instances; ++i) {
        if (i != gold_index) others.push_back(instance_id(gold_cat, i));
    }

    std::map<std::string, int> counts{{gold_cat, gold_instances}};
    std::vector<std::string> filler_ids;
    for (int i = 0; i < opt.filler_count; ++i) {
        const std::string& c = cats[static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(cats.size()) - 1))];
        filler_ids.push_back(instance_id(c, ++counts[c]));
    }

    // Script drafts; `gold_drafts` index into `drafts`.
    std::vector<Draft> drafts;
    std::vector<std::size_t> gold_drafts;
    std::optional<std::pair<std::size_t, std::size_t>> ordered;  // (older, newer)
    std::vector<Fact> cues;
    switch (kind) {
        case ScenarioKind::compositional_single:
        case ScenarioKind::distractor: {
            const Fact cue = values.take(random_key(rng));
            drafts.push_back({gold_id, {cue}});
            gold_drafts.push_back(0);
            cues = {cue};
            for (const auto& o : others) drafts.push_back({o, {values.take(random_key(rng))}});
            break;
        }
        case ScenarioKind::compositional_joint: {
            std::vector<std::string> keys;
            for (const auto& k : key_specs()) keys.push_back(k.key);
            rng.shuffle(keys);
            for (int j = 0; j < joint_k; ++j) cues.push_back(values.take(keys[static_cast<std::size_t>(j)]));
            for (int j = 0; j < joint_k; ++j) {
                gold_drafts.push_back(drafts.size());
                drafts.push_back({gold_id, {cues[static_cast<std::size_t>(j)]}});
            }
            for (int j = 0; j < joint_k; ++j) {
                std::vector<Fact> partial;
                for (int i = 0; i < joint_k; ++i) {
                    if (i != j) partial.push_back(cues[static_cast<std::size_t>(i)]);
                }
                drafts.push_back({others[static_cast<std::size_t>(j)], partial});
            }
            break;
        }
        case ScenarioKind::temporal_context: {
            const std::string key = random_key(rng);
            const Fact old_fact = values.take(key);
            const Fact new_fact = values.take(key);
            drafts.push_back({gold_id, {old_fact}});
            drafts.push_back({gold_id, {new_fact}});
            gold_drafts.push_back(1);
            ordered = {0, 1};
            cues = {new_fact};
            break;
        }
        case ScenarioKind::temporal_object: {
            const Fact cue = values.take(random_key(rng));
            drafts.push_back({others.front(), {cue}});
            drafts.push_back({gold_id, {cue}});
            gold_drafts.push_back(1);
            ordered = {0, 1};
            cues = {cue};
            break;
        }
    }
    for (const auto& f : filler_ids) drafts.push_back({f, {values.take(random_key(rng))}});

    std::vector<std::pair<std::string, int>> objects_spec(counts.begin(), counts.end());
    ScenarioSpec spec;
    spec.scenario_id = scenario_id;
    spec.kind = kind;
    spec.n_rooms = opt.n_rooms;
    spec.objects_spec = objects_spec;
    spec.filler_count = opt.filler_count;
    spec.gold_object_id = gold_id;
    spec.eval_instruction = eval_instruction(gold_cat, cues);
    // Joint suites need the gold to start in a room with a side-room
    // neighbor, so the relocation below never lands in the hallway.
    auto side_neighbor = [&](const World& w, const SceneGraph& g) {
        const auto room = w.room_at(w.find_object(gold_id)->position);
        for (const auto& r : g.neighbors(*room)) {
            if (r != "hallway") return true;
        }
        return false;
    };
    std::optional<World> drawn;
    for (int draw = 0; draw < 32 && !drawn; ++draw) {
        spec.world_seed = rng.next();
        World w = gen_world(spec.world_seed, spec.n_rooms, objects_spec);
        if (kind != ScenarioKind::compositional_joint || side_neighbor(w, build_scene_graph(w))) drawn = std::move(w);
    }
    if (!drawn) throw GenerationError("no layout gives the gold a side-room neighbor");
    const World world = std::move(*drawn);
    const SceneGraph scene = build_scene_graph(world);

    // Timestamps: random interleaving, with temporal pairs kept in order.
    std::vector<Timestamp> stamps(drafts.size());
    for (std::size_t i = 0; i < stamps.size(); ++i) stamps[i] = static_cast<Timestamp>(i + 1);
    rng.shuffle(stamps);
    if (ordered && stamps[ordered->first] > stamps[ordered->second]) {
        std::swap(stamps[ordered->first], stamps[ordered->second]);
    }
    std::vector<std::size_t> order(drafts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stamps[a] < stamps[b]; });

    std::set<std::pair<double, double>> acquisition_starts;
    std::vector<std::string> episode_of(drafts.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Draft& d = drafts[order[rank]];
        const ObjectInstance* obj = world.find_object(d.target);
        char eid[64];
        std::snprintf(eid, sizeof(eid), "%s-e%02zu", scenario_id.c_str(), rank + 1);
        episode_of[order[rank]] = eid;
        AcquisitionScript s;
        s.episode_id = eid;
        s.facts = d.facts;
        s.instruction = explicit_instruction(obj->category, obj->object_id, d.facts);
        s.target_object_id = d.target;
        s.timestamp = stamps[order[rank]];
        s.object_position = obj->position;
        const auto start = free_spot(rng, world, scene, std::nullopt, {}, "", std::nullopt);
        if (!start) throw GenerationError("no start cell");
        s.agent_start = {*start, random_heading(rng), 0};
        acquisition_starts.insert({start->x, start->y});
        spec.scripts.push_back(std::move(s));
    }
    for (auto g : gold_drafts) spec.gold_episode_ids.push_back(episode_of[g]);
    std::sort(spec.gold_episode_ids.begin(), spec.gold_episode_ids.end());

    // Evaluation-stage relocation.
    std::map<std::string, Vec2> occupied;
    for (const auto& o : world.objects()) occupied[o.object_id] = o.position;
    const ObjectInstance* gold = world.find_object(gold_id);
    const std::string gold_room = *world.room_at(gold->position);
    auto move = [&](const std::string& id, const std::string& room) {
        const auto p = free_spot(rng, world, scene, room, occupied, id, occupied.at(id));
        if (!p) return false;
        occupied[id] = *p;
        spec.eval_positions[id] = *p;
        return true;
    };
    switch (kind) {
        case ScenarioKind::compositional_single:
        case ScenarioKind::temporal_context:
        case ScenarioKind::temporal_object:
            if (!move(gold_id, gold_room)) throw GenerationError("cannot relocate gold in " + gold_room);
            break;
        case ScenarioKind::compositional_joint: {
            auto rooms = scene.neighbors(gold_room);
            std::erase(rooms, std::string("hallway"));
            rng.shuffle(rooms);
            bool placed = false;
            for (const auto& r : rooms) {
                if (move(gold_id, r)) {
                    placed = true;
                    break;
                }
            }
            if (!placed) throw GenerationError("cannot relocate gold next to " + gold_room);
            break;
        }
        case ScenarioKind::distractor: {
            auto rooms = scene.rooms;
            if (rooms.size() < static_cast<std::size_t>(gold_instances)) {
                throw GenerationError("fewer rooms than distractor instances");
            }
            rng.shuffle(rooms);
            std::vector<std::string> group = others;
            group.push_back(gold_id);
            std::sort(group.begin(), group.end());
            for (const auto& id : group) occupied.erase(id);
            std::size_t next_room = 0;
            for (const auto& id : group) {
                bool placed = false;
                while (!placed && next_room < rooms.size()) {
                    const auto p = free_spot(rng, world, scene, rooms[next_room++], occupied, id, std::nullopt);
                    if (p) {
                        occupied[id] = *p;
                        spec.eval_positions[id] = *p;
                        placed = true;
                    }
                }
                if (!placed) throw GenerationError("cannot spread distractor instances");
            }
            break;
        }
    }

    const Vec2 gold_eval = spec.eval_positions.at(gold_id);
    WorldGenOptions gen;
    auto cells = placement_cells(world, scene, gen);
    rng.shuffle(cells);
    bool started = false;
    for (const auto& c : cells) {
        const Vec2 p = World::cell_center(c);
        if (acquisition_starts.count({p.x, p.y})) continue;
        if (distance(p, gold_eval) < opt.min_start_distance) continue;
        spec.eval_start = {p, random_heading(rng), 0};
        started = true;
        break;
    }
    if (!started) throw GenerationError("no evaluation start cell");
    return spec;
}

Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }
Vec2 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json state_json(const AgentState& s) { return {{"position", vec_json(s.position)}, {"heading", s.heading}}; }
AgentState state_from(const Json& j) { return {vec_from(j.at("position")), j.at("heading").get<int>(), 0}; }

}  // namespace

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::compositional_single: return "compositional-single";
        case ScenarioKind::compositional_joint: return "compositional-joint";
        case ScenarioKind::distractor: return "distractor";
        case ScenarioKind::temporal_context: return "temporal-context";
        case ScenarioKind::temporal_object: return "temporal-object";
    }
    return "compositional-single";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
    for (auto k : all_scenario_kinds()) {
        if (to_string(k) == name) return k;
    }
    throw RejectedInput("unknown scenario kind '" + std::string(name) + "'");
}

const std::vector<ScenarioKind>& all_scenario_kinds() {
    static const std::vector<ScenarioKind> kinds = {
        ScenarioKind::compositional_single, ScenarioKind::compositional_joint, ScenarioKind::distractor,
        ScenarioKind::temporal_context, ScenarioKind::temporal_object,
    };
    return kinds;
}

std::vector<ScenarioSpec> gen_scenarios(std::uint64_t seed, ScenarioKind kind, int n, const ScenarioOptions& options) {
    if (n < 1) throw RejectedInput("scenario count must be >= 1");
    if (options.filler_count < 0) throw RejectedInput("filler count must be >= 0");
    if (options.distractor_instances < 2) throw RejectedInput("distractor scenarios need >= 2 instances");
    const auto kind_index = static_cast<std::uint64_t>(std::find(all_scenario_kinds().begin(), all_scenario_kinds().end(), kind) -
                                                       all_scenario_kinds().begin());
    std::vector<ScenarioSpec> out;
    for (int i = 0; i < n; ++i) {
        char sid[64];
        std::snprintf(sid, sizeof(sid), "%s-s%llu-%03d", std::string(to_string(kind)).c_str(),
                      static_cast<unsigned long long>(seed), i);
        const std::uint64_t base = derive_seed(derive_seed(seed, kind_index + 1), static_cast<std::uint64_t>(i));
        std::optional<ScenarioSpec> spec;
        std::string last_error;
        for (std::uint64_t attempt = 0; attempt < 8 && !spec; ++attempt) {
            Rng rng(derive_seed(base, attempt));
            try {
                spec = gen_one(rng, sid, kind, options);
            } catch (const GenerationError& e) {
                last_error = e.what();
            }
        }
        if (!spec) throw GenerationError(std::string(sid) + ": " + last_error);
        out.push_back(std::move(*spec));
    }
    return out;
}

World acquisition_world(const ScenarioSpec& spec) {
    return gen_world(spec.world_seed, spec.n_rooms, spec.objects_spec);
}

World evaluation_world(const ScenarioSpec& spec) {
    return acquisition_world(spec).with_object_positions(spec.eval_positions);
}

std::vector<EpisodeLog> acquire(const ScenarioSpec& spec, Planner& planner, const RunConfig& config) {
    const World world = acquisition_world(spec);
    const SceneGraph scene = build_scene_graph(world);
    GroundingContext context;
    context.world_categories = world.categories();
    std::vector<EpisodeLog> logs;
    for (const auto& s : spec.scripts) {
        const ObjectInstance* obj = world.find_object(s.target_object_id);
        if (!obj) throw RejectedInput(s.episode_id + ": unknown target " + s.target_object_id);
        EpisodeRequest req;
        req.episode_id = s.episode_id;
        req.timestamp = s.timestamp;
        req.instruction = s.instruction;
        req.facts = s.facts;
        req.reference_feature = obj->feature;
        req.gold_object_id = s.target_object_id;
        req.start = s.agent_start;
        req.explicit_decision = GroundingDecision{obj->object_id, obj->category, std::nullopt, "explicit target", GroundingSource::none};
        logs.push_back(run_episode(world, scene, req, context, planner, config).log);
    }
    return logs;
}

Json to_json(const ScenarioSpec& spec) {
    Json objects = Json::array();
    for (const auto& [c, n] : spec.objects_spec) objects.push_back({c, n});
    Json scripts = Json::array();
    for (const auto& s : spec.scripts) {
        Json facts = Json::array();
        for (const auto& f : s.facts) facts.push_back({{"key", f.key}, {"value", f.value}});
        scripts.push_back({{"episode_id", s.episode_id},
                           {"instruction", s.instruction},
                           {"facts", facts},
                           {"target_object_id", s.target_object_id},
                           {"timestamp", s.timestamp},
                           {"object_position", vec_json(s.object_position)},
                           {"agent_start", state_json(s.agent_start)}});
    }
    Json moved = Json::object();
    for (const auto& [id, p] : spec.eval_positions) moved[id] = vec_json(p);
    return {{"scenario_id", spec.scenario_id},
            {"kind", std::string(to_string(spec.kind))},
            {"world_seed", spec.world_seed},
            {"n_rooms", spec.n_rooms},
            {"objects_spec", objects},
            {"scripts", scripts},
            {"eval_instruction", spec.eval_instruction},
            {"gold_object_id", spec.gold_object_id},
            {"gold_episode_ids", spec.gold_episode_ids},
            {"eval_positions", moved},
            {"eval_start", state_json(spec.eval_start)},
            {"filler_count", spec.filler_count}};
}

ScenarioSpec scenario_from_json(const Json& j) {
    try {
        ScenarioSpec spec;
        spec.scenario_id = j.at("scenario_id").get<std::string>();
        spec.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
        spec.world_seed = j.at("world_seed").get<std::uint64_t>();
        spec.n_rooms = j.at("n_rooms").get<int>();
        for (const auto& o : j.at("objects_spec")) spec.objects_spec.emplace_back(o.at(0).get<std::string>(), o.at(1).get<int>());
        for (const auto& s : j.at("scripts")) {
            AcquisitionScript a;
            a.episode_id = s.at("episode_id").get<std::string>();
            a.instruction = s.at("instruction").get<std::string>();
            for (const auto& f : s.at("facts")) a.facts.push_back({f.at("key").get<std::string>(), f.at("value").get<std::string>()});
            a.target_object_id = s.at("target_object_id").get<std::string>();
            a.timestamp = s.at("timestamp").get<Timestamp>();
            a.object_position = vec_from(s.at("object_position"));
            a.agent_start = state_from(s.at("agent_start"));
            spec.scripts.push_back(std::move(a));
        }
        spec.eval_instruction = j.at("eval_instruction").get<std::string>();
        spec.gold_object_id = j.at("gold_object_id").get<std::string>();
        spec.gold_episode_ids = j.at("gold_episode_ids").get<std::vector<std::string>>();
        for (const auto& [id, p] : j.at("eval_positions").items()) spec.eval_positions[id] = vec_from(p);
        spec.eval_start = state_from(j.at("eval_start"));
        spec.filler_count = j.at("filler_count").get<int>();
        return spec;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
}

std::string dump_scenarios(const std::vector<ScenarioSpec>& specs) {
    std::vector<Json> rows;
    for (const auto& s : specs) rows.push_back(to_json(s));
    return dump_json_lines(rows);
}

std::vector<ScenarioSpec> parse_scenarios(const std::string& text) {
    std::vector<ScenarioSpec> out;
    std::size_t line = 0;
    for (const auto& j : parse_json_lines(text)) {
        ++line;
        try {
            out.push_back(scenario_from_json(j));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        } catch (const RejectedInput& e) {
            throw ParseError(e.what(), line);
        }
    }
    return out;
}

}  // namespace polar
