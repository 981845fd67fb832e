#include <doctest.h>

#include "polar/agent.hpp"
#include "polar/distiller.hpp"
#include "polar/error.hpp"
#include "polar/metrics.hpp"
#include "polar/scenario.hpp"

#include <functional>
#include <map>

using namespace polar;

namespace {

World grid(int w, int h, const std::function<int(int, int)>& label_of, std::vector<std::string> rooms,
           std::vector<ObjectInstance> objects = {}) {
    std::vector<int> labels(static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) labels[static_cast<std::size_t>(y * w + x)] = label_of(x, y);
    }
    return World(w, h, std::move(labels), std::move(rooms), std::move(objects));
}

World open_room(int w, int h, std::vector<ObjectInstance> objects = {}) {
    return grid(w, h, [&](int x, int y) { return (x == 0 || y == 0 || x == w - 1 || y == h - 1) ? -1 : 0; },
                {"room"}, std::move(objects));
}

// kitchen - hall - bedroom in a line, plus a study off the hall.
SceneGraph house() {
    SceneGraph g;
    g.rooms = {"bedroom", "hall", "kitchen", "study"};
    g.edges = {{"hall", "kitchen"}, {"bedroom", "hall"}, {"hall", "study"}};
    g.waypoints = {{"kitchen", {1, 1}}, {"hall", {5, 1}}, {"bedroom", {9, 1}}, {"study", {5, 4}}};
    return g;
}

EpisodeLog acquisition(const std::string& id, Timestamp t, const std::string& object, const std::string& category,
                       const std::vector<Fact>& facts, const std::string& room) {
    EpisodeLog e;
    e.episode_id = id;
    e.timestamp = t;
    e.instruction = "Go to the " + category + " " + object + ".";
    e.facts = facts;
    e.target_object_id = object;
    e.target_category = category;
    e.trajectory = {TrajectoryStep{{1.0, 1.0}, 0, ActionLow::move_forward, "hall", {}},
                    TrajectoryStep{{1.0, 2.0}, 0, ActionLow::stop, room, {object}}};
    e.success = true;
    return e;
}

GroundingContext polar_context(const MemoryGraph& g, const std::string& instruction) {
    GroundingContext ctx;
    ctx.source = GroundingSource::polar;
    ctx.retrieval = retrieve(g, instruction);
    return ctx;
}

}  // namespace

TEST_CASE("minimal turns") {
    CHECK(turn_toward(0, 90) == ActionLow::turn_right);
    CHECK(turn_toward(0, 270) == ActionLow::turn_left);
    CHECK(turn_toward(0, 180) == ActionLow::turn_right);
    CHECK(turn_toward(330, 30) == ActionLow::turn_right);
    CHECK(turn_toward(30, 330) == ActionLow::turn_left);
    CHECK(turn_toward(120, 120) == ActionLow::stop);
}

TEST_CASE("high-level planning") {
    const SceneGraph g = house();
    GroundingDecision d;
    d.prior_room = "bedroom";
    RoomProgress p;
    CHECK(plan_high(g, d, p, "kitchen") == std::vector<std::string>{"hall", "bedroom"});

    // No prior: nearest unsearched room by hops; hall is one hop from kitchen.
    d.prior_room.reset();
    p.searched = {"kitchen"};
    CHECK(plan_high(g, d, p, "kitchen") == std::vector<std::string>{"hall"});

    // A searched prior room falls through to the sweep.
    d.prior_room = "bedroom";
    p.searched = {"bedroom"};
    p.visited = {"bedroom", "hall"};
    const auto next = plan_high(g, d, p, "bedroom");
    REQUIRE(next);
    // Rooms not yet entered come before the hall that was only passed through.
    CHECK(next->back() != "hall");
    CHECK(next->back() != "bedroom");

    p.searched = {"bedroom", "hall", "kitchen", "study"};
    CHECK_FALSE(plan_high(g, d, p, "bedroom"));

    p = {};
    d.prior_room.reset();
    CHECK(plan_high(g, d, p, "kitchen") == std::vector<std::string>{"kitchen"});
}

TEST_CASE("low-level policy") {
    const World w = open_room(40, 40, {ObjectInstance{"mug_01", "mug", {5.125, 6.625}, std::nullopt}});
    FieldCache fields(w);
    const AgentState near{{5.125, 5.125}, 0, 0};
    CHECK(plan_low(w, near, observe(w, near), {5.125, 8.125}, "mug_01", 2.0, fields) == ActionLow::stop);

    const World empty = open_room(40, 40);
    FieldCache f2(empty);
    const AgentState s{{2.125, 2.125}, 0, 0};
    CHECK(plan_low(empty, s, observe(empty, s), {2.125, 7.125}, "mug_01", 2.0, f2) == ActionLow::move_forward);
    CHECK(plan_low(empty, s, observe(empty, s), {7.125, 2.125}, "mug_01", 2.0, f2) == ActionLow::turn_right);

    Observation blocked = observe(empty, s);
    blocked.blocked = true;
    CHECK(plan_low(empty, s, blocked, {2.125, 7.125}, "mug_01", 2.0, f2) == ActionLow::turn_right);
}

TEST_CASE("oracle grounding on an identical statement") {
    MemoryGraph g;
    auto e = acquisition("e1", 1, "mug_01", "mug", {{"use", "baking"}}, "kitchen");
    memorize(e, g);
    const std::string instruction = render_statement({"use", "baking"}, "mug", "mug_01");
    OraclePlanner planner;
    const auto d = planner.ground(instruction, polar_context(g, instruction), house());
    CHECK(d.chosen_object_id == "mug_01");
    CHECK(d.prior_room == std::optional<std::string>("kitchen"));
    CHECK(d.source == GroundingSource::polar);
}

TEST_CASE("recency breaks an exact score tie") {
    MemoryGraph g;
    // Same cue for two instances; the later assignment must win.
    memorize(acquisition("e1", 1, "keys_01", "keys", {{"use", "ski weekends"}}, "kitchen"), g);
    memorize(acquisition("e2", 2, "keys_02", "keys", {{"use", "ski weekends"}}, "study"), g);
    const std::string instruction = "Bring me the keys that I use for ski weekends.";
    const auto ctx = polar_context(g, instruction);
    const auto scored = score_candidates(*ctx.retrieval);
    REQUIRE(scored.size() == 2);
    OraclePlanner planner;
    const auto d = planner.ground(instruction, ctx, house());
    CHECK(d.chosen_object_id == "keys_02");
    CHECK(d.prior_room == std::optional<std::string>("study"));
}

TEST_CASE("joint composition needs every fact") {
    // Gold carries cues A and B in separate episodes; each decoy carries the other cue.
    MemoryGraph g;
    memorize(acquisition("e1", 1, "bag_01", "backpack", {{"use", "camping"}}, "kitchen"), g);
    memorize(acquisition("e2", 2, "bag_01", "backpack", {{"origin", "kyoto"}}, "kitchen"), g);
    memorize(acquisition("e3", 3, "bag_02", "backpack", {{"origin", "kyoto"}}, "study"), g);
    memorize(acquisition("e4", 4, "bag_03", "backpack", {{"use", "camping"}}, "hall"), g);
    const std::string instruction = "Bring me the backpack that I use for camping and that I got from kyoto.";
    OraclePlanner planner;
    CHECK(planner.ground(instruction, polar_context(g, instruction), house()).chosen_object_id == "bag_01");
}

TEST_CASE("category-only grounding") {
    GroundingContext ctx;
    ctx.world_categories = {"mug", "shoes"};
    OraclePlanner planner;
    const auto d = planner.ground("bring my trip to-go shoes please", ctx, house());
    CHECK(d.chosen_category == "shoes");
    CHECK(d.chosen_object_id.empty());
    CHECK(ground_category("something to drink from", {"mug"}) == "mug");
    CHECK_THROWS_AS(ground_category("x", {}), GroundingFailed);
}

TEST_CASE("empty polar and raw contexts fail grounding") {
    OraclePlanner oracle;
    GroundingContext polar;
    polar.source = GroundingSource::polar;
    CHECK_THROWS_AS(oracle.ground("find it", polar, house()), GroundingFailed);
    GroundingContext raw;
    raw.source = GroundingSource::raw;
    CHECK_THROWS_AS(oracle.ground("find it", raw, house()), GroundingFailed);
    NaiveMatcher matcher;
    CHECK_THROWS_AS(matcher.ground("find it", polar, house()), GroundingFailed);
}

TEST_CASE("naive matcher picks the largest token overlap") {
    GroundingContext ctx;
    ctx.source = GroundingSource::raw;
    ctx.raw_episodes = {acquisition("e2", 2, "mug_02", "mug", {}, "study"),
                        acquisition("e1", 1, "mug_01", "mug", {}, "kitchen"),
                        acquisition("e3", 3, "shoes_01", "shoes", {}, "hall")};
    ctx.raw_episodes[2].instruction = "Go to the shoes shoes_01. I wear them for hiking.";
    NaiveMatcher matcher;
    CHECK(matcher.ground("bring the shoes I wear for hiking", ctx, house()).chosen_object_id == "shoes_01");
    // Equal overlap between e1 and e2: the smaller episode id wins.
    const auto d = matcher.ground("the mug", ctx, house());
    CHECK(d.chosen_object_id == "mug_01");
    CHECK(d.prior_room == std::optional<std::string>("kitchen"));
}

TEST_CASE("room prior fallbacks") {
    CandidateObject c;
    CHECK_FALSE(prior_room_from(c));
    c.episodic_memories.push_back(CandidateMemory{"e1", 1, "outcome=success; searched=hall,study; found_in=study; length=3.0m", std::nullopt});
    CHECK(prior_room_from(c) == std::optional<std::string>("study"));
    c.episodic_memories[0].text = "hall MOVE_FORWARD bedroom MOVE_FORWARD bedroom STOP";
    CHECK(prior_room_from(c) == std::optional<std::string>("bedroom"));
    EpisodicRecord r;
    r.success = true;
    r.room_sequence = {"kitchen"};
    r.found_room = "kitchen";
    c.episodic_memories[0].record = r;
    CHECK(prior_room_from(c) == std::optional<std::string>("kitchen"));
}

TEST_CASE("episode with the gold in the starting room") {
    const World w = open_room(40, 40, {ObjectInstance{"mug_01", "mug", {7.125, 5.125}, std::nullopt}});
    const SceneGraph scene = build_scene_graph(w);
    EpisodeRequest req;
    req.episode_id = "t1";
    req.instruction = "Bring me the mug.";
    req.gold_object_id = "mug_01";
    req.start = {{2.125, 2.125}, 180, 0};
    GroundingDecision d;
    d.chosen_object_id = "mug_01";
    d.chosen_category = "mug";
    req.explicit_decision = d;
    OraclePlanner planner;
    const auto out = run_episode(w, scene, req, {}, planner, {});
    CHECK(out.log.success);
    CHECK(out.steps < 50);
    CHECK(out.log.trajectory.back().action == ActionLow::stop);
    CHECK(out.path_length_m == static_cast<double>(effective_forward_moves(out.log)));
}

TEST_CASE("grounding a distractor ends at the distractor") {
    const World w = open_room(60, 40, {ObjectInstance{"mug_01", "mug", {2.125, 5.125}, std::nullopt},
                                       ObjectInstance{"mug_02", "mug", {12.125, 5.125}, std::nullopt}});
    const SceneGraph scene = build_scene_graph(w);
    EpisodeRequest req;
    req.episode_id = "t2";
    req.gold_object_id = "mug_01";
    req.start = {{7.125, 5.125}, 0, 0};
    GroundingDecision d;
    d.chosen_object_id = "mug_02";
    d.chosen_category = "mug";
    req.explicit_decision = d;
    OraclePlanner planner;
    const auto out = run_episode(w, scene, req, {}, planner, {});
    CHECK_FALSE(out.log.success);
    CHECK(out.final_target == "mug_02");
    CHECK(distance(out.log.final_position, {12.125, 5.125}) <= 2.0);
}

TEST_CASE("sealed gold room ends in failure within the step cap") {
    const World w = grid(
        40, 20, [](int x, int y) { return (x == 0 || y == 0 || x == 39 || y == 19 || x == 20) ? -1 : (x < 20 ? 0 : 1); },
        {"west", "east"}, {ObjectInstance{"mug_01", "mug", {7.125, 2.625}, std::nullopt}});
    const SceneGraph scene = build_scene_graph(w);
    EpisodeRequest req;
    req.episode_id = "t3";
    req.gold_object_id = "mug_01";
    req.start = {{2.125, 2.625}, 180, 0};
    GroundingDecision d;
    d.chosen_object_id = "mug_01";
    d.chosen_category = "mug";
    req.explicit_decision = d;
    OraclePlanner planner;
    const auto out = run_episode(w, scene, req, {}, planner, {});
    CHECK_FALSE(out.log.success);
    CHECK(out.steps <= 700);
}

TEST_CASE("run config validation and names") {
    RunConfig c;
    c.max_steps = 0;
    CHECK_THROWS_AS(c.validate(), RejectedInput);
    for (auto m : {RunMode::no_prior, RunMode::raw_interaction, RunMode::polar}) CHECK(run_mode_from_string(to_string(m)) == m);
    for (auto a : {Ablation::full_episodic, Ablation::instruction_only, Ablation::raw_trajectory, Ablation::summary_text}) {
        CHECK(ablation_from_string(to_string(a)) == a);
    }
    CHECK_THROWS(run_mode_from_string("bogus"));
}

TEST_CASE("no-prior instance choice is blind to the gold instance") {
    // Each seed yields one three-instance distractor spec.
    const int n = 200;
    std::map<std::string, int> by_suffix;
    int gold_hits = 0;
    EvalOptions opt;
    opt.run.mode = RunMode::no_prior;
    for (int seed = 0; seed < n; ++seed) {
        const auto specs = gen_scenarios(static_cast<std::uint64_t>(seed), ScenarioKind::distractor, 1);
        const auto report = evaluate(specs, {}, opt);
        REQUIRE(report.rows.size() == 1);
        const auto& row = report.rows[0];
        REQUIRE_FALSE(row.chosen_object_id.empty());
        by_suffix[row.chosen_object_id.substr(row.chosen_object_id.size() - 2)] += 1;
        gold_hits += row.grounding_correct ? 1 : 0;
    }
    const double third = 1.0 / 3.0;
    CHECK(std::abs(gold_hits / static_cast<double>(n) - third) <= 0.15);
    REQUIRE(by_suffix.size() == 3);
    for (const auto& [suffix, count] : by_suffix) CHECK(std::abs(count / static_cast<double>(n) - third) <= 0.15);
}
