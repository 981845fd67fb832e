#include <doctest.h>

#include "polar/encoder.hpp"
#include "polar/error.hpp"
#include "polar/io.hpp"
#include "polar/memory_graph.hpp"

#include <cmath>
#include <filesystem>

using namespace polar;

namespace {

Embedding emb(const std::string& text) { return encode({}, text); }

std::vector<double> unit(std::size_t dim, std::size_t i) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    return v;
}

EpisodicRecord success_record() {
    EpisodicRecord r;
    r.episode_id = "ep1";
    r.instruction = "find the mug";
    r.success = true;
    r.room_sequence = {"kitchen", "hall", "bedroom"};
    r.unpromising_rooms = {"kitchen", "hall"};
    r.found_room = "bedroom";
    r.path_length_m = 9.0;
    r.rendered_text = "outcome=success; searched=kitchen,hall,bedroom; found_in=bedroom; length=9.0m";
    return r;
}

}  // namespace

TEST_CASE("upsert_object by id") {
    MemoryGraph g;
    CHECK(g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1) == "mug_01");
    CHECK(g.node_count() == 1);
    CHECK(g.upsert_object("mug", std::string("mug_01"), std::nullopt, 5) == "mug_01");
    CHECK(g.node_count() == 1);
    CHECK(g.object("mug_01").created_at == 1);
}

TEST_CASE("upsert_object by reference feature at cosine 0.97") {
    MemoryGraph g;
    std::vector<double> f(8, 0.0);
    f[0] = 1.0;
    std::vector<double> f2(8, 0.0);
    f2[0] = 0.97;
    f2[1] = std::sqrt(1.0 - 0.97 * 0.97);
    REQUIRE(cosine(f, f2) == doctest::Approx(0.97));
    const auto id = g.upsert_object("mug", std::nullopt, f, 1);
    CHECK(id == "obj_000001");
    CHECK(g.upsert_object("mug", std::nullopt, f2, 5) == id);
    CHECK(g.objects().size() == 1);
    // Below theta_obj, and a different category, both create new nodes.
    std::vector<double> f3(8, 0.0);
    f3[0] = 0.9;
    f3[1] = std::sqrt(1.0 - 0.81);
    CHECK(g.upsert_object("mug", std::nullopt, f3, 6) != id);
    CHECK(g.upsert_object("shoes", std::nullopt, f, 7) != id);
    CHECK(g.objects().size() == 3);
}

TEST_CASE("upsert_object rejects missing identity and non-unit features") {
    MemoryGraph g;
    CHECK_THROWS_AS(g.upsert_object("mug", std::nullopt, std::nullopt, 1), RejectedInput);
    CHECK_THROWS_AS(g.upsert_object("mug", std::nullopt, std::vector<double>{2.0, 0.0}, 1), RejectedInput);
}

TEST_CASE("add_semantic dedups identical statements across objects") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.upsert_object("mug", std::string("mug_02"), std::nullopt, 1);
    const std::string s = "user: use = baking refers to mug";
    const auto a = g.add_semantic("mug_01", s, emb(s), 2, "use");
    CHECK(a.created_node);
    CHECK(a.created_edge);
    const auto b = g.add_semantic("mug_02", s, emb(s), 7, "use");
    CHECK(b.node_id == a.node_id);
    CHECK_FALSE(b.created_node);
    CHECK(b.created_edge);
    CHECK(g.semantic_nodes().size() == 1);
    CHECK(g.edges().size() == 2);
    // Reverse query from the shared node reaches both objects.
    const auto owners = g.neighbors(a.node_id);
    REQUIRE(owners.size() == 2);
    CHECK(owners[0].node_id == "mug_02");
    CHECK(owners[1].node_id == "mug_01");
}

TEST_CASE("add_semantic creates a node for a statement with no shared grams") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    const auto a = g.add_semantic("mug_01", "aaaa", emb("aaaa"), 2);
    REQUIRE(cosine(emb("aaaa"), emb("zzzz")) == 0.0);
    const auto b = g.add_semantic("mug_01", "zzzz", emb("zzzz"), 3);
    CHECK(b.created_node);
    CHECK(a.node_id != b.node_id);
    CHECK_THROWS_AS(g.add_semantic("nope", "x y z", emb("x y z"), 4), NotFound);
}

TEST_CASE("add_episodic is append-only and validates records") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    const auto r = success_record();
    const auto e1 = g.add_episodic("mug_01", r, 3);
    const auto e2 = g.add_episodic("mug_01", r, 3);
    CHECK(e1 != e2);
    CHECK(g.episodic(e1).record.unpromising_rooms == std::vector<std::string>{"kitchen", "hall"});

    EpisodicRecord failure;
    failure.episode_id = "ep2";
    failure.room_sequence = {"kitchen"};
    failure.unpromising_rooms = {"kitchen"};
    CHECK_FALSE(g.episodic(g.add_episodic("mug_01", failure, 4)).record.success);

    auto bad = r;
    bad.found_room.reset();
    CHECK_THROWS_AS(g.add_episodic("mug_01", bad, 5), RejectedInput);
    bad = r;
    bad.unpromising_rooms.push_back("garage");
    CHECK_THROWS_AS(g.add_episodic("mug_01", bad, 5), RejectedInput);
    bad = r;
    bad.path_length_m = -1.0;
    CHECK_THROWS_AS(g.add_episodic("mug_01", bad, 5), RejectedInput);
}

TEST_CASE("supersede contract") {
    MemoryGraph g;
    g.upsert_object("bag", std::string("bag_02"), std::nullopt, 1);
    const auto s1 = g.add_semantic("bag_02", "aaa bbb", emb("aaa bbb"), 2).node_id;
    // A second object owns s2 so the node exists without an edge from bag_02.
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    const auto s2 = g.add_semantic("mug_01", "zzz yyy", emb("zzz yyy"), 3).node_id;
    g.supersede("bag_02", s1, s2, 9);
    CHECK(g.active_edge_count("bag_02", s1) == 0);
    CHECK(g.active_edge_count("bag_02", s2) == 1);
    CHECK(g.semantic_nodes().count(s1) == 1);  // history kept
    const auto active = g.neighbors("bag_02", NodeKind::semantic, true);
    REQUIRE(active.size() == 1);
    CHECK(active[0].node_id == s2);
    CHECK(active[0].timestamp == 9);
    CHECK(g.neighbors("bag_02", NodeKind::semantic, false).size() == 2);
    CHECK_THROWS_AS(g.supersede("bag_02", s1, s2, 10), NotFound);
}

TEST_CASE("neighbors sort by timestamp desc then id") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    const auto s1 = g.add_semantic("mug_01", "aaa bbb", emb("aaa bbb"), 2).node_id;
    const auto s2 = g.add_semantic("mug_01", "zzz yyy", emb("zzz yyy"), 5).node_id;
    const auto n = g.neighbors("mug_01");
    REQUIRE(n.size() == 2);
    CHECK(n[0].node_id == s2);
    CHECK(n[1].node_id == s1);
    CHECK_THROWS_AS(g.neighbors("missing"), NotFound);
}

TEST_CASE("snapshot round trip") {
    MemoryGraph empty;
    CHECK(MemoryGraph::from_snapshot(empty.to_snapshot()) == empty);

    MemoryGraph g;
    const char* texts[] = {"aaa bbb", "ccc ddd", "eee fff", "ggg hhh", "iii jjj"};
    for (int i = 1; i <= 3; ++i) g.upsert_object("mug", "mug_0" + std::to_string(i), unit(4, static_cast<std::size_t>(i)), i);
    for (int i = 0; i < 5; ++i) g.add_semantic("mug_0" + std::to_string(i % 3 + 1), texts[i], emb(texts[i]), 10 + i, "k" + std::to_string(i));
    g.add_episodic("mug_01", success_record(), 20);
    g.add_episodic("mug_02", success_record(), 21);
    const auto back = MemoryGraph::from_snapshot(g.to_snapshot());
    CHECK(back == g);
    CHECK(back.objects().size() == 3);
    CHECK(back.semantic_nodes().size() == 5);
    CHECK(back.episodic_nodes().size() == 2);
    CHECK(back.counters() == g.counters());
    CHECK(back.to_snapshot() == g.to_snapshot());

    const auto dir = std::filesystem::temp_directory_path() / "polar_graph_test";
    std::filesystem::create_directories(dir);
    g.save(dir / "g.json");
    CHECK(MemoryGraph::load(dir / "g.json") == g);
    std::filesystem::remove_all(dir);
}

TEST_CASE("snapshot with a dangling edge is a parse error with a line") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.add_semantic("mug_01", "aaa bbb", emb("aaa bbb"), 2);
    auto doc = Json::parse(g.to_snapshot());
    doc["edges"][0]["dst"] = "sem_999999";
    try {
        MemoryGraph::from_snapshot(doc.dump(2));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line().has_value());
    }
    CHECK_THROWS_AS(MemoryGraph::from_snapshot("{\n  \"format_version\": 1,\n  oops\n}"), ParseError);
    auto v2 = Json::parse(g.to_snapshot());
    v2["format_version"] = 2;
    CHECK_THROWS_AS(MemoryGraph::from_snapshot(v2.dump()), ParseError);
}
