#include <doctest.h>

#include "polar/distiller.hpp"
#include "polar/retrieval.hpp"
#include "polar/rng.hpp"

#include <cmath>

using namespace polar;

namespace {

Embedding emb(const std::string& text) { return encode({}, text); }

EpisodeLog episode(const std::string& id, const std::string& instruction, const std::string& room) {
    EpisodeLog e;
    e.episode_id = id;
    e.instruction = instruction;
    e.target_object_id = "mug_01";
    e.target_category = "mug";
    e.trajectory = {TrajectoryStep{{1.0, 1.0}, 0, ActionLow::stop, room, {}}};
    e.success = true;
    return e;
}

}  // namespace

TEST_CASE("semantic retrieval ranks an identical statement first") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.add_semantic("mug_01", "I use it for baking", emb("I use it for baking"), 1);
    g.add_semantic("mug_01", "zzz qqq", emb("zzz qqq"), 2);
    const auto hits = retrieve_semantic(g, std::string("I use it for baking"));
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.semantic(hits[0].node_id).statement == "I use it for baking");
    CHECK(hits[0].object_ids == std::vector<std::string>{"mug_01"});
}

TEST_CASE("equal scores break ties by newer timestamp") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    // Orthogonal to the query: both score 0.
    g.add_semantic("mug_01", "aaaa", emb("aaaa"), 3);
    g.add_semantic("mug_01", "bbbb", emb("bbbb"), 7);
    const auto hits = retrieve_semantic(g, std::string("zzzz"));
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].score == hits[1].score);
    CHECK(hits[0].timestamp == 7);
    RetrievalOptions plain;
    plain.recency_tiebreak = false;
    CHECK(retrieve_semantic(g, std::string("zzzz"), {}, plain)[0].timestamp == 3);
}

TEST_CASE("under-full and empty graphs") {
    MemoryGraph g;
    CHECK(retrieve_semantic(g, std::string("anything")).empty());
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    for (const char* s : {"aaa", "bbb", "ccc"}) g.add_semantic("mug_01", s, emb(s), 1);
    CHECK(retrieve_semantic(g, std::string("aaa")).size() == 3);
}

TEST_CASE("candidate assembly: dedup by object and shared-node expansion") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.upsert_object("mug", std::string("mug_02"), std::nullopt, 1);
    g.add_semantic("mug_01", "baking mornings", emb("baking mornings"), 1);
    g.add_semantic("mug_01", "baking evenings", emb("baking evenings"), 2);
    EpisodicRecord r;
    r.episode_id = "ep1";
    r.success = true;
    r.room_sequence = {"kitchen"};
    r.found_room = "kitchen";
    r.rendered_text = "outcome=success; searched=kitchen; found_in=kitchen; length=0.0m";
    g.add_episodic("mug_01", r, 2);

    const auto res = retrieve(g, "baking");
    REQUIRE(res.candidates.size() == 1);
    CHECK(res.candidates[0].object_id == "mug_01");
    CHECK(res.candidates[0].statements.size() == 2);
    REQUIRE(res.candidates[0].episodic_memories.size() == 1);
    CHECK(res.candidates[0].episodic_memories[0].text == r.rendered_text);

    g.add_semantic("mug_02", "baking mornings", emb("baking mornings"), 3);
    const auto shared = retrieve(g, "baking mornings");
    CHECK(shared.candidates.size() == 2);
}

TEST_CASE("superseded statements are filtered") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.upsert_object("mug", std::string("mug_02"), std::nullopt, 1);
    const auto s1 = g.add_semantic("mug_01", "aaa bbb", emb("aaa bbb"), 1).node_id;
    const auto s2 = g.add_semantic("mug_02", "zzz yyy", emb("zzz yyy"), 2).node_id;
    g.supersede("mug_01", s1, s2, 3);
    for (const auto& h : retrieve_semantic(g, std::string("aaa bbb"))) CHECK(h.node_id != s1);
    RetrievalOptions all;
    all.active_only = false;
    bool found = false;
    for (const auto& h : retrieve_semantic(g, std::string("aaa bbb"), {}, all)) found = found || h.node_id == s1;
    CHECK(found);
}

TEST_CASE("bm25 against hand arithmetic") {
    const std::vector<std::string> docs{"red mug red", "blue mug", "green shoes"};
    const auto s = bm25_scores(docs, "red");
    // N=3, n=1, avgdl=7/3, |d1|=3, tf=2
    const double idf = std::log(1.0 + 2.5 / 1.5);
    const double want = idf * 2.0 * 2.2 / (2.0 + 1.2 * (0.25 + 0.75 * 3.0 / (7.0 / 3.0)));
    CHECK(s[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK(s[1] == 0.0);
    CHECK(s[2] == 0.0);
    const auto m = bm25_scores(docs, "mug");
    // n=2: idf = ln(1 + 1.5/2.5)
    const double idf2 = std::log(1.6);
    CHECK(m[1] == doctest::Approx(idf2 * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 2.0 / (7.0 / 3.0)))).epsilon(1e-12));
    CHECK(m[1] > m[0]);
}

TEST_CASE("raw retrieval basics") {
    CHECK(raw_retrieve({}, "x", 5, RawMode::bm25).empty());
    const std::vector<EpisodeLog> one{episode("e1", "find the shoes", "kitchen")};
    CHECK(raw_retrieve(one, "unrelated", 5, RawMode::bm25)[0].episode_id == "e1");

    const std::vector<EpisodeLog> corpus{episode("e1", "find the shoes", "kitchen"),
                                         episode("e2", "find the umbrella", "kitchen"),
                                         episode("e3", "find the keys", "garage")};
    CHECK(raw_retrieve(corpus, "umbrella please", 5, RawMode::bm25)[0].episode_id == "e2");
    const auto dense = raw_retrieve(corpus, raw_document(corpus[2]), 5, RawMode::dense);
    CHECK(dense[0].episode_id == "e3");
    CHECK(dense[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(raw_retrieve(corpus, "find", 2, RawMode::bm25).size() == 2);
}

TEST_CASE("recall definitions") {
    RetrievalResult empty;
    CHECK(recall_at_k(empty, "mug_01") == 0);
    RetrievalResult r;
    r.candidates.push_back(CandidateObject{"mug_01", "mug", {}, {}, {}});
    CHECK(recall_at_k(r, "mug_01") == 1);
    const std::vector<RawHit> hits{{"e1", 1.0}, {"e2", 0.5}};
    CHECK(recall_at_k(hits, {"e1", "e2"}) == 1);
    CHECK(recall_at_k(hits, {"e1", "e3"}) == 0);
}

TEST_CASE("joint recall is object-level when one of two facts is retrieved") {
    MemoryGraph g;
    g.upsert_object("mug", std::string("mug_01"), std::nullopt, 1);
    g.add_semantic("mug_01", "user: use = baking refers to mug mug_01", emb("user: use = baking refers to mug mug_01"), 1);
    RetrievalOptions k1;
    k1.k = 1;
    const auto res = retrieve(g, "Bring me the mug that I use for baking and that I got from kyoto", {}, k1);
    CHECK(recall_at_k(res, "mug_01") == 1);
}

TEST_CASE("property: top-k is a prefix of top-(k+1) and recall is monotone in k") {
    Rng rng(5);
    const std::vector<std::string> words{"mug", "baking", "kyoto", "ski", "shoes", "garden", "sister", "beach"};
    for (int trial = 0; trial < 20; ++trial) {
        MemoryGraph g;
        for (int o = 1; o <= 4; ++o) g.upsert_object("mug", "mug_0" + std::to_string(o), std::nullopt, 1);
        for (int i = 0; i < 12; ++i) {
            const std::string s = rng.pick(words) + " " + rng.pick(words) + " " + std::to_string(i);
            g.add_semantic("mug_0" + std::to_string(rng.uniform_int(1, 4)), s, emb(s), rng.uniform_int(1, 9));
        }
        const std::string q = rng.pick(words) + " " + rng.pick(words);
        int prev_recall = 0;
        for (std::size_t k = 1; k < 12; ++k) {
            RetrievalOptions a, b;
            a.k = k;
            b.k = k + 1;
            const auto ha = retrieve_semantic(g, q, {}, a);
            const auto hb = retrieve_semantic(g, q, {}, b);
            REQUIRE(std::equal(ha.begin(), ha.end(), hb.begin()));
            const int rec = recall_at_k(retrieve(g, q, {}, a), "mug_03");
            CHECK(rec >= prev_recall);
            prev_recall = rec;
        }
        CHECK(retrieve(g, q) == retrieve(g, q));
    }
}
