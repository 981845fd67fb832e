#pragma once

#include "polar/encoder.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polar {

// Integer episode index; edges and nodes are stamped with the episode that
// produced them.
using Timestamp = std::int64_t;

enum class NodeKind { object, semantic, episodic };

std::string_view to_string(NodeKind kind);

struct ObjectNode {
    std::string object_id;
    std::string category;
    std::optional<std::vector<double>> reference_feature;
    Timestamp created_at = 0;

    friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct SemanticNode {
    std::string node_id;
    std::string statement;
    Embedding embedding;
    // Fact key the statement was distilled from; drives supersession.
    std::string fact_key;
    Timestamp created_at = 0;

    friend bool operator==(const SemanticNode&, const SemanticNode&) = default;
};

// Compact planning-relevant rendering of one past trajectory.
struct EpisodicRecord {
    std::string episode_id;
    std::string instruction;
    bool success = false;
    std::vector<std::string> room_sequence;
    std::vector<std::string> unpromising_rooms;
    std::optional<std::string> found_room;
    double path_length_m = 0.0;
    std::string rendered_text;

    // found_room present iff success; unpromising_rooms within room_sequence;
    // path length non-negative. Throws RejectedInput.
    void validate() const;

    friend bool operator==(const EpisodicRecord&, const EpisodicRecord&) = default;
};

struct EpisodicNode {
    std::string node_id;
    EpisodicRecord record;
    Timestamp created_at = 0;

    friend bool operator==(const EpisodicNode&, const EpisodicNode&) = default;
};

enum class EdgeKind { object_semantic, object_episodic };

std::string_view to_string(EdgeKind kind);

struct Edge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::object_semantic;
    Timestamp timestamp = 0;
    bool active = true;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphConfig {
    double theta_dedup = 0.92;  // semantic statements
    double theta_obj = 0.95;    // reference features of same-category objects
};

struct SemanticLink {
    std::string node_id;
    bool created_node = false;
    bool created_edge = false;
};

struct Neighbor {
    std::string node_id;
    Timestamp timestamp = 0;
    bool active = true;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct GraphCounters {
    std::uint64_t next_object = 1;
    std::uint64_t next_semantic = 1;
    std::uint64_t next_episodic = 1;

    friend bool operator==(const GraphCounters&, const GraphCounters&) = default;
};

// Object-centric memory graph: object, semantic and episodic nodes joined by
// timestamped object->semantic and object->episodic edges. Single writer;
// const member functions may run concurrently between mutations.
class MemoryGraph {
public:
    explicit MemoryGraph(GraphConfig config = {}) : config_(config) {}

    const GraphConfig& config() const { return config_; }

    // Returns the node whose object_id matches, else the same-category node
    // whose reference feature has the highest cosine >= theta_obj, else a new
    // node. Existing nodes are never modified.
    std::string upsert_object(const std::string& category,
                              const std::optional<std::string>& object_id,
                              const std::optional<std::vector<double>>& reference_feature,
                              Timestamp timestamp);

    // Links `object_ref` to the most similar existing semantic node when its
    // cosine reaches theta_dedup, otherwise creates the node.
    SemanticLink add_semantic(const std::string& object_ref,
                              const std::string& statement,
                              const Embedding& embedding,
                              Timestamp timestamp,
                              const std::string& fact_key = {});

    // Episodic memory is append-only: always a fresh node.
    std::string add_episodic(const std::string& object_ref,
                             const EpisodicRecord& record,
                             Timestamp timestamp);

    void supersede(const std::string& object_ref,
                   const std::string& old_semantic,
                   const std::string& new_semantic,
                   Timestamp timestamp);

    // Outgoing edges for object nodes, incoming edges for semantic/episodic
    // nodes. Sorted by timestamp desc, then node id asc.
    std::vector<Neighbor> neighbors(const std::string& node_id,
                                    std::optional<NodeKind> kind = std::nullopt,
                                    bool active_only = true) const;

    std::optional<NodeKind> kind_of(const std::string& node_id) const;
    bool contains(const std::string& node_id) const { return kind_of(node_id).has_value(); }

    const ObjectNode& object(const std::string& id) const;
    const SemanticNode& semantic(const std::string& id) const;
    const EpisodicNode& episodic(const std::string& id) const;

    const std::map<std::string, ObjectNode>& objects() const { return objects_; }
    const std::map<std::string, SemanticNode>& semantic_nodes() const { return semantic_; }
    const std::map<std::string, EpisodicNode>& episodic_nodes() const { return episodic_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const GraphCounters& counters() const { return counters_; }
    Timestamp clock() const { return clock_; }

    std::size_t node_count() const { return objects_.size() + semantic_.size() + episodic_.size(); }
    std::size_t active_edge_count(const std::string& src, const std::string& dst) const;

    // Snapshot document with "format_version": 1.
    std::string to_snapshot() const;
    static MemoryGraph from_snapshot(const std::string& text, GraphConfig config = {});
    void save(const std::filesystem::path& path) const;
    static MemoryGraph load(const std::filesystem::path& path, GraphConfig config = {});

    friend bool operator==(const MemoryGraph& a, const MemoryGraph& b);

private:
    void require_object(const std::string& object_ref) const;
    std::size_t add_edge(const std::string& src, const std::string& dst, EdgeKind kind, Timestamp t);
    std::optional<std::size_t> find_active_edge(const std::string& src, const std::string& dst) const;
    void observe_time(Timestamp t);

    GraphConfig config_;
    std::map<std::string, ObjectNode> objects_;
    std::map<std::string, SemanticNode> semantic_;
    std::map<std::string, EpisodicNode> episodic_;
    std::vector<Edge> edges_;
    std::map<std::string, std::vector<std::size_t>> out_edges_;
    std::map<std::string, std::vector<std::size_t>> in_edges_;
    GraphCounters counters_;
    Timestamp clock_ = 0;
};

}  // namespace polar
