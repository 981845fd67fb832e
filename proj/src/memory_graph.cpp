#include "polar/memory_graph.hpp"

#include "polar/error.hpp"
#include "polar/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace polar {

namespace {

std::string make_id(const char* prefix, std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%06llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "object->semantic") return EdgeKind::object_semantic;
    if (s == "object->episodic") return EdgeKind::object_episodic;
    throw ParseError("unknown edge kind '" + s + "'");
}

Json feature_json(const std::optional<std::vector<double>>& f) {
    if (!f) return nullptr;
    return Json(*f);
}

std::size_t line_containing(const std::string& text, const std::string& needle) {
    const auto pos = text.find(needle);
    if (pos == std::string::npos) return 0;
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + 1;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::object:   return "object";
        case NodeKind::semantic: return "semantic";
        case NodeKind::episodic: return "episodic";
    }
    return "object";
}

std::string_view to_string(EdgeKind kind) {
    return kind == EdgeKind::object_semantic ? "object->semantic" : "object->episodic";
}

void EpisodicRecord::validate() const {
    if (found_room.has_value() != success) {
        throw RejectedInput("episodic record: found_room must be present iff success");
    }
    for (const auto& r : unpromising_rooms) {
        if (std::find(room_sequence.begin(), room_sequence.end(), r) == room_sequence.end()) {
            throw RejectedInput("episodic record: unpromising room '" + r + "' not in room sequence");
        }
    }
    if (!(path_length_m >= 0.0)) throw RejectedInput("episodic record: negative path length");
}

std::optional<NodeKind> MemoryGraph::kind_of(const std::string& node_id) const {
    if (objects_.count(node_id)) return NodeKind::object;
    if (semantic_.count(node_id)) return NodeKind::semantic;
    if (episodic_.count(node_id)) return NodeKind::episodic;
    return std::nullopt;
}

const ObjectNode& MemoryGraph::object(const std::string& id) const {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw NotFound("no object node '" + id + "'");
    return it->second;
}

const SemanticNode& MemoryGraph::semantic(const std::string& id) const {
    auto it = semantic_.find(id);
    if (it == semantic_.end()) throw NotFound("no semantic node '" + id + "'");
    return it->second;
}

const EpisodicNode& MemoryGraph::episodic(const std::string& id) const {
    auto it = episodic_.find(id);
    if (it == episodic_.end()) throw NotFound("no episodic node '" + id + "'");
    return it->second;
}

void MemoryGraph::require_object(const std::string& object_ref) const {
    if (!objects_.count(object_ref)) throw NotFound("no object node '" + object_ref + "'");
}

void MemoryGraph::observe_time(Timestamp t) {
    clock_ = std::max(clock_, t);
}

std::size_t MemoryGraph::add_edge(const std::string& src, const std::string& dst,
                                  EdgeKind kind, Timestamp t) {
    const std::size_t idx = edges_.size();
    edges_.push_back(Edge{src, dst, kind, t, true});
    out_edges_[src].push_back(idx);
    in_edges_[dst].push_back(idx);
    observe_time(t);
    return idx;
}

std::optional<std::size_t> MemoryGraph::find_active_edge(const std::string& src,
                                                         const std::string& dst) const {
    auto it = out_edges_.find(src);
    if (it == out_edges_.end()) return std::nullopt;
    for (auto idx : it->second) {
        if (edges_[idx].dst == dst && edges_[idx].active) return idx;
    }
    return std::nullopt;
}

std::size_t MemoryGraph::active_edge_count(const std::string& src, const std::string& dst) const {
    auto it = out_edges_.find(src);
    if (it == out_edges_.end()) return 0;
    return static_cast<std::size_t>(std::count_if(it->second.begin(), it->second.end(), [&](std::size_t i) {
        return edges_[i].dst == dst && edges_[i].active;
    }));
}

std::string MemoryGraph::upsert_object(const std::string& category,
                                       const std::optional<std::string>& object_id,
                                       const std::optional<std::vector<double>>& reference_feature,
                                       Timestamp timestamp) {
    if (!object_id && !reference_feature) {
        throw RejectedInput("upsert_object needs an object id or a reference feature");
    }
    if (object_id && object_id->empty()) throw RejectedInput("empty object id");
    if (reference_feature && !is_unit(*reference_feature)) {
        throw RejectedInput("reference feature must be unit-norm");
    }
    if (object_id) {
        if (objects_.count(*object_id)) return *object_id;
        if (kind_of(*object_id)) throw RejectedInput("id '" + *object_id + "' already names a memory node");
    }
    if (reference_feature) {
        const std::string* best = nullptr;
        double best_cos = config_.theta_obj;
        for (const auto& [id, node] : objects_) {
            if (node.category != category || !node.reference_feature) continue;
            if (node.reference_feature->size() != reference_feature->size()) continue;
            const double c = cosine(*node.reference_feature, *reference_feature);
            if (c >= best_cos && (best == nullptr || c > best_cos)) {
                best = &id;
                best_cos = c;
            }
        }
        if (best) return *best;
    }

    std::string id;
    if (object_id) {
        id = *object_id;
    } else {
        do {
            id = make_id("obj", counters_.next_object++);
        } while (kind_of(id));
    }
    objects_.emplace(id, ObjectNode{id, category, reference_feature, timestamp});
    observe_time(timestamp);
    return id;
}

SemanticLink MemoryGraph::add_semantic(const std::string& object_ref,
                                       const std::string& statement,
                                       const Embedding& embedding,
                                       Timestamp timestamp,
                                       const std::string& fact_key) {
    require_object(object_ref);
    if (statement.empty()) throw RejectedInput("empty semantic statement");
    if (!is_unit(embedding.values)) throw RejectedInput("semantic embedding must be unit-norm");

    const SemanticNode* best = nullptr;
    double best_cos = config_.theta_dedup;
    for (const auto& [id, node] : semantic_) {
        if (node.embedding.dim() != embedding.dim()) continue;
        const double c = cosine(node.embedding, embedding);
        if (c >= best_cos && (best == nullptr || c > best_cos)) {
            best = &node;
            best_cos = c;
        }
    }

    SemanticLink link;
    if (best) {
        link.node_id = best->node_id;
    } else {
        link.node_id = make_id("sem", counters_.next_semantic++);
        semantic_.emplace(link.node_id, SemanticNode{link.node_id, statement, embedding, fact_key, timestamp});
        link.created_node = true;
    }
    if (!find_active_edge(object_ref, link.node_id)) {
        add_edge(object_ref, link.node_id, EdgeKind::object_semantic, timestamp);
        link.created_edge = true;
    }
    observe_time(timestamp);
    return link;
}

std::string MemoryGraph::add_episodic(const std::string& object_ref,
                                      const EpisodicRecord& record,
                                      Timestamp timestamp) {
    require_object(object_ref);
    record.validate();
    const std::string id = make_id("epi", counters_.next_episodic++);
    episodic_.emplace(id, EpisodicNode{id, record, timestamp});
    add_edge(object_ref, id, EdgeKind::object_episodic, timestamp);
    return id;
}

void MemoryGraph::supersede(const std::string& object_ref,
                            const std::string& old_semantic,
                            const std::string& new_semantic,
                            Timestamp timestamp) {
    require_object(object_ref);
    const auto old_edge = find_active_edge(object_ref, old_semantic);
    if (!old_edge) {
        throw NotFound("no active edge " + object_ref + " -> " + old_semantic);
    }
    if (!semantic_.count(new_semantic)) throw NotFound("no semantic node '" + new_semantic + "'");
    edges_[*old_edge].active = false;
    if (auto cur = find_active_edge(object_ref, new_semantic)) {
        edges_[*cur].timestamp = timestamp;
        observe_time(timestamp);
    } else {
        add_edge(object_ref, new_semantic, EdgeKind::object_semantic, timestamp);
    }
}

std::vector<Neighbor> MemoryGraph::neighbors(const std::string& node_id,
                                             std::optional<NodeKind> kind,
                                             bool active_only) const {
    const auto own = kind_of(node_id);
    if (!own) throw NotFound("no node '" + node_id + "'");
    const bool outgoing = *own == NodeKind::object;
    const auto& index = outgoing ? out_edges_ : in_edges_;

    std::vector<Neighbor> out;
    if (auto it = index.find(node_id); it != index.end()) {
        for (auto idx : it->second) {
            const Edge& e = edges_[idx];
            if (active_only && !e.active) continue;
            const std::string& other = outgoing ? e.dst : e.src;
            if (kind && kind_of(other) != kind) continue;
            out.push_back(Neighbor{other, e.timestamp, e.active});
        }
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
        if (a.node_id != b.node_id) return a.node_id < b.node_id;
        return a.active > b.active;
    });
    return out;
}

std::string MemoryGraph::to_snapshot() const {
    // One node or edge per line so parse errors point somewhere useful.
    std::ostringstream ss;
    ss << "{\n\"format_version\": 1,\n";
    ss << "\"counters\": "
       << Json{{"next_object", counters_.next_object},
               {"next_semantic", counters_.next_semantic},
               {"next_episodic", counters_.next_episodic}}.dump()
       << ",\n";
    ss << "\"clock\": " << clock_ << ",\n";

    auto write_array = [&ss](const char* name, const std::vector<Json>& rows, bool last) {
        ss << "\"" << name << "\": [";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ss << (i ? ",\n" : "\n") << rows[i].dump();
        }
        ss << (rows.empty() ? "]" : "\n]") << (last ? "\n" : ",\n");
    };

    std::vector<Json> rows;
    for (const auto& [id, n] : objects_) {
        rows.push_back(Json{{"object_id", n.object_id},
                            {"category", n.category},
                            {"reference_feature", feature_json(n.reference_feature)},
                            {"created_at", n.created_at}});
    }
    write_array("objects", rows, false);

    rows.clear();
    for (const auto& [id, n] : semantic_) {
        rows.push_back(Json{{"node_id", n.node_id},
                            {"statement", n.statement},
                            {"fact_key", n.fact_key},
                            {"embedding", n.embedding.values},
                            {"created_at", n.created_at}});
    }
    write_array("semantic", rows, false);

    rows.clear();
    for (const auto& [id, n] : episodic_) {
        const auto& r = n.record;
        rows.push_back(Json{{"node_id", n.node_id},
                            {"episode_id", r.episode_id},
                            {"instruction", r.instruction},
                            {"success", r.success},
                            {"room_sequence", r.room_sequence},
                            {"unpromising_rooms", r.unpromising_rooms},
                            {"found_room", r.found_room ? Json(*r.found_room) : Json(nullptr)},
                            {"path_length_m", r.path_length_m},
                            {"rendered_text", r.rendered_text},
                            {"created_at", n.created_at}});
    }
    write_array("episodic", rows, false);

    rows.clear();
    for (const auto& e : edges_) {
        rows.push_back(Json{{"src", e.src},
                            {"dst", e.dst},
                            {"kind", std::string(to_string(e.kind))},
                            {"timestamp", e.timestamp},
                            {"active", e.active}});
    }
    write_array("edges", rows, true);
    ss << "}\n";
    return ss.str();
}

MemoryGraph MemoryGraph::from_snapshot(const std::string& text, GraphConfig config) {
    const Json doc = parse_json_document(text);
    MemoryGraph g(config);
    try {
        if (doc.at("format_version").get<int>() != 1) {
            throw ParseError("unsupported format_version", line_containing(text, "format_version"));
        }
        const auto& c = doc.at("counters");
        g.counters_.next_object = c.at("next_object").get<std::uint64_t>();
        g.counters_.next_semantic = c.at("next_semantic").get<std::uint64_t>();
        g.counters_.next_episodic = c.at("next_episodic").get<std::uint64_t>();
        g.clock_ = doc.at("clock").get<Timestamp>();

        auto check_unique = [&](const std::string& id) {
            if (g.kind_of(id)) throw ParseError("duplicate node id '" + id + "'", line_containing(text, "\"" + id + "\""));
        };

        for (const auto& o : doc.at("objects")) {
            ObjectNode n;
            n.object_id = o.at("object_id").get<std::string>();
            n.category = o.at("category").get<std::string>();
            if (!o.at("reference_feature").is_null()) {
                n.reference_feature = o.at("reference_feature").get<std::vector<double>>();
            }
            n.created_at = o.at("created_at").get<Timestamp>();
            check_unique(n.object_id);
            g.objects_.emplace(n.object_id, std::move(n));
        }
        for (const auto& s : doc.at("semantic")) {
            SemanticNode n;
            n.node_id = s.at("node_id").get<std::string>();
            n.statement = s.at("statement").get<std::string>();
            n.fact_key = s.at("fact_key").get<std::string>();
            n.embedding.values = s.at("embedding").get<std::vector<double>>();
            n.created_at = s.at("created_at").get<Timestamp>();
            check_unique(n.node_id);
            g.semantic_.emplace(n.node_id, std::move(n));
        }
        for (const auto& e : doc.at("episodic")) {
            EpisodicNode n;
            n.node_id = e.at("node_id").get<std::string>();
            n.record.episode_id = e.at("episode_id").get<std::string>();
            n.record.instruction = e.at("instruction").get<std::string>();
            n.record.success = e.at("success").get<bool>();
            n.record.room_sequence = e.at("room_sequence").get<std::vector<std::string>>();
            n.record.unpromising_rooms = e.at("unpromising_rooms").get<std::vector<std::string>>();
            if (!e.at("found_room").is_null()) n.record.found_room = e.at("found_room").get<std::string>();
            n.record.path_length_m = e.at("path_length_m").get<double>();
            n.record.rendered_text = e.at("rendered_text").get<std::string>();
            n.created_at = e.at("created_at").get<Timestamp>();
            check_unique(n.node_id);
            g.episodic_.emplace(n.node_id, std::move(n));
        }
        for (const auto& e : doc.at("edges")) {
            Edge edge;
            edge.src = e.at("src").get<std::string>();
            edge.dst = e.at("dst").get<std::string>();
            edge.kind = edge_kind_from_string(e.at("kind").get<std::string>());
            edge.timestamp = e.at("timestamp").get<Timestamp>();
            edge.active = e.at("active").get<bool>();
            const std::string where = "\"src\":\"" + edge.src + "\",\"dst\":\"" + edge.dst + "\"";
            if (!g.objects_.count(edge.src)) {
                throw ParseError("dangling edge source '" + edge.src + "'", line_containing(text, where));
            }
            const auto dst_kind = g.kind_of(edge.dst);
            if (!dst_kind) throw ParseError("dangling edge target '" + edge.dst + "'", line_containing(text, where));
            const NodeKind expected = edge.kind == EdgeKind::object_semantic ? NodeKind::semantic : NodeKind::episodic;
            if (*dst_kind != expected) throw ParseError("edge kind does not match target node", line_containing(text, where));
            if (edge.active && g.find_active_edge(edge.src, edge.dst)) {
                throw ParseError("two active edges for one node pair", line_containing(text, where));
            }
            const std::size_t idx = g.edges_.size();
            g.out_edges_[edge.src].push_back(idx);
            g.in_edges_[edge.dst].push_back(idx);
            g.edges_.push_back(std::move(edge));
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed graph snapshot: ") + e.what());
    }
    return g;
}

void MemoryGraph::save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_snapshot());
}

MemoryGraph MemoryGraph::load(const std::filesystem::path& path, GraphConfig config) {
    return from_snapshot(read_file(path), config);
}

bool operator==(const MemoryGraph& a, const MemoryGraph& b) {
    return a.objects_ == b.objects_ && a.semantic_ == b.semantic_ && a.episodic_ == b.episodic_ &&
           a.edges_ == b.edges_ && a.counters_ == b.counters_ && a.clock_ == b.clock_;
}

}  // namespace polar
