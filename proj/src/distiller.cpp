#include "polar/distiller.hpp"

#include "polar/error.hpp"
#include "polar/http.hpp"

#include <algorithm>
#include <cstdio>

namespace polar {

namespace {

constexpr std::string_view kPrefix = "user: ";
constexpr std::string_view kAssign = " = ";
constexpr std::string_view kRefers = " refers to ";

struct RemoteDistillation {
    std::vector<SemanticStatement> statements;
    std::string summary_text;
};

RemoteDistillation distill_remote(const EpisodeLog& episode, const DistillerConfig& config) {
    const Json body = {{"instruction", episode.instruction}, {"trajectory_text", render_trajectory(episode)}};
    auto res = post_json(config.endpoint, body.dump(), config.timeout);
    if (!res) throw DistillerUnavailable("distiller endpoint unreachable or timed out: " + config.endpoint);
    if (res->status < 200 || res->status >= 300) {
        throw DistillerUnavailable("distiller returned HTTP " + std::to_string(res->status));
    }
    RemoteDistillation out;
    try {
        const auto doc = Json::parse(res->body);
        for (const auto& s : doc.at("statements")) {
            SemanticStatement st;
            st.object_id = episode.target_object_id;
            st.text = s.at("text").get<std::string>();
            st.source_fact_key = s.at("fact_key").get<std::string>();
            if (st.text.empty() || st.source_fact_key.empty()) {
                throw DistillerUnavailable("distiller statement must carry text and exactly one fact key");
            }
            st.supersedes_key = st.source_fact_key;
            out.statements.push_back(std::move(st));
        }
        out.summary_text = doc.at("summary_text").get<std::string>();
    } catch (const Json::exception& e) {
        throw DistillerUnavailable(std::string("malformed distiller response: ") + e.what());
    }
    return out;
}

std::string format_length(double m) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", m);
    return buf;
}

std::string join(const std::vector<std::string>& xs, char sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

}  // namespace

std::string render_statement(const Fact& fact, const std::string& category, const std::string& object_id) {
    std::string out(kPrefix);
    out += fact.key;
    out += kAssign;
    out += fact.value;
    out += kRefers;
    out += category;
    out += ' ';
    out += object_id;
    return out;
}

std::optional<Fact> parse_statement(const std::string& text) {
    if (text.rfind(kPrefix, 0) != 0) return std::nullopt;
    const auto assign = text.find(kAssign, kPrefix.size());
    if (assign == std::string::npos) return std::nullopt;
    const auto refers = text.find(kRefers, assign + kAssign.size());
    if (refers == std::string::npos) return std::nullopt;
    return Fact{text.substr(kPrefix.size(), assign - kPrefix.size()),
                text.substr(assign + kAssign.size(), refers - assign - kAssign.size())};
}

std::vector<SemanticStatement> distill_semantic(const EpisodeLog& episode, const DistillerConfig& config) {
    if (config.mode == DistillerMode::remote) return distill_remote(episode, config).statements;
    std::vector<SemanticStatement> out;
    out.reserve(episode.facts.size());
    for (const auto& f : episode.facts) {
        out.push_back(SemanticStatement{episode.target_object_id,
                                        render_statement(f, episode.target_category, episode.target_object_id),
                                        f.key,
                                        f.key});
    }
    return out;
}

EpisodicSummary summarize_episodic(const EpisodeLog& episode) {
    if (episode.trajectory.empty()) throw RejectedInput("episode " + episode.episode_id + ": empty trajectory");
    EpisodicSummary s;
    s.episode_id = episode.episode_id;
    s.instruction = episode.instruction;
    s.success = episode.success;
    for (const auto& step : episode.trajectory) {
        if (std::find(s.room_sequence.begin(), s.room_sequence.end(), step.room) == s.room_sequence.end()) {
            s.room_sequence.push_back(step.room);
        }
    }
    if (episode.success) s.found_room = episode.trajectory.back().room;
    for (const auto& r : s.room_sequence) {
        if (!s.found_room || r != *s.found_room) s.unpromising_rooms.push_back(r);
    }
    s.path_length_m = 1.0 * static_cast<double>(effective_forward_moves(episode));
    s.rendered_text = std::string("outcome=") + (s.success ? "success" : "failure") +
                      "; searched=" + join(s.room_sequence, ',') +
                      "; found_in=" + (s.found_room ? *s.found_room : std::string("none")) +
                      "; length=" + format_length(s.path_length_m) + "m";
    return s;
}

MutationReport memorize(const EpisodeLog& episode,
                        MemoryGraph& graph,
                        const EncoderConfig& encoder,
                        const DistillerConfig& distiller) {
    episode.validate();
    const Timestamp t = episode.timestamp;
    MutationReport report;

    const std::size_t nodes_before = graph.node_count();
    const std::size_t edges_before = graph.edges().size();

    std::vector<SemanticStatement> statements;
    EpisodicSummary summary = summarize_episodic(episode);
    if (distiller.mode == DistillerMode::remote) {
        auto remote = distill_remote(episode, distiller);
        statements = std::move(remote.statements);
        summary.rendered_text = std::move(remote.summary_text);
    } else {
        statements = distill_semantic(episode, distiller);
    }

    report.object_node = graph.upsert_object(
        episode.target_category,
        episode.target_object_id.empty() ? std::nullopt : std::optional<std::string>(episode.target_object_id),
        episode.reference_feature, t);

    std::vector<std::string> texts;
    texts.reserve(statements.size());
    for (const auto& s : statements) texts.push_back(s.text);
    const auto embeddings = encode_batch(encoder, texts);

    for (std::size_t i = 0; i < statements.size(); ++i) {
        const auto& st = statements[i];
        std::optional<std::string> previous;
        if (st.supersedes_key) {
            for (const auto& n : graph.neighbors(report.object_node, NodeKind::semantic, true)) {
                const auto& node = graph.semantic(n.node_id);
                if (node.fact_key == *st.supersedes_key && node.statement != st.text) {
                    previous = n.node_id;
                    break;
                }
            }
        }
        const auto link = graph.add_semantic(report.object_node, st.text, embeddings[i], t, st.source_fact_key);
        if (previous && *previous != link.node_id) {
            graph.supersede(report.object_node, *previous, link.node_id, t);
            ++report.supersessions;
        }
    }

    graph.add_episodic(report.object_node, summary, t);

    report.nodes_created = graph.node_count() - nodes_before;
    report.edges_created = graph.edges().size() - edges_before;
    return report;
}

}  // namespace polar
