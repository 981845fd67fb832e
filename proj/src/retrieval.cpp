#include "polar/retrieval.hpp"

#include "polar/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace polar {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(to_lower(text));
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::vector<SemanticHit> retrieve_semantic(const MemoryGraph& graph,
                                           const Embedding& query,
                                           const RetrievalOptions& options) {
    if (options.k < 1) throw RejectedInput("retrieval k must be >= 1");
    std::vector<SemanticHit> hits;
    for (const auto& [id, node] : graph.semantic_nodes()) {
        const auto links = graph.neighbors(id, NodeKind::object, options.active_only);
        if (links.empty()) continue;
        SemanticHit hit;
        hit.node_id = id;
        hit.score = node.embedding.dim() == query.dim() ? cosine(node.embedding, query) : 0.0;
        hit.timestamp = links.front().timestamp;
        for (const auto& l : links) {
            if (std::find(hit.object_ids.begin(), hit.object_ids.end(), l.node_id) == hit.object_ids.end()) {
                hit.object_ids.push_back(l.node_id);
            }
        }
        std::sort(hit.object_ids.begin(), hit.object_ids.end());
        hits.push_back(std::move(hit));
    }
    const bool recency = options.recency_tiebreak;
    std::sort(hits.begin(), hits.end(), [recency](const SemanticHit& a, const SemanticHit& b) {
        if (a.score != b.score) return a.score > b.score;
        if (recency && a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
        return a.node_id < b.node_id;
    });
    if (hits.size() > options.k) hits.resize(options.k);
    return hits;
}

std::vector<SemanticHit> retrieve_semantic(const MemoryGraph& graph,
                                           const std::string& instruction,
                                           const EncoderConfig& encoder,
                                           const RetrievalOptions& options) {
    return retrieve_semantic(graph, encode(encoder, instruction), options);
}

std::vector<CandidateObject> assemble_candidates(const MemoryGraph& graph,
                                                 const std::vector<SemanticHit>& hits,
                                                 const Embedding& query) {
    std::set<std::string> hit_ids;
    for (const auto& h : hits) hit_ids.insert(h.node_id);

    std::vector<CandidateObject> out;
    std::set<std::string> seen;
    for (const auto& hit : hits) {
        for (const auto& link : graph.neighbors(hit.node_id, NodeKind::object, true)) {
            if (!seen.insert(link.node_id).second) continue;
            const auto& obj = graph.object(link.node_id);
            CandidateObject cand;
            cand.object_id = obj.object_id;
            cand.category = obj.category;
            for (const auto& s : graph.neighbors(obj.object_id, NodeKind::semantic, true)) {
                const auto& node = graph.semantic(s.node_id);
                const double score = node.embedding.dim() == query.dim() ? cosine(node.embedding, query) : 0.0;
                cand.statements.push_back(
                    CandidateStatement{node.node_id, node.statement, score, s.timestamp, true, hit_ids.count(node.node_id) > 0});
            }
            std::sort(cand.statements.begin(), cand.statements.end(),
                      [](const CandidateStatement& a, const CandidateStatement& b) {
                          if (a.score != b.score) return a.score > b.score;
                          if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
                          return a.node_id < b.node_id;
                      });
            for (const auto& e : graph.neighbors(obj.object_id, NodeKind::episodic, true)) {
                const auto& node = graph.episodic(e.node_id);
                cand.episodic_memories.push_back(
                    CandidateMemory{node.record.episode_id, e.timestamp, node.record.rendered_text, node.record});
                cand.instructions.push_back(node.record.instruction);
            }
            out.push_back(std::move(cand));
        }
    }
    return out;
}

RetrievalResult retrieve(const MemoryGraph& graph,
                         const std::string& instruction,
                         const EncoderConfig& encoder,
                         const RetrievalOptions& options) {
    RetrievalResult result;
    result.instruction = instruction;
    const Embedding query = encode(encoder, instruction);
    result.hits = retrieve_semantic(graph, query, options);
    result.candidates = assemble_candidates(graph, result.hits, query);
    return result;
}

std::vector<double> bm25_scores(const std::vector<std::string>& documents,
                                const std::string& query,
                                const Bm25Params& params) {
    const std::size_t n_docs = documents.size();
    std::vector<std::unordered_map<std::string, int>> tf(n_docs);
    std::vector<double> lengths(n_docs, 0.0);
    std::unordered_map<std::string, int> df;
    double total_len = 0.0;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto toks = whitespace_tokens(documents[i]);
        lengths[i] = static_cast<double>(toks.size());
        total_len += lengths[i];
        for (const auto& t : toks) tf[i][t] += 1;
        for (const auto& [t, c] : tf[i]) df[t] += 1;
    }
    const double avg_len = n_docs ? total_len / static_cast<double>(n_docs) : 0.0;

    std::set<std::string> terms;
    for (const auto& t : whitespace_tokens(query)) terms.insert(t);

    std::vector<double> scores(n_docs, 0.0);
    for (const auto& term : terms) {
        auto it = df.find(term);
        if (it == df.end()) continue;
        const double n = it->second;
        const double idf = std::log(1.0 + (static_cast<double>(n_docs) - n + 0.5) / (n + 0.5));
        for (std::size_t i = 0; i < n_docs; ++i) {
            auto f = tf[i].find(term);
            if (f == tf[i].end()) continue;
            const double freq = f->second;
            const double norm = avg_len > 0.0 ? lengths[i] / avg_len : 0.0;
            scores[i] += idf * freq * (params.k1 + 1.0) / (freq + params.k1 * (1.0 - params.b + params.b * norm));
        }
    }
    return scores;
}

std::vector<RawHit> raw_retrieve(const std::vector<EpisodeLog>& episodes,
                                 const std::string& instruction,
                                 std::size_t k,
                                 RawMode mode,
                                 const EncoderConfig& encoder,
                                 const Bm25Params& bm25) {
    if (k < 1) throw RejectedInput("retrieval k must be >= 1");
    if (episodes.empty()) return {};
    std::vector<std::string> docs;
    docs.reserve(episodes.size());
    for (const auto& e : episodes) docs.push_back(raw_document(e));

    std::vector<double> scores;
    if (mode == RawMode::bm25) {
        scores = bm25_scores(docs, instruction, bm25);
    } else {
        const Embedding q = encode(encoder, instruction);
        const auto embs = encode_batch(encoder, docs);
        for (const auto& e : embs) scores.push_back(cosine(q, e));
    }

    std::vector<RawHit> hits;
    for (std::size_t i = 0; i < episodes.size(); ++i) hits.push_back({episodes[i].episode_id, scores[i]});
    std::sort(hits.begin(), hits.end(), [](const RawHit& a, const RawHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.episode_id < b.episode_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

int recall_at_k(const RetrievalResult& result, const std::string& gold_object_id) {
    if (gold_object_id.empty()) throw RejectedInput("gold object id is empty");
    for (const auto& c : result.candidates) {
        if (c.object_id == gold_object_id) return 1;
    }
    return 0;
}

int recall_at_k(const std::vector<RawHit>& hits, const std::vector<std::string>& gold_episode_ids) {
    if (gold_episode_ids.empty()) throw RejectedInput("gold episode ids are empty");
    for (const auto& g : gold_episode_ids) {
        if (g.empty()) throw RejectedInput("gold episode id is empty");
        const bool found = std::any_of(hits.begin(), hits.end(), [&](const RawHit& h) { return h.episode_id == g; });
        if (!found) return 0;
    }
    return 1;
}

}  // namespace polar
