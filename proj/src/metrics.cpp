#include "polar/metrics.hpp"

#include "polar/error.hpp"
#include "polar/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace polar {

namespace {

template <typename F>
double mean_of(const std::vector<EpisodeRow>& rows, F f) {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rows) s += f(r);
    return s / static_cast<double>(rows.size());
}

Json metric(const MetricsReport& r, double v) {
    return r.n() == 0 ? Json("n/a") : Json(v);
}

std::string fmt(const MetricsReport& r, double v) {
    if (r.n() == 0) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

double spl_term(bool success, double p, double l) {
    if (!success || !std::isfinite(l)) return 0.0;
    const double denom = std::max(p, l);
    return denom > 0.0 ? l / denom : 1.0;
}

double MetricsReport::sr() const {
    return mean_of(rows, [](const EpisodeRow& r) { return r.success ? 1.0 : 0.0; });
}

double MetricsReport::spl() const {
    return mean_of(rows, [](const EpisodeRow& r) { return spl_term(r.success, r.path_length_m, r.shortest_m); });
}

double MetricsReport::cm() const {
    return mean_of(rows, [](const EpisodeRow& r) { return r.category_match ? 1.0 : 0.0; });
}

double MetricsReport::mean_path_length() const {
    return mean_of(rows, [](const EpisodeRow& r) { return r.path_length_m; });
}

double MetricsReport::recall_semantic() const {
    return mean_of(rows, [](const EpisodeRow& r) { return static_cast<double>(r.recall_semantic); });
}

double MetricsReport::recall_bm25() const {
    return mean_of(rows, [](const EpisodeRow& r) { return static_cast<double>(r.recall_bm25); });
}

double MetricsReport::recall_dense() const {
    return mean_of(rows, [](const EpisodeRow& r) { return static_cast<double>(r.recall_dense); });
}

std::vector<EpisodeLog> sample_raw_episodes(const ScenarioSpec& spec,
                                            const std::vector<EpisodeLog>& logs,
                                            std::size_t n,
                                            std::uint64_t seed) {
    const std::set<std::string> gold(spec.gold_episode_ids.begin(), spec.gold_episode_ids.end());
    std::vector<EpisodeLog> chosen;
    std::vector<const EpisodeLog*> rest;
    for (const auto& l : logs) {
        if (gold.count(l.episode_id)) {
            chosen.push_back(l);
        } else {
            rest.push_back(&l);
        }
    }
    if (chosen.size() != gold.size()) throw ConfigurationError(spec.scenario_id + ": gold episode missing from logs");
    Rng rng(derive_seed(seed, xxhash64(spec.scenario_id)));
    rng.shuffle(rest);
    for (const auto* l : rest) {
        if (chosen.size() >= std::max(n, gold.size())) break;
        chosen.push_back(*l);
    }
    std::sort(chosen.begin(), chosen.end(), [](const EpisodeLog& a, const EpisodeLog& b) { return a.episode_id < b.episode_id; });
    return chosen;
}

GroundingContext build_context(const ScenarioSpec& spec, const World& world,
                               const EvalMemory& memory, const EvalOptions& options) {
    GroundingContext ctx;
    ctx.world_categories = world.categories();
    switch (options.run.mode) {
        case RunMode::no_prior:
            ctx.source = GroundingSource::none;
            return ctx;
        case RunMode::raw_interaction: {
            auto it = memory.logs.find(spec.scenario_id);
            if (it == memory.logs.end()) throw ConfigurationError(spec.scenario_id + ": no acquisition logs for raw-interaction mode");
            ctx.source = GroundingSource::raw;
            ctx.raw_episodes = sample_raw_episodes(spec, it->second, options.raw_sample, options.run.seed);
            return ctx;
        }
        case RunMode::polar:
            break;
    }
    auto g = memory.graphs.find(spec.scenario_id);
    if (g == memory.graphs.end()) throw ConfigurationError(spec.scenario_id + ": polar mode requires a memorized graph");
    ctx.source = GroundingSource::polar;
    RetrievalOptions ropt;
    ropt.k = options.run.k;
    RetrievalResult result = retrieve(g->second, spec.eval_instruction, options.encoder, ropt);

    std::map<std::string, const EpisodeLog*> by_id;
    if (auto l = memory.logs.find(spec.scenario_id); l != memory.logs.end()) {
        for (const auto& e : l->second) by_id[e.episode_id] = &e;
    }
    for (auto& cand : result.candidates) {
        switch (options.run.ablation) {
            case Ablation::full_episodic:
                break;
            case Ablation::instruction_only:
                cand.episodic_memories.clear();
                break;
            case Ablation::summary_text:
                for (auto& m : cand.episodic_memories) m.record.reset();
                break;
            case Ablation::raw_trajectory:
                for (auto& m : cand.episodic_memories) {
                    auto e = by_id.find(m.episode_id);
                    if (e == by_id.end()) throw ConfigurationError(m.episode_id + ": raw-trajectory ablation needs the acquisition log");
                    m.text = render_trajectory(*e->second);
                    m.record.reset();
                }
                break;
        }
    }
    ctx.retrieval = std::move(result);
    return ctx;
}

MetricsReport evaluate(const std::vector<ScenarioSpec>& specs, const EvalMemory& memory, const EvalOptions& options) {
    options.run.validate();
    MetricsReport report;
    report.mode = std::string(to_string(options.run.mode));
    report.ablation = options.run.mode == RunMode::polar ? std::string(to_string(options.run.ablation)) : "";
    report.k = options.run.k;
    std::set<std::string> kinds;
    for (const auto& s : specs) kinds.insert(std::string(to_string(s.kind)));
    report.kind = kinds.size() == 1 ? *kinds.begin() : (kinds.empty() ? "none" : "mixed");

    OraclePlanner oracle(options.encoder);
    NaiveMatcher matcher(options.encoder);
    Planner& planner = options.planner ? *options.planner
                                       : (options.run.mode == RunMode::raw_interaction ? static_cast<Planner&>(matcher)
                                                                                       : static_cast<Planner&>(oracle));

    std::vector<const ScenarioSpec*> ordered;
    for (const auto& s : specs) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const ScenarioSpec* a, const ScenarioSpec* b) { return a->scenario_id < b->scenario_id; });

    for (const ScenarioSpec* spec : ordered) {
        const World world = evaluation_world(*spec);
        const SceneGraph scene = build_scene_graph(world);
        const GroundingContext ctx = build_context(*spec, world, memory, options);

        EpisodeRow row;
        row.scenario_id = spec->scenario_id;
        if (auto g = memory.graphs.find(spec->scenario_id); g != memory.graphs.end()) {
            RetrievalOptions ropt;
            ropt.k = options.run.k;
            row.recall_semantic = recall_at_k(retrieve(g->second, spec->eval_instruction, options.encoder, ropt), spec->gold_object_id);
        }
        if (auto l = memory.logs.find(spec->scenario_id); l != memory.logs.end()) {
            row.recall_bm25 = recall_at_k(raw_retrieve(l->second, spec->eval_instruction, options.run.k, RawMode::bm25, options.encoder), spec->gold_episode_ids);
            row.recall_dense = recall_at_k(raw_retrieve(l->second, spec->eval_instruction, options.run.k, RawMode::dense, options.encoder), spec->gold_episode_ids);
        }
        if (options.only_retrieval_hits && !(row.recall_semantic && row.recall_dense)) continue;

        Timestamp latest = 0;
        for (const auto& s : spec->scripts) latest = std::max(latest, s.timestamp);
        EpisodeRequest req;
        req.episode_id = spec->scenario_id + "-eval";
        req.timestamp = latest + 1;
        req.instruction = spec->eval_instruction;
        req.gold_object_id = spec->gold_object_id;
        req.start = spec->eval_start;
        const EpisodeOutcome out = run_episode(world, scene, req, ctx, planner, options.run);

        const ObjectInstance* gold = world.find_object(spec->gold_object_id);
        const Vec2 end = out.log.final_position;
        row.success = out.log.success;
        row.path_length_m = out.path_length_m;
        row.shortest_m = shortest_path_length(world, spec->eval_start.position, gold->position);
        row.chosen_object_id = out.final_target;
        row.grounding_correct = out.final_target == spec->gold_object_id;
        row.steps = out.steps;
        row.failure_reason = out.log.failure_reason;
        const bool at_gold = distance(end, gold->position) <= options.run.success_radius_m;
        bool at_other = false;
        for (const auto& o : world.objects()) {
            if (o.category == gold->category && o.object_id != gold->object_id &&
                distance(end, o.position) <= options.run.success_radius_m) {
                at_other = true;
            }
        }
        row.category_match = at_other && !at_gold;
        report.rows.push_back(std::move(row));
    }
    return report;
}

Json to_json(const MetricsReport& r) {
    Json rows = Json::array();
    for (const auto& e : r.rows) {
        rows.push_back({{"scenario_id", e.scenario_id},
                        {"success", e.success},
                        {"path_length_m", e.path_length_m},
                        {"shortest_m", std::isfinite(e.shortest_m) ? Json(e.shortest_m) : Json(nullptr)},
                        {"grounding_correct", e.grounding_correct},
                        {"category_match", e.category_match},
                        {"chosen_object_id", e.chosen_object_id},
                        {"steps", e.steps},
                        {"recall_semantic", e.recall_semantic},
                        {"recall_bm25", e.recall_bm25},
                        {"recall_dense", e.recall_dense},
                        {"failure_reason", e.failure_reason ? Json(*e.failure_reason) : Json(nullptr)}});
    }
    return {{"mode", r.mode},
            {"ablation", r.ablation},
            {"kind", r.kind},
            {"N", r.n()},
            {"SR", metric(r, r.sr())},
            {"SPL", metric(r, r.spl())},
            {"CM", metric(r, r.cm())},
            {"mean_path_length_m", metric(r, r.mean_path_length())},
            {"recall_at_k",
             {{"k", r.k},
              {"semantic", metric(r, r.recall_semantic())},
              {"bm25", metric(r, r.recall_bm25())},
              {"dense", metric(r, r.recall_dense())}}},
            {"rows", rows}};
}

MetricsReport report_from_json(const Json& j) {
    try {
        MetricsReport r;
        r.mode = j.at("mode").get<std::string>();
        r.ablation = j.at("ablation").get<std::string>();
        r.kind = j.at("kind").get<std::string>();
        r.k = j.at("recall_at_k").at("k").get<std::size_t>();
        for (const auto& e : j.at("rows")) {
            EpisodeRow row;
            row.scenario_id = e.at("scenario_id").get<std::string>();
            row.success = e.at("success").get<bool>();
            row.path_length_m = e.at("path_length_m").get<double>();
            row.shortest_m = e.at("shortest_m").is_null() ? kUnreachable : e.at("shortest_m").get<double>();
            row.grounding_correct = e.at("grounding_correct").get<bool>();
            row.category_match = e.at("category_match").get<bool>();
            row.chosen_object_id = e.at("chosen_object_id").get<std::string>();
            row.steps = e.at("steps").get<int>();
            row.recall_semantic = e.at("recall_semantic").get<int>();
            row.recall_bm25 = e.at("recall_bm25").get<int>();
            row.recall_dense = e.at("recall_dense").get<int>();
            if (!e.at("failure_reason").is_null()) row.failure_reason = e.at("failure_reason").get<std::string>();
            r.rows.push_back(std::move(row));
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed metrics report: ") + e.what());
    }
}

std::string render_table(const std::vector<MetricsReport>& reports) {
    std::size_t k = reports.empty() ? 5 : reports.front().k;
    const std::string recall_header = "recall@" + std::to_string(k) + " (sem/bm25/dense)";
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-30s %-22s %6s %6s %6s  %s\n", "mode", "kind", "SR", "SPL", "CM", recall_header.c_str());
    out += line;
    for (const auto& r : reports) {
        const std::string mode = r.ablation.empty() || r.ablation == "full-episodic" ? r.mode : r.mode + "/" + r.ablation;
        const std::string recall = r.n() == 0 ? "n/a" : fmt(r, r.recall_semantic()) + "/" + fmt(r, r.recall_bm25()) + "/" + fmt(r, r.recall_dense());
        std::snprintf(line, sizeof(line), "%-30s %-22s %6s %6s %6s  %s\n", mode.c_str(), r.kind.c_str(),
                      fmt(r, r.sr()).c_str(), fmt(r, r.spl()).c_str(), fmt(r, r.cm()).c_str(), recall.c_str());
        out += line;
    }
    return out;
}

void report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir) {
    Json all = Json::array();
    for (const auto& r : reports) all.push_back(to_json(r));
    write_file_atomic(dir / "metrics.json", Json{{"format_version", 1}, {"reports", all}}.dump(2) + "\n");
    write_file_atomic(dir / "table.txt", render_table(reports));
}

void report(const MetricsReport& r, const std::filesystem::path& dir) {
    report(std::vector<MetricsReport>{r}, dir);
}

}  // namespace polar
