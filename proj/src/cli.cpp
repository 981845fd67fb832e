#include "polar/cli.hpp"

#include "polar/distiller.hpp"
#include "polar/error.hpp"
#include "polar/metrics.hpp"
#include "polar/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <memory>

namespace polar {

namespace {

namespace fs = std::filesystem;

struct CliConfig {
    std::uint64_t seed = 0;
    int rooms = 5;
    std::vector<std::string> kinds;
    int n = 50;
    int fillers = 12;
    int distractors = 3;
    std::string encoder = "builtin";
    std::string encoder_endpoint;
    std::size_t encoder_dimension = 256;
    std::string distiller = "builtin";
    std::string distiller_endpoint;
    std::string planner = "oracle";
    std::string planner_endpoint;
    std::size_t k = 5;
    double theta_dedup = 0.92;
    double theta_obj = 0.95;
    std::vector<std::string> modes = {"no-prior", "raw-interaction", "polar"};
    std::vector<std::string> ablations = {"full-episodic", "instruction-only", "raw-trajectory", "summary-text"};
    int max_steps = 700;
    bool only_retrieval_hits = false;
    std::string out = "polar_out";

    std::vector<ScenarioKind> kind_list() const {
        if (kinds.empty()) return all_scenario_kinds();
        std::vector<ScenarioKind> out_kinds;
        for (const auto& k : kinds) out_kinds.push_back(scenario_kind_from_string(k));
        return out_kinds;
    }

    EncoderConfig encoder_config() const {
        EncoderConfig c;
        c.mode = encoder == "remote" ? EncoderMode::remote : EncoderMode::builtin;
        c.endpoint = encoder_endpoint;
        c.dimension = encoder_dimension;
        c.validate();
        return c;
    }

    DistillerConfig distiller_config() const {
        DistillerConfig c;
        c.mode = distiller == "remote" ? DistillerMode::remote : DistillerMode::builtin;
        c.endpoint = distiller_endpoint;
        if (c.mode == DistillerMode::remote && c.endpoint.empty()) throw ConfigurationError("remote distiller requires --distiller-endpoint");
        return c;
    }

    RunConfig run_config() const {
        RunConfig r;
        r.max_steps = max_steps;
        r.k = k;
        r.seed = seed;
        r.validate();
        return r;
    }

    std::unique_ptr<Planner> make_planner() const {
        if (planner == "remote") return std::make_unique<RemotePlanner>(RemotePlannerConfig{planner_endpoint, std::chrono::milliseconds(10000)});
        return std::make_unique<OraclePlanner>(encoder_config());
    }
};

struct Paths {
    std::string specs;
    std::string logs;
    std::string memory;
};

fs::path or_default(const std::string& given, const fs::path& fallback) {
    return given.empty() ? fallback : fs::path(given);
}

std::vector<ScenarioSpec> load_specs(const fs::path& path) {
    return parse_scenarios(read_file(path));
}

std::map<std::string, std::vector<EpisodeLog>> group_logs(const std::vector<ScenarioSpec>& specs,
                                                          const std::vector<EpisodeLog>& logs) {
    std::map<std::string, const EpisodeLog*> by_id;
    for (const auto& l : logs) by_id[l.episode_id] = &l;
    std::map<std::string, std::vector<EpisodeLog>> out;
    for (const auto& s : specs) {
        auto& group = out[s.scenario_id];
        for (const auto& script : s.scripts) {
            auto it = by_id.find(script.episode_id);
            if (it == by_id.end()) throw ConfigurationError("no acquisition log for " + script.episode_id + "; run `acquire` first");
            group.push_back(*it->second);
        }
    }
    return out;
}

void write_world_files(const std::vector<ScenarioSpec>& specs, const fs::path& dir) {
    for (const auto& s : specs) write_file_atomic(dir / (s.scenario_id + ".json"), to_json(acquisition_world(s)).dump() + "\n");
}

std::vector<ScenarioSpec> gen_all(const CliConfig& cfg, const std::vector<ScenarioKind>& kinds) {
    ScenarioOptions opt;
    opt.n_rooms = cfg.rooms;
    opt.filler_count = cfg.fillers;
    opt.distractor_instances = cfg.distractors;
    std::vector<ScenarioSpec> specs;
    for (auto kind : kinds) {
        auto batch = gen_scenarios(cfg.seed, kind, cfg.n, opt);
        specs.insert(specs.end(), batch.begin(), batch.end());
    }
    return specs;
}

std::vector<EpisodeLog> acquire_all(const CliConfig& cfg, const std::vector<ScenarioSpec>& specs) {
    auto planner = cfg.make_planner();
    const RunConfig run = cfg.run_config();
    std::vector<EpisodeLog> logs;
    for (const auto& s : specs) {
        auto batch = acquire(s, *planner, run);
        logs.insert(logs.end(), batch.begin(), batch.end());
    }
    return logs;
}

std::map<std::string, MemoryGraph> memorize_all(const CliConfig& cfg, const std::vector<ScenarioSpec>& specs,
                                                const std::map<std::string, std::vector<EpisodeLog>>& logs) {
    const EncoderConfig enc = cfg.encoder_config();
    const DistillerConfig dist = cfg.distiller_config();
    std::map<std::string, MemoryGraph> graphs;
    for (const auto& s : specs) {
        MemoryGraph g(GraphConfig{cfg.theta_dedup, cfg.theta_obj});
        auto ordered = logs.at(s.scenario_id);
        std::stable_sort(ordered.begin(), ordered.end(), [](const EpisodeLog& a, const EpisodeLog& b) { return a.timestamp < b.timestamp; });
        for (const auto& l : ordered) memorize(l, g, enc, dist);
        graphs.emplace(s.scenario_id, std::move(g));
    }
    return graphs;
}

std::string report_label(const MetricsReport& r) {
    std::string label = r.kind + "__" + r.mode;
    if (!r.ablation.empty() && r.ablation != "full-episodic") label += "-" + r.ablation;
    return label;
}

std::vector<MetricsReport> eval_all(const CliConfig& cfg, const std::vector<ScenarioSpec>& specs, const EvalMemory& memory,
                                    const std::vector<std::string>& modes, const std::vector<std::string>& ablations) {
    std::unique_ptr<Planner> remote;
    if (cfg.planner == "remote") remote = cfg.make_planner();
    std::vector<MetricsReport> reports;
    for (auto kind : all_scenario_kinds()) {
        std::vector<ScenarioSpec> subset;
        for (const auto& s : specs) {
            if (s.kind == kind) subset.push_back(s);
        }
        if (subset.empty()) continue;
        for (const auto& m : modes) {
            EvalOptions opt;
            opt.run = cfg.run_config();
            opt.run.mode = run_mode_from_string(m);
            opt.encoder = cfg.encoder_config();
            opt.only_retrieval_hits = cfg.only_retrieval_hits;
            if (remote && opt.run.mode != RunMode::raw_interaction) opt.planner = remote.get();
            if (opt.run.mode == RunMode::polar) {
                for (const auto& a : ablations) {
                    opt.run.ablation = ablation_from_string(a);
                    reports.push_back(evaluate(subset, memory, opt));
                }
            } else {
                reports.push_back(evaluate(subset, memory, opt));
            }
        }
    }
    return reports;
}

void write_eval_reports(const std::vector<MetricsReport>& reports, const fs::path& dir) {
    for (const auto& r : reports) write_file_atomic(dir / (report_label(r) + ".json"), to_json(r).dump(2) + "\n");
}

EvalMemory load_memory(const std::vector<ScenarioSpec>& specs, const fs::path& logs_path, const fs::path& memory_dir,
                       const GraphConfig& gcfg) {
    EvalMemory memory;
    if (fs::exists(logs_path)) memory.logs = group_logs(specs, parse_episodes(read_file(logs_path)));
    for (const auto& s : specs) {
        const fs::path p = memory_dir / (s.scenario_id + ".json");
        if (fs::exists(p)) memory.graphs.emplace(s.scenario_id, MemoryGraph::load(p, gcfg));
    }
    return memory;
}

void add_config_options(CLI::App& app, CliConfig& cfg) {
    app.add_option("--seed", cfg.seed, "Seed for every random choice")->envname("POLAR_SEED");
    app.add_option("--rooms", cfg.rooms, "Rooms per generated world")->check(CLI::Range(2, 12));
    app.add_option("--kinds", cfg.kinds, "Scenario kinds")->delimiter(',');
    app.add_option("--n", cfg.n, "Scenarios per kind")->check(CLI::PositiveNumber);
    app.add_option("--fillers", cfg.fillers, "Filler scripts per scenario")->check(CLI::NonNegativeNumber);
    app.add_option("--distractors", cfg.distractors, "Same-category instances in distractor scenarios");
    app.add_option("--encoder", cfg.encoder, "Text encoder")->check(CLI::IsMember({"builtin", "remote"}));
    app.add_option("--encoder-endpoint", cfg.encoder_endpoint, "Remote encoder URL");
    app.add_option("--encoder-dimension", cfg.encoder_dimension, "Builtin embedding dimension");
    app.add_option("--distiller", cfg.distiller, "Statement distiller")->check(CLI::IsMember({"builtin", "remote"}));
    app.add_option("--distiller-endpoint", cfg.distiller_endpoint, "Remote distiller URL");
    app.add_option("--planner", cfg.planner, "Grounding planner")->check(CLI::IsMember({"oracle", "remote"}));
    app.add_option("--planner-endpoint", cfg.planner_endpoint, "Remote planner base URL");
    app.add_option("--k", cfg.k, "Retrieval depth")->check(CLI::PositiveNumber);
    app.add_option("--theta-dedup", cfg.theta_dedup, "Semantic dedup threshold");
    app.add_option("--theta-obj", cfg.theta_obj, "Object feature match threshold");
    app.add_option("--modes", cfg.modes, "Evaluation modes")->delimiter(',');
    app.add_option("--ablations", cfg.ablations, "Episodic-context variants for polar mode")->delimiter(',');
    app.add_option("--max-steps", cfg.max_steps, "Step cap per episode")->check(CLI::PositiveNumber);
    app.add_flag("--only-retrieval-hits", cfg.only_retrieval_hits, "Keep episodes where semantic and dense retrieval both hit");
    app.add_option("--out", cfg.out, "Output directory");
    app.set_config("--config", "", "Flat TOML config file; flags override it");
}

}  // namespace

int dispatch(int argc, char** argv) {
    CLI::App app{"Object-centric memory graph, retrieval and navigation pipeline"};
    app.fallthrough();
    app.require_subcommand(1);
    CliConfig cfg;
    Paths paths;
    add_config_options(app, cfg);

    auto* world = app.add_subcommand("world", "World utilities");
    world->require_subcommand(1);
    auto* world_gen = world->add_subcommand("gen", "Generate a world file");
    std::vector<std::string> objects = {"mug:2", "shoes:3", "umbrella:1"};
    bool show_map = false;
    world_gen->add_option("--objects", objects, "category:count list")->delimiter(',');
    world_gen->add_flag("--map", show_map, "Print a text map");

    auto* scenario = app.add_subcommand("scenario", "Scenario utilities");
    scenario->require_subcommand(1);
    auto* scenario_gen = scenario->add_subcommand("gen", "Generate scenario specs");

    auto* acquire_cmd = app.add_subcommand("acquire", "Run acquisition scripts");
    acquire_cmd->add_option("--specs", paths.specs, "Scenario specs file");

    auto* memorize_cmd = app.add_subcommand("memorize", "Build one memory graph per scenario");
    memorize_cmd->add_option("--specs", paths.specs, "Scenario specs file");
    memorize_cmd->add_option("--logs", paths.logs, "Acquisition logs file");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate modes on scenario suites");
    std::string mode;
    std::string ablation;
    eval_cmd->add_option("--specs", paths.specs, "Scenario specs file");
    eval_cmd->add_option("--logs", paths.logs, "Acquisition logs file");
    eval_cmd->add_option("--memory", paths.memory, "Directory of graph snapshots");
    eval_cmd->add_option("--mode", mode, "Single mode (overrides --modes)");
    eval_cmd->add_option("--ablation", ablation, "Single ablation (overrides --ablations)");

    auto* report_cmd = app.add_subcommand("report", "Combine evaluation results into metrics.json and table.txt");
    std::vector<std::string> inputs;
    report_cmd->add_option("--inputs", inputs, "Evaluation result files (default: <out>/eval/*.json)");

    auto* run_all = app.add_subcommand("run-all", "Full pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const fs::path out = cfg.out;
        const fs::path specs_path = or_default(paths.specs, out / "specs.jsonl");
        const fs::path logs_path = or_default(paths.logs, out / "logs.jsonl");
        const fs::path memory_dir = or_default(paths.memory, out / "memory");
        const GraphConfig gcfg{cfg.theta_dedup, cfg.theta_obj};

        if (*world_gen) {
            std::vector<std::pair<std::string, int>> spec;
            for (const auto& o : objects) {
                const auto colon = o.find(':');
                if (colon == std::string::npos) throw RejectedInput("object spec '" + o + "' is not category:count");
                spec.emplace_back(o.substr(0, colon), std::stoi(o.substr(colon + 1)));
            }
            const World w = gen_world(cfg.seed, cfg.rooms, spec);
            write_file_atomic(out / "world.json", to_json(w).dump() + "\n");
            if (show_map) std::cout << render_map(w);
        } else if (*scenario_gen) {
            write_file_atomic(specs_path, dump_scenarios(gen_all(cfg, cfg.kind_list())));
        } else if (*acquire_cmd) {
            write_file_atomic(logs_path, dump_episodes(acquire_all(cfg, load_specs(specs_path))));
        } else if (*memorize_cmd) {
            const auto specs = load_specs(specs_path);
            const auto graphs = memorize_all(cfg, specs, group_logs(specs, parse_episodes(read_file(logs_path))));
            for (const auto& [id, g] : graphs) write_file_atomic(memory_dir / (id + ".json"), g.to_snapshot());
        } else if (*eval_cmd) {
            const auto specs = load_specs(specs_path);
            const EvalMemory memory = load_memory(specs, logs_path, memory_dir, gcfg);
            const auto modes = mode.empty() ? cfg.modes : std::vector<std::string>{mode};
            const auto ablations = ablation.empty() ? cfg.ablations : std::vector<std::string>{ablation};
            if (std::find(modes.begin(), modes.end(), "polar") != modes.end() && memory.graphs.empty()) {
                throw ConfigurationError("polar mode requires memorized graphs in " + memory_dir.string() + "; run `memorize` first");
            }
            write_eval_reports(eval_all(cfg, specs, memory, modes, ablations), out / "eval");
        } else if (*report_cmd) {
            std::vector<fs::path> files(inputs.begin(), inputs.end());
            if (files.empty()) {
                if (!fs::is_directory(out / "eval")) throw NotFound("no evaluation results in " + (out / "eval").string());
                for (const auto& e : fs::directory_iterator(out / "eval")) {
                    if (e.path().extension() == ".json") files.push_back(e.path());
                }
                std::sort(files.begin(), files.end());
            }
            std::vector<MetricsReport> reports;
            for (const auto& f : files) reports.push_back(report_from_json(parse_json_document(read_file(f))));
            // Same row order as run-all: kind, then configured mode, then ablation.
            auto rank = [&](const MetricsReport& r) {
                auto index = [](const auto& xs, const auto& x) {
                    return std::distance(xs.begin(), std::find(xs.begin(), xs.end(), x));
                };
                std::vector<std::string> kinds;
                for (auto k : all_scenario_kinds()) kinds.emplace_back(to_string(k));
                return std::tuple(index(kinds, r.kind), index(cfg.modes, r.mode), index(cfg.ablations, r.ablation));
            };
            std::stable_sort(reports.begin(), reports.end(),
                             [&](const MetricsReport& a, const MetricsReport& b) { return rank(a) < rank(b); });
            report(reports, out);
            std::cout << render_table(reports);
        } else if (*run_all) {
            const auto specs = gen_all(cfg, cfg.kind_list());
            write_file_atomic(specs_path, dump_scenarios(specs));
            write_world_files(specs, out / "worlds");
            const auto logs = acquire_all(cfg, specs);
            write_file_atomic(logs_path, dump_episodes(logs));
            EvalMemory memory;
            memory.logs = group_logs(specs, logs);
            memory.graphs = memorize_all(cfg, specs, memory.logs);
            for (const auto& [id, g] : memory.graphs) write_file_atomic(memory_dir / (id + ".json"), g.to_snapshot());
            const auto reports = eval_all(cfg, specs, memory, cfg.modes, cfg.ablations);
            write_eval_reports(reports, out / "eval");
            report(reports, out);
            std::cout << render_table(reports);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<std::string> storage = args;
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return dispatch(static_cast<int>(storage.size()), argv.data());
}

}  // namespace polar
