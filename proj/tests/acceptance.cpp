// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "polar/distiller.hpp"
#include "polar/io.hpp"
#include "polar/metrics.hpp"
#include "polar/scenario.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

using namespace polar;
namespace fs = std::filesystem;

namespace {

constexpr int kSuiteSize = 50;

struct Suite {
    std::vector<ScenarioSpec> specs;
    EvalMemory memory;
};

Suite build_suite(std::uint64_t seed, ScenarioKind kind, int n, const ScenarioOptions& opt = {}) {
    Suite s;
    s.specs = gen_scenarios(seed, kind, n, opt);
    OraclePlanner planner;
    for (const auto& spec : s.specs) {
        auto logs = acquire(spec, planner);
        MemoryGraph g;
        for (const auto& l : logs) memorize(l, g);
        s.memory.logs.emplace(spec.scenario_id, std::move(logs));
        s.memory.graphs.emplace(spec.scenario_id, std::move(g));
    }
    return s;
}

MetricsReport run_mode(const Suite& s, RunMode mode, Ablation ablation = Ablation::full_episodic) {
    EvalOptions opt;
    opt.run.mode = mode;
    opt.run.ablation = ablation;
    return evaluate(s.specs, s.memory, opt);
}

int failures = 0;

void verdict(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

int shell(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Shortest 8-connected path without corner cutting, by relaxation to a fixpoint.
double relaxed_distance(const World& w, Cell from, Cell to) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(static_cast<std::size_t>(w.width() * w.height()), inf);
    auto at = [&](Cell c) -> double& { return d[static_cast<std::size_t>(c.y * w.width() + c.x)]; };
    at(from) = 0.0;
    for (bool changed = true; changed;) {
        changed = false;
        for (int y = 0; y < w.height(); ++y) {
            for (int x = 0; x < w.width(); ++x) {
                const Cell c{x, y};
                if (!w.is_free(c) || at(c) == inf) continue;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const Cell n{x + dx, y + dy};
                        if ((!dx && !dy) || !w.is_free(n)) continue;
                        if (dx && dy && (!w.is_free(Cell{x + dx, y}) || !w.is_free(Cell{x, y + dy}))) continue;
                        const double cost = at(c) + kCellSize * ((dx && dy) ? std::sqrt(2.0) : 1.0);
                        if (cost < at(n) - 1e-12) {
                            at(n) = cost;
                            changed = true;
                        }
                    }
                }
            }
        }
    }
    return at(to);
}

// The object whose most recent assignment carries the cue fact, read from the
// scripts alone.
std::string latest_assignment(const ScenarioSpec& spec) {
    static const std::map<std::string, std::string> phrases{
        {"that I use for ", "use"}, {"that I take to ", "occasion"}, {"that I got from ", "origin"}};
    Fact cue;
    for (const auto& [phrase, key] : phrases) {
        const auto at = spec.eval_instruction.find(phrase);
        if (at == std::string::npos) continue;
        cue.key = key;
        cue.value = spec.eval_instruction.substr(at + phrase.size());
        cue.value.pop_back();  // trailing period
    }
    std::map<std::string, std::pair<std::string, Timestamp>> current;  // object -> (value, time) for cue.key
    for (const auto& s : spec.scripts) {
        for (const auto& f : s.facts) {
            auto& slot = current[s.target_object_id];
            if (f.key == cue.key && s.timestamp >= slot.second) slot = {f.value, s.timestamp};
        }
    }
    std::string best;
    Timestamp best_t = 0;
    for (const auto& [object, vt] : current) {
        if (vt.first == cue.value && vt.second > best_t) {
            best = object;
            best_t = vt.second;
        }
    }
    return best;
}

}  // namespace

int main() {
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::vector<Suite> joint;

    {
        const auto t0 = std::chrono::steady_clock::now();
        bool sr_ok = true, spl_ok = true, recall_ok = true;
        double min_spl = 1.0;
        for (auto seed : seeds) {
            const Suite s = build_suite(seed, ScenarioKind::compositional_single, kSuiteSize);
            const auto r = run_mode(s, RunMode::polar);
            sr_ok = sr_ok && r.sr() == 1.0;
            spl_ok = spl_ok && r.spl() >= 0.80;
            min_spl = std::min(min_spl, r.spl());
            recall_ok = recall_ok && r.recall_semantic() == 1.0;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        verdict(1, sr_ok && spl_ok && secs < 120.0,
                std::string("single seeds 0-4: SR = 1.00 ") + (sr_ok ? "yes" : "no") +
                    fmt(", min SPL %.3f (>= 0.80), runtime %.1f s (< 120)", min_spl, secs));

        double sem_sum = 0, dense_sum = 0;
        bool per_seed = true;
        std::string detail;
        for (auto seed : seeds) {
            joint.push_back(build_suite(seed, ScenarioKind::compositional_joint, kSuiteSize));
            const auto r = run_mode(joint.back(), RunMode::polar);
            per_seed = per_seed && r.recall_semantic() >= r.recall_dense();
            sem_sum += r.recall_semantic();
            dense_sum += r.recall_dense();
            detail += fmt(" %.2f/%.2f", r.recall_semantic(), r.recall_dense());
        }
        verdict(2, recall_ok && per_seed && sem_sum > dense_sum,
                std::string("single semantic recall@5 = 1.00 ") + (recall_ok ? "yes" : "no") +
                    "; joint sem/dense per seed:" + detail + fmt("; aggregate %.3f > %.3f", sem_sum / 5, dense_sum / 5));
    }

    {
        std::size_t total = 0, agree = 0;
        for (auto kind : {ScenarioKind::temporal_object, ScenarioKind::temporal_context}) {
            for (auto seed : seeds) {
                const Suite s = build_suite(seed, kind, kSuiteSize);
                const auto r = run_mode(s, RunMode::polar);
                std::map<std::string, const ScenarioSpec*> by_id;
                for (const auto& spec : s.specs) by_id[spec.scenario_id] = &spec;
                for (const auto& row : r.rows) {
                    ++total;
                    agree += row.chosen_object_id == latest_assignment(*by_id.at(row.scenario_id)) ? 1 : 0;
                }
            }
        }
        verdict(3, total == 500 && agree == total,
                fmt("grounded id equals latest assignment in %.0f of %.0f temporal specs (100%% required)",
                    static_cast<double>(agree), static_cast<double>(total)));
    }

    {
        const Suite s = build_suite(0, ScenarioKind::distractor, 60);
        const auto none = run_mode(s, RunMode::no_prior);
        const auto polar = run_mode(s, RunMode::polar);
        verdict(4, none.sr() <= 0.45 && polar.sr() == 1.0 && polar.cm() < none.cm(),
                fmt("distractor N=60 m=3: no-prior SR=%.3f (<= 0.45), polar SR=%.3f (= 1), CM polar %.3f < no-prior %.3f",
                    none.sr(), polar.sr(), polar.cm(), none.cm()));
    }

    {
        const bool single = spl_term(true, 10.0, 8.0) == 0.8;
        std::size_t episodes = 0, shortest_ok = 0;
        double max_diff = 0.0;
        for (auto kind : all_scenario_kinds()) {
            const auto specs = gen_scenarios(11, kind, 20);
            EvalOptions opt;
            opt.run.mode = RunMode::no_prior;
            const auto r = evaluate(specs, {}, opt);
            std::map<std::string, const ScenarioSpec*> by_id;
            for (const auto& spec : specs) by_id[spec.scenario_id] = &spec;
            double sum = 0.0;
            for (const auto& row : r.rows) {
                const ScenarioSpec& spec = *by_id.at(row.scenario_id);
                const World w = evaluation_world(spec);
                const double l = relaxed_distance(w, World::cell_of(spec.eval_start.position),
                                                  World::cell_of(w.find_object(spec.gold_object_id)->position));
                shortest_ok += std::abs(l - row.shortest_m) <= 1e-9 ? 1 : 0;
                if (row.success) sum += l / std::max(row.path_length_m, l);
                ++episodes;
            }
            max_diff = std::max(max_diff, std::abs(sum / static_cast<double>(r.rows.size()) - r.spl()));
        }
        verdict(5, single && episodes == 100 && shortest_ok == episodes && max_diff <= 1e-9,
                std::string("S=1, p=10, l=8 gives 0.8 ") + (single ? "yes" : "no") +
                    fmt("; %.0f episodes, brute-force shortest paths agree on %.0f, max |SPL diff| %.2e (<= 1e-9)",
                        static_cast<double>(episodes), static_cast<double>(shortest_ok), max_diff));
    }

    {
        const int rc = shell(POLAR_PROPERTIES_PATH);
        verdict(6, rc == 0, "property suite (1000 randomized memory ops, step cap in every evaluation episode) exit code " +
                                std::to_string(rc));
    }

    {
        double episodic = 0, instruction = 0;
        std::string detail;
        for (const Suite& s : joint) {
            const double e = run_mode(s, RunMode::polar, Ablation::full_episodic).mean_path_length();
            const double i = run_mode(s, RunMode::polar, Ablation::instruction_only).mean_path_length();
            episodic += e;
            instruction += i;
            detail += fmt(" %.2f/%.2f", e, i);
        }
        verdict(7, episodic < instruction,
                fmt("joint mean path, seeds 0-4 pooled: episodic %.3f m < instruction-only %.3f m; per seed:", episodic / 5,
                    instruction / 5) +
                    detail);
    }

    {
        const auto base = fs::temp_directory_path() / "polar_acceptance";
        fs::remove_all(base);
        const std::string cli = POLAR_CLI_PATH;
        const int a = shell(cli + " run-all --seed 0 --out " + (base / "a").string());
        const int b = shell(cli + " run-all --seed 0 --out " + (base / "b").string());
        bool same = a == 0 && b == 0;
        for (const char* f : {"metrics.json", "table.txt"}) {
            same = same && read_file(base / "a" / f) == read_file(base / "b" / f);
        }
        verdict(8, same, "run-all --seed 0 twice: metrics.json and table.txt byte-identical");
        fs::remove_all(base);
    }

    std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED");
    return failures == 0 ? 0 : 1;
}
