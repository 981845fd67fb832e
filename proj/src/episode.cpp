#include "polar/episode.hpp"

#include "polar/error.hpp"

namespace polar {

void EpisodeLog::validate() const {
    if (trajectory.empty()) throw RejectedInput("episode " + episode_id + ": empty trajectory");
    for (const auto& s : trajectory) {
        if (!is_valid_heading(s.heading)) {
            throw RejectedInput("episode " + episode_id + ": heading " + std::to_string(s.heading) +
                                " is not a multiple of 30 in [0, 330]");
        }
    }
    if (reference_feature && !is_unit(*reference_feature)) {
        throw RejectedInput("episode " + episode_id + ": reference feature is not unit-norm");
    }
}

Json to_json(const EpisodeLog& log) {
    Json facts = Json::array();
    for (const auto& f : log.facts) facts.push_back({{"key", f.key}, {"value", f.value}});
    Json traj = Json::array();
    for (const auto& s : log.trajectory) {
        traj.push_back({{"position", {s.position.x, s.position.y}},
                        {"heading", s.heading},
                        {"action", std::string(to_string(s.action))},
                        {"room", s.room},
                        {"visible_object_ids", s.visible_object_ids}});
    }
    Json j = {{"episode_id", log.episode_id},
              {"timestamp", log.timestamp},
              {"instruction", log.instruction},
              {"facts", facts},
              {"reference_feature", log.reference_feature ? Json(*log.reference_feature) : Json(nullptr)},
              {"target_object_id", log.target_object_id},
              {"target_category", log.target_category},
              {"trajectory", traj},
              {"success", log.success},
              {"final_position", {log.final_position.x, log.final_position.y}}};
    if (log.failure_reason) j["failure_reason"] = *log.failure_reason;
    return j;
}

EpisodeLog episode_from_json(const Json& j) {
    EpisodeLog log;
    try {
        log.episode_id = j.at("episode_id").get<std::string>();
        log.timestamp = j.at("timestamp").get<Timestamp>();
        log.instruction = j.at("instruction").get<std::string>();
        for (const auto& f : j.at("facts")) {
            log.facts.push_back({f.at("key").get<std::string>(), f.at("value").get<std::string>()});
        }
        if (!j.at("reference_feature").is_null()) {
            log.reference_feature = j.at("reference_feature").get<std::vector<double>>();
        }
        log.target_object_id = j.at("target_object_id").get<std::string>();
        log.target_category = j.at("target_category").get<std::string>();
        for (const auto& s : j.at("trajectory")) {
            TrajectoryStep step;
            step.position = {s.at("position").at(0).get<double>(), s.at("position").at(1).get<double>()};
            step.heading = s.at("heading").get<int>();
            step.action = action_from_string(s.at("action").get<std::string>());
            step.room = s.at("room").get<std::string>();
            step.visible_object_ids = s.at("visible_object_ids").get<std::vector<std::string>>();
            log.trajectory.push_back(std::move(step));
        }
        log.success = j.at("success").get<bool>();
        log.final_position = {j.at("final_position").at(0).get<double>(),
                              j.at("final_position").at(1).get<double>()};
        if (j.contains("failure_reason")) log.failure_reason = j.at("failure_reason").get<std::string>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed episode: ") + e.what());
    }
    return log;
}

std::string dump_episodes(const std::vector<EpisodeLog>& logs) {
    std::vector<Json> rows;
    rows.reserve(logs.size());
    for (const auto& l : logs) rows.push_back(to_json(l));
    return dump_json_lines(rows);
}

std::vector<EpisodeLog> parse_episodes(const std::string& text) {
    std::vector<EpisodeLog> out;
    std::size_t line = 0;
    for (const auto& row : parse_json_lines(text)) {
        ++line;
        try {
            out.push_back(episode_from_json(row));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
    }
    return out;
}

std::string render_trajectory(const EpisodeLog& log) {
    std::string out;
    for (const auto& s : log.trajectory) {
        if (!out.empty()) out += ' ';
        out += s.room;
        out += ' ';
        out += to_string(s.action);
    }
    return out;
}

std::string raw_document(const EpisodeLog& log) {
    return log.instruction + " " + render_trajectory(log);
}

std::size_t effective_forward_moves(const EpisodeLog& log) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < log.trajectory.size(); ++i) {
        if (log.trajectory[i].action != ActionLow::move_forward) continue;
        const Vec2 next = i + 1 < log.trajectory.size() ? log.trajectory[i + 1].position : log.final_position;
        if (!(next == log.trajectory[i].position)) ++n;
    }
    return n;
}

}  // namespace polar
