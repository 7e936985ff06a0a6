#pragma once

// JSON (de)serialization for world configs and episode logs.
//
// - WorldConfig round-trips through a single JSON object.
// - EpisodeLog uses newline-delimited JSON: one header record carrying the
//   config plus static object placement, then one record per tick. Episode
//   logs capture what evaluation needs (poses, phases, labels); they are
//   not a resimulation checkpoint.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "intentsim/error.hpp"
#include "intentsim/version.hpp"
#include "intentsim/world.hpp"

namespace intentsim {

using nlohmann::json;

inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }

inline Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError("expected [x, y] pair");
    return Vec2{j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const WorldConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["arena"] = {{"width", cfg.arena_width}, {"height", cfg.arena_height}};
    j["scenario"] = cfg.scenario;
    j["seed"] = cfg.seed;
    j["human_speed"] = cfg.human_speed;
    j["robot_speed"] = cfg.robot_speed;
    j["tick_hz"] = cfg.tick_hz;
    j["dwell"] = {{"min_s", cfg.dwell_min_s}, {"max_s", cfg.dwell_max_s}};
    j["via_offset_max"] = cfg.via_offset_max;
    j["workflow_bias"] = cfg.workflow_bias;
    j["close_proximity_m"] = cfg.close_proximity_m;
    j["stations"] = json::array();
    for (const auto& s : cfg.stations)
        j["stations"].push_back({{"id", s.id},
                                 {"name", station_name(s.id)},
                                 {"position", to_json(s.position)}});
    j["objects"] = json::array();
    for (const auto& o : cfg.objects)
        j["objects"].push_back({{"category", o.category},
                                {"station", o.station},
                                {"offset", to_json(o.offset)},
                                {"height", o.height}});
    j["obstacles"] = json::array();
    for (const auto& poly : cfg.obstacles) {
        json verts = json::array();
        for (const auto& v : poly.vertices) verts.push_back(to_json(v));
        j["obstacles"].push_back(verts);
    }
    j["robots"] = json::array();
    for (const auto& r : cfg.robots) {
        json patrol = json::array();
        for (const auto& p : r.patrol) patrol.push_back(to_json(p));
        j["robots"].push_back({{"position", to_json(r.position)},
                               {"heading", r.heading},
                               {"patrol", patrol}});
    }
    return j;
}

inline WorldConfig world_config_from_json(const json& j) {
    try {
        WorldConfig cfg;
        if (j.contains("schema_version") &&
            j.at("schema_version").get<int>() != kSchemaVersion)
            throw ConfigError("unsupported config schema version");
        if (j.contains("arena")) {
            cfg.arena_width = j.at("arena").at("width").get<double>();
            cfg.arena_height = j.at("arena").at("height").get<double>();
        }
        cfg.scenario = j.value("scenario", cfg.scenario);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.human_speed = j.value("human_speed", cfg.human_speed);
        cfg.robot_speed = j.value("robot_speed", cfg.robot_speed);
        cfg.tick_hz = j.value("tick_hz", cfg.tick_hz);
        if (j.contains("dwell")) {
            cfg.dwell_min_s = j.at("dwell").value("min_s", cfg.dwell_min_s);
            cfg.dwell_max_s = j.at("dwell").value("max_s", cfg.dwell_max_s);
        }
        cfg.via_offset_max = j.value("via_offset_max", cfg.via_offset_max);
        cfg.workflow_bias = j.value("workflow_bias", cfg.workflow_bias);
        cfg.close_proximity_m = j.value("close_proximity_m", cfg.close_proximity_m);
        cfg.stations.clear();
        for (const auto& js : j.at("stations"))
            cfg.stations.push_back(
                {js.at("id").get<int>(), vec2_from_json(js.at("position"))});
        cfg.objects.clear();
        if (j.contains("objects"))
            for (const auto& jo : j.at("objects"))
                cfg.objects.push_back({jo.at("category").get<std::string>(),
                                       jo.at("station").get<int>(),
                                       vec2_from_json(jo.at("offset")),
                                       jo.at("height").get<double>()});
        cfg.obstacles.clear();
        if (j.contains("obstacles"))
            for (const auto& jp : j.at("obstacles")) {
                std::vector<Vec2> verts;
                for (const auto& jv : jp) verts.push_back(vec2_from_json(jv));
                cfg.obstacles.emplace_back(verts);
            }
        cfg.robots.clear();
        for (const auto& jr : j.at("robots")) {
            RobotSpec r;
            r.position = vec2_from_json(jr.at("position"));
            r.heading = jr.value("heading", 0.0);
            if (jr.contains("patrol"))
                for (const auto& jp : jr.at("patrol"))
                    r.patrol.push_back(vec2_from_json(jp));
            cfg.robots.push_back(std::move(r));
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed world config: ") + e.what());
    }
}

inline WorldConfig load_world_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return world_config_from_json(j);
}

inline void save_world_config(const WorldConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write config file: " + path);
    out << to_json(cfg).dump(2) << "\n";
}

// --- episode logs (NDJSON) -------------------------------------------------

inline void write_episode(const EpisodeLog& log, std::ostream& out) {
    json header;
    header["type"] = "header";
    header["schema_version"] = kSchemaVersion;
    header["config"] = to_json(log.config);
    header["ticks"] = log.states.size();
    header["objects"] = json::array();
    if (!log.states.empty())
        for (const auto& o : log.states.front().objects)
            header["objects"].push_back({{"id", o.id},
                                         {"category", o.category},
                                         {"position", to_json(o.position)},
                                         {"height", o.height}});
    out << header.dump() << "\n";
    for (std::size_t t = 0; t < log.states.size(); ++t) {
        const WorldState& s = log.states[t];
        json js;
        js["type"] = "state";
        js["tick"] = s.tick;
        js["human"] = {{"position", to_json(s.human.position)},
                       {"heading", s.human.heading},
                       {"speed", s.human.speed},
                       {"phase", phase_name(s.human.phase)},
                       {"goal", s.human.goal}};
        js["label"] = log.labels[t];
        js["robots"] = json::array();
        for (const auto& r : s.robots)
            js["robots"].push_back(
                {{"position", to_json(r.position)}, {"heading", r.heading}});
        out << js.dump() << "\n";
    }
}

inline void save_episode(const EpisodeLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write episode file: " + path);
    write_episode(log, out);
}

inline EpisodeLog read_episode(std::istream& in) {
    EpisodeLog log;
    std::string line;
    std::vector<ObjectState> objects;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw SimError(std::string("bad episode record: ") + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "header") {
            log.config = world_config_from_json(j.at("config"));
            objects.clear();
            for (const auto& jo : j.at("objects")) {
                ObjectState o;
                o.id = jo.at("id").get<int>();
                o.category = jo.at("category").get<std::string>();
                o.position = vec2_from_json(jo.at("position"));
                o.height = jo.at("height").get<double>();
                objects.push_back(std::move(o));
            }
            have_header = true;
        } else if (type == "state") {
            if (!have_header)
                throw SimError("episode state record before header");
            WorldState s;
            s.tick = j.at("tick").get<long>();
            s.human.position = vec2_from_json(j.at("human").at("position"));
            s.human.heading = j.at("human").at("heading").get<double>();
            s.human.speed = j.at("human").at("speed").get<double>();
            s.human.phase = phase_from_name(j.at("human").at("phase").get<std::string>());
            s.human.goal = j.at("human").at("goal").get<int>();
            for (const auto& jr : j.at("robots")) {
                RobotState r;
                r.position = vec2_from_json(jr.at("position"));
                r.heading = jr.value("heading", 0.0);
                s.robots.push_back(r);
            }
            s.objects = objects;
            log.states.push_back(std::move(s));
            log.labels.push_back(j.at("label").get<int>());
        } else {
            throw SimError("unknown episode record type: " + type);
        }
    }
    if (!have_header) throw SimError("episode stream has no header record");
    return log;
}

inline EpisodeLog load_episode(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open episode file: " + path);
    return read_episode(in);
}

}  // namespace intentsim
