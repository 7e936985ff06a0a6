#pragma once

// Deterministic 2D factory-floor simulation. A single human worker walks
// between four stations (storage, workstation, assembly, manufacturing),
// dwelling at each; mobile robots sit still or patrol depending on the
// scenario. Stepping is a pure function of (state, config): everything
// that evolves, including the RNG for plan decisions, rides in the state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/geometry.hpp"
#include "intentsim/rng.hpp"

namespace intentsim {

inline constexpr int kNumStations = 4;
inline constexpr int kStorage = 1;
inline constexpr int kWorkstation = 2;
inline constexpr int kAssembly = 3;
inline constexpr int kManufacturing = 4;

inline const char* station_name(int id) {
    switch (id) {
        case kStorage: return "Storage Area";
        case kWorkstation: return "Workstation";
        case kAssembly: return "Assembly Station";
        case kManufacturing: return "Manufacturing Station";
        default: return "?";
    }
}

enum class Phase { MovingToGoal, Transitioning, Stationary };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::MovingToGoal: return "moving";
        case Phase::Transitioning: return "transitioning";
        case Phase::Stationary: return "stationary";
    }
    return "?";
}

inline Phase phase_from_name(const std::string& s) {
    if (s == "moving") return Phase::MovingToGoal;
    if (s == "transitioning") return Phase::Transitioning;
    if (s == "stationary") return Phase::Stationary;
    throw ConfigError("unknown phase name: " + s);
}

struct Station {
    int id = 0;
    Vec2 position;
};

struct RobotSpec {
    Vec2 position;
    double heading = 0.0;
    std::vector<Vec2> patrol;  // empty = stationary robot
};

// Static furniture anchored to a station, per the objects-of-interest list.
struct ObjectSpec {
    std::string category;
    int station = 0;
    Vec2 offset;          // relative to the station position
    double height = 1.0;  // meters, drives apparent size in the image plane
};

struct WorldConfig {
    double arena_width = 20.0;
    double arena_height = 15.0;
    std::vector<Station> stations;
    std::vector<ObjectSpec> objects;
    std::vector<ConvexPolygon> obstacles;
    int scenario = 1;
    std::vector<RobotSpec> robots;
    double human_speed = 1.6;   // m/s
    double robot_speed = 2.0;   // m/s, patrol speed
    double tick_hz = 10.0;
    std::uint64_t seed = 0;
    double dwell_min_s = 1.0;
    double dwell_max_s = 3.0;
    double via_offset_max = 0.0;     // lateral detour amplitude for legs
    double workflow_bias = 0.55;     // P(next goal = workflow-cycle successor)
    double close_proximity_m = 3.0;  // at least one station pair this close

    double dt() const { return 1.0 / tick_hz; }

    const Station& station(int id) const {
        for (const auto& s : stations)
            if (s.id == id) return s;
        throw ConfigError("unknown station id " + std::to_string(id));
    }

    bool in_arena(const Vec2& p, double margin = 0.0) const {
        return p.x >= margin && p.x <= arena_width - margin &&
               p.y >= margin && p.y <= arena_height - margin;
    }

    void validate() const;
};

struct HumanState {
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    Phase phase = Phase::Stationary;
    int goal = kStorage;  // current destination (or occupied station)
};

struct RobotState {
    Vec2 position;
    double heading = 0.0;
    int patrol_target = 0;
};

struct ObjectState {
    int id = 0;  // 1-based; 0 is reserved for the human in keyed draws
    std::string category;
    Vec2 position;
    double height = 1.0;
};

// Walk-plan bookkeeping carried inside the state.
struct PlanState {
    std::uint64_t rng_state = 0;
    std::vector<Vec2> path;  // remaining waypoints of the current leg
    std::size_t path_index = 0;
    double leg_length = 0.0;
    double leg_travelled = 0.0;
    double switch_fraction = 0.5;  // transitioning -> moving switchover
    bool initial_leg = false;
    int dwell_ticks_left = 0;
    bool at_station = false;
    long ticks_budget = 0;   // 0 = open-ended
    long moving_ticks = 0;
    long transition_ticks = 0;
    long stationary_ticks = 0;
};

struct WorldState {
    long tick = 0;
    HumanState human;
    std::vector<RobotState> robots;
    std::vector<ObjectState> objects;
    PlanState plan;
};

struct EpisodeLog {
    WorldConfig config;
    std::vector<WorldState> states;
    std::vector<int> labels;  // ground-truth station per tick
};

inline void WorldConfig::validate() const {
    if (scenario < 1 || scenario > 3)
        throw ConfigError("scenario must be 1, 2, or 3");
    if (stations.size() != kNumStations)
        throw ConfigError("exactly four stations are required");
    std::array<int, kNumStations + 1> seen{};
    for (const auto& s : stations) {
        if (s.id < 1 || s.id > kNumStations)
            throw ConfigError("station id out of range: " + std::to_string(s.id));
        if (seen[s.id]++)
            throw ConfigError("duplicate station id " + std::to_string(s.id));
        if (!in_arena(s.position))
            throw ConfigError("station outside arena bounds");
    }
    for (std::size_t i = 0; i < stations.size(); ++i)
        for (std::size_t j = i + 1; j < stations.size(); ++j)
            if (distance(stations[i].position, stations[j].position) < 1e-9)
                throw ConfigError("station positions must be pairwise distinct");
    bool close_pair = false;
    for (std::size_t i = 0; i < stations.size(); ++i)
        for (std::size_t j = i + 1; j < stations.size(); ++j)
            if (distance(stations[i].position, stations[j].position) <= close_proximity_m)
                close_pair = true;
    if (!close_pair)
        throw ConfigError("no station pair within the close-proximity distance");
    if (robots.empty() || robots.size() > 4)
        throw ConfigError("robot count must be between 1 and 4");
    bool any_patrol = false;
    for (const auto& r : robots) {
        if (!r.patrol.empty() && r.patrol.size() < 2)
            throw ConfigError("a patrol path needs at least 2 waypoints");
        any_patrol = any_patrol || !r.patrol.empty();
    }
    if (scenario == 1 && !obstacles.empty())
        throw ConfigError("scenario 1 must have an empty obstacle set");
    if (scenario != 1 && obstacles.empty())
        throw ConfigError("scenarios 2 and 3 require obstacles");
    if (scenario != 3 && any_patrol)
        throw ConfigError("robots may only move in scenario 3");
    if (scenario == 3)
        for (const auto& r : robots)
            if (r.patrol.empty())
                throw ConfigError("scenario 3 requires a patrol path per robot");
    if (human_speed <= 0 || robot_speed <= 0 || tick_hz <= 0)
        throw ConfigError("speeds and tick rate must be positive");
    if (dwell_min_s <= 0 || dwell_max_s < dwell_min_s)
        throw ConfigError("invalid dwell duration range");
    if (workflow_bias < 0.0 || workflow_bias > 1.0)
        throw ConfigError("workflow_bias must be within [0, 1]");
    for (const auto& o : objects)
        if (o.station < 1 || o.station > kNumStations)
            throw ConfigError("object anchored to unknown station");
}

// ---------------------------------------------------------------------------
// Grid path planning (A* on an inflated occupancy grid + line-of-sight
// smoothing). Good enough for a coarse factory floor; the human adds
// reactive steering on top at execution time.

namespace detail {

inline constexpr double kGridCell = 0.5;
inline constexpr double kInflate = 0.35;
inline constexpr double kWalkClearance = 0.25;

inline bool segment_clear(const Vec2& a, const Vec2& b, const WorldConfig& cfg,
                          double min_clearance = 0.3) {
    double len = distance(a, b);
    int steps = std::max(1, static_cast<int>(std::ceil(len / 0.1)));
    for (int s = 0; s <= steps; ++s) {
        Vec2 p = a + (b - a) * (static_cast<double>(s) / steps);
        if (!cfg.in_arena(p, 0.1)) return false;
        if (clearance(p, cfg.obstacles) < min_clearance) return false;
    }
    return true;
}

inline std::vector<Vec2> plan_path(const Vec2& from, const Vec2& to,
                                   const WorldConfig& cfg) {
    if (segment_clear(from, to, cfg)) return {to};

    const int nx = std::max(1, static_cast<int>(std::ceil(cfg.arena_width / kGridCell)));
    const int ny = std::max(1, static_cast<int>(std::ceil(cfg.arena_height / kGridCell)));
    auto center = [&](int i, int j) {
        return Vec2{(i + 0.5) * kGridCell, (j + 0.5) * kGridCell};
    };
    std::vector<char> blocked(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            blocked[j * nx + i] =
                clearance(center(i, j), cfg.obstacles) < kInflate ? 1 : 0;

    auto snap = [&](const Vec2& p) -> int {
        int ci = std::clamp(static_cast<int>(p.x / kGridCell), 0, nx - 1);
        int cj = std::clamp(static_cast<int>(p.y / kGridCell), 0, ny - 1);
        for (int r = 0; r <= 6; ++r) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int dj = -r; dj <= r; ++dj)
                for (int di = -r; di <= r; ++di) {
                    if (std::max(std::abs(di), std::abs(dj)) != r) continue;
                    int i = ci + di, j = cj + dj;
                    if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
                    if (blocked[j * nx + i]) continue;
                    double d = distance(p, center(i, j));
                    if (d < best_d) { best_d = d; best = j * nx + i; }
                }
            if (best >= 0) return best;
        }
        throw ConfigError("no free grid cell near requested point");
    };

    int start = snap(from), goal = snap(to);
    const int gx = goal % nx, gy = goal / nx;
    auto heuristic = [&](int idx) {
        int dx = std::abs(idx % nx - gx), dy = std::abs(idx / nx - gy);
        return kGridCell * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
    };

    std::vector<double> g(static_cast<std::size_t>(nx) * ny,
                          std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<std::size_t>(nx) * ny, -1);
    using Node = std::tuple<double, double, int>;  // f, h, idx (deterministic order)
    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    g[start] = 0.0;
    open.emplace(heuristic(start), heuristic(start), start);
    const int di8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dj8[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    bool found = false;
    while (!open.empty()) {
        auto [f, h, idx] = open.top();
        open.pop();
        if (f > g[idx] + h + 1e-12) continue;  // stale entry
        if (idx == goal) { found = true; break; }
        int ci = idx % nx, cj = idx / nx;
        for (int k = 0; k < 8; ++k) {
            int i = ci + di8[k], j = cj + dj8[k];
            if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
            int nidx = j * nx + i;
            if (blocked[nidx]) continue;
            if (k >= 4 && (blocked[cj * nx + i] || blocked[j * nx + ci]))
                continue;  // no corner cutting
            double step = (k < 4) ? kGridCell : kGridCell * std::sqrt(2.0);
            if (g[idx] + step < g[nidx] - 1e-12) {
                g[nidx] = g[idx] + step;
                parent[nidx] = idx;
                open.emplace(g[nidx] + heuristic(nidx), heuristic(nidx), nidx);
            }
        }
    }
    if (!found) throw ConfigError("goal unreachable from start position");

    std::vector<Vec2> pts{from};
    {
        std::vector<Vec2> rev;
        for (int idx = goal; idx != -1; idx = parent[idx])
            rev.push_back(center(idx % nx, idx / nx));
        for (auto it = rev.rbegin(); it != rev.rend(); ++it) pts.push_back(*it);
    }
    pts.push_back(to);

    // greedy line-of-sight shortcutting
    std::vector<Vec2> out;
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
        std::size_t j = pts.size() - 1;
        while (j > i + 1 && !segment_clear(pts[i], pts[j], cfg)) --j;
        out.push_back(pts[j]);
        i = j;
    }
    return out;
}

inline double polyline_length(const Vec2& start, const std::vector<Vec2>& pts) {
    double len = 0.0;
    Vec2 prev = start;
    for (const Vec2& p : pts) {
        len += distance(prev, p);
        prev = p;
    }
    return len;
}

}  // namespace detail

// ---------------------------------------------------------------------------

namespace detail {

// Draws goal, via point and path for the next leg. Mutates plan.rng_state.
inline void start_leg(WorldState& s, const WorldConfig& cfg, bool initial) {
    Rng rng(s.plan.rng_state);

    // Goals follow a noisy workflow cycle through the stations: the cycle
    // successor is favoured, any other station (never the current one) is
    // drawn otherwise. The initial goal is unconstrained.
    int current = s.plan.at_station ? s.human.goal : 0;
    int goal;
    if (initial) {
        goal = 1 + static_cast<int>(rng.uniform_int(kNumStations));
    } else {
        const int succ = current % kNumStations + 1;
        if (rng.uniform() < cfg.workflow_bias) {
            goal = succ;
        } else {
            do {
                goal = 1 + static_cast<int>(rng.uniform_int(kNumStations));
            } while (goal == current || goal == succ);
        }
    }

    const Vec2 from = s.human.position;
    const Vec2 to = cfg.station(goal).position;

    std::vector<Vec2> path;
    if (!initial && cfg.via_offset_max > 0.0) {
        // lateral via point: bends the leg so the early part does not aim
        // straight at the destination
        double frac = rng.uniform(0.35, 0.65);
        double offset = rng.uniform(0.6, cfg.via_offset_max) *
                        (rng.uniform() < 0.5 ? -1.0 : 1.0);
        Vec2 dir = (to - from).normalized();
        Vec2 lateral{-dir.y, dir.x};
        Vec2 via = from + (to - from) * frac + lateral * offset;
        for (int attempt = 0; attempt < 4; ++attempt) {
            if (cfg.in_arena(via, 0.5) && clearance(via, cfg.obstacles) > 0.45) break;
            via = from + (to - from) * frac + lateral * (offset *= 0.5);
        }
        if (cfg.in_arena(via, 0.5) && clearance(via, cfg.obstacles) > 0.45 &&
            distance(via, from) > 0.8 && distance(via, to) > 0.8) {
            path = plan_path(from, via, cfg);
            auto tail = plan_path(via, to, cfg);
            path.insert(path.end(), tail.begin(), tail.end());
        }
    }
    if (path.empty()) path = plan_path(from, to, cfg);

    s.plan.path = std::move(path);
    s.plan.path_index = 0;
    s.plan.leg_length = polyline_length(from, s.plan.path);
    s.plan.leg_travelled = 0.0;
    s.plan.initial_leg = initial;
    s.plan.at_station = false;

    // keep realized transitioning/moving tick counts near parity
    double leg_ticks = std::max(1.0, s.plan.leg_length / (cfg.human_speed * cfg.dt()));
    double deficit = static_cast<double>(s.plan.transition_ticks - s.plan.moving_ticks);
    s.plan.switch_fraction = std::clamp(0.5 - deficit / (2.0 * leg_ticks), 0.25, 0.75);

    s.human.goal = goal;
    s.human.phase = initial ? Phase::MovingToGoal : Phase::Transitioning;
    if (!s.plan.path.empty()) {
        Vec2 d = s.plan.path.front() - s.human.position;
        if (d.norm() > 1e-9) s.human.heading = std::atan2(d.y, d.x);
    }
    s.plan.rng_state = rng.derive("next").next_u64();
}

// Dwell length drawn at each arrival, steering the episode's stationary
// share toward one third of the tick budget: the draw is the remaining
// stationary deficit spread over the arrivals the budget still allows.
inline int adaptive_dwell_ticks(const WorldState& s, const WorldConfig& cfg,
                                Rng& rng) {
    const double nominal = 0.5 * (cfg.dwell_min_s + cfg.dwell_max_s) * cfg.tick_hz;
    if (s.plan.ticks_budget <= 0) {
        double dwell_s = rng.uniform(cfg.dwell_min_s, cfg.dwell_max_s);
        return std::max(1, static_cast<int>(std::lround(dwell_s * cfg.tick_hz)));
    }
    const double remaining =
        std::max<double>(0.0, static_cast<double>(s.plan.ticks_budget - s.tick));
    double mean_leg = 0.0;
    int cnt = 0;
    for (const auto& st : cfg.stations) {
        if (st.id == s.human.goal) continue;
        mean_leg += distance(s.human.position, st.position);
        ++cnt;
    }
    if (cnt > 0) mean_leg /= cnt;
    // 1.25: typical detour of planned paths over straight-line distance
    const double leg_ticks = 1.25 * mean_leg / (cfg.human_speed * cfg.dt());
    const double target = static_cast<double>(s.plan.ticks_budget) / 3.0;
    const double deficit = target - static_cast<double>(s.plan.stationary_ticks);
    const double arrivals_left =
        std::floor(remaining / std::max(1.0, leg_ticks + nominal));
    double want = deficit / (arrivals_left + 1.0) * rng.uniform(0.9, 1.15);
    const double floor_ticks = std::max(1.0, 0.5 * cfg.tick_hz);
    const double cap = std::max(floor_ticks, std::min(remaining, 6.0 * cfg.tick_hz));
    return static_cast<int>(std::lround(std::clamp(want, floor_ticks, cap)));
}

}  // namespace detail

inline WorldState step_world(const WorldState& state, const WorldConfig& cfg) {
    WorldState s = state;
    s.tick = state.tick + 1;
    const double dt = cfg.dt();

    // robots first; the human reacts to their new positions
    for (std::size_t i = 0; i < s.robots.size(); ++i) {
        const auto& spec = cfg.robots[i];
        if (spec.patrol.empty()) continue;
        RobotState& r = s.robots[i];
        Vec2 target = spec.patrol[r.patrol_target % spec.patrol.size()];
        Vec2 d = target - r.position;
        double step = cfg.robot_speed * dt;
        if (d.norm() <= step) {
            r.position = target;
            r.patrol_target = static_cast<int>((r.patrol_target + 1) % spec.patrol.size());
        } else {
            Vec2 dir = d.normalized();
            r.position += dir * step;
            r.heading = std::atan2(dir.y, dir.x);
        }
    }

    HumanState& h = s.human;
    PlanState& plan = s.plan;

    if (plan.dwell_ticks_left > 0) {
        plan.dwell_ticks_left--;
        h.speed = 0.0;
        h.phase = Phase::Stationary;
        plan.stationary_ticks++;
        if (plan.dwell_ticks_left == 0)
            detail::start_leg(s, cfg, /*initial=*/false);
        return s;
    }

    // walking a leg
    if (plan.path_index >= plan.path.size()) {
        // degenerate (empty path): treat as arrived
        plan.path_index = plan.path.size();
    }

    Vec2 target = plan.path_index < plan.path.size() ? plan.path[plan.path_index]
                                                     : cfg.station(h.goal).position;
    Vec2 to_target = target - h.position;
    double desired = to_target.norm() > 1e-9 ? std::atan2(to_target.y, to_target.x)
                                             : h.heading;

    // reactive steering: try headings fanned out around the desired one
    static constexpr double offsets[] = {0.0,  0.44, -0.44, 0.87, -0.87,
                                         1.31, -1.31, 1.75, -1.75};
    double step = cfg.human_speed * dt;
    bool moved = false;
    for (double off : offsets) {
        double heading = desired + off;
        Vec2 dir = from_heading(heading);
        Vec2 next = h.position + dir * step;
        if (!cfg.in_arena(next, 0.2)) continue;
        if (clearance(next, cfg.obstacles) < detail::kWalkClearance) continue;
        Vec2 look = h.position + dir * (3.0 * step);
        if (cfg.in_arena(look, 0.15) &&
            clearance(look, cfg.obstacles) < 0.15) continue;
        bool robot_block = false;
        for (const auto& r : s.robots) {
            if (distance(next, r.position) < 0.45) { robot_block = true; break; }
        }
        if (robot_block) continue;
        h.position = next;
        h.heading = heading;
        h.speed = cfg.human_speed;
        plan.leg_travelled += step;
        moved = true;
        break;
    }

    if (!moved) {
        // boxed in: hold position for this tick
        h.speed = 0.0;
        h.phase = Phase::Stationary;
        plan.stationary_ticks++;
        return s;
    }

    if (plan.path_index < plan.path.size() &&
        distance(h.position, plan.path[plan.path_index]) < 0.15)
        plan.path_index++;

    const Vec2 goal_pos = cfg.station(h.goal).position;
    if (plan.path_index >= plan.path.size() || distance(h.position, goal_pos) < 0.2) {
        // arrived: start dwelling
        Rng rng(plan.rng_state);
        plan.dwell_ticks_left = detail::adaptive_dwell_ticks(s, cfg, rng);
        plan.rng_state = rng.derive("next").next_u64();
        plan.at_station = true;
        h.speed = 0.0;
        h.phase = Phase::Stationary;
        plan.stationary_ticks++;
        return s;
    }

    double progress = plan.leg_length > 0 ? plan.leg_travelled / plan.leg_length : 1.0;
    if (plan.initial_leg || progress >= plan.switch_fraction) {
        h.phase = Phase::MovingToGoal;
        plan.moving_ticks++;
    } else {
        h.phase = Phase::Transitioning;
        plan.transition_ticks++;
    }
    return s;
}

inline WorldState generate_world(const WorldConfig& cfg) {
    cfg.validate();
    Rng root(mix64(cfg.seed));
    Rng start_rng = root.derive("start");
    Rng object_rng = root.derive("objects");
    Rng plan_rng = root.derive("plan");

    // every station must be reachable from every other
    for (const auto& a : cfg.stations)
        for (const auto& b : cfg.stations) {
            if (a.id == b.id) continue;
            detail::plan_path(a.position, b.position, cfg);  // throws if not
        }

    WorldState s;
    s.tick = 0;

    for (std::size_t i = 0; i < cfg.robots.size(); ++i) {
        RobotState r;
        r.position = cfg.robots[i].position;
        r.heading = cfg.robots[i].heading;
        r.patrol_target = 0;
        s.robots.push_back(r);
    }

    int next_id = 1;
    for (const auto& spec : cfg.objects) {
        ObjectState o;
        o.id = next_id++;
        o.category = spec.category;
        o.height = spec.height;
        Vec2 base = cfg.station(spec.station).position + spec.offset;
        o.position = base;
        for (int attempt = 0; attempt < 5; ++attempt) {
            Vec2 jittered = base + Vec2{object_rng.uniform(-0.25, 0.25),
                                        object_rng.uniform(-0.25, 0.25)};
            if (cfg.in_arena(jittered, 0.1) &&
                clearance(jittered, cfg.obstacles) > 0.1) {
                o.position = jittered;
                break;
            }
        }
        s.objects.push_back(o);
    }

    // seed-randomized start position, clear of obstacles and stations
    Vec2 start{cfg.arena_width / 2.0, cfg.arena_height / 2.0};
    for (int attempt = 0; attempt < 200; ++attempt) {
        Vec2 p{start_rng.uniform(0.6, cfg.arena_width - 0.6),
               start_rng.uniform(0.6, cfg.arena_height - 0.6)};
        if (clearance(p, cfg.obstacles) < 0.5) continue;
        bool near_station = false;
        for (const auto& st : cfg.stations)
            if (distance(p, st.position) < 1.2) { near_station = true; break; }
        if (near_station) continue;
        bool ok = true;
        try {
            for (const auto& st : cfg.stations) detail::plan_path(p, st.position, cfg);
        } catch (const ConfigError&) {
            ok = false;
        }
        if (!ok) continue;
        start = p;
        break;
    }

    s.human.position = start;
    s.human.speed = 0.0;
    s.plan.rng_state = plan_rng.next_u64();
    detail::start_leg(s, cfg, /*initial=*/true);
    return s;
}

// Canonical factory-floor layout. Scenario 1: open floor, static robots.
// Scenario 2: adds shelving/machine obstacles, robots still static.
// Scenario 3: obstacles plus patrolling robots.
inline WorldConfig default_world(int scenario, int robot_count, std::uint64_t seed) {
    if (robot_count < 1 || robot_count > 4)
        throw ConfigError("robot count must be between 1 and 4");
    WorldConfig cfg;
    cfg.scenario = scenario;
    cfg.seed = seed;
    cfg.stations = {
        {kStorage, {2.5, 12.5}},
        {kWorkstation, {17.5, 12.5}},
        {kAssembly, {9.0, 2.5}},
        {kManufacturing, {11.0, 2.5}},  // deliberately close to assembly
    };
    cfg.objects = {
        {"crate", kStorage, {-1.0, 0.6}, 0.8},
        {"box", kStorage, {0.9, 0.8}, 0.5},
        {"pallet", kStorage, {0.1, -1.1}, 0.25},
        {"desk", kWorkstation, {-0.9, 0.5}, 0.95},
        {"chair", kWorkstation, {-0.9, -0.6}, 1.1},
        {"storage_drawer", kWorkstation, {0.9, 0.7}, 1.3},
        {"computer", kWorkstation, {0.2, -0.9}, 0.5},
        {"workbench", kAssembly, {-1.0, 0.7}, 1.0},
        {"chair", kAssembly, {0.9, 0.9}, 1.1},
        {"cnc_machine", kManufacturing, {1.0, 0.6}, 1.7},
        {"table", kManufacturing, {-0.2, 1.2}, 0.9},
    };
    if (scenario >= 2) {
        cfg.obstacles = {
            ConvexPolygon::rectangle({10.0, 8.2}, 3.2, 1.4),
            ConvexPolygon::rectangle({5.2, 6.0}, 1.6, 2.6),
            ConvexPolygon::rectangle({14.6, 6.4}, 1.8, 2.2),
        };
    }
    const double pi = 3.14159265358979323846;
    std::vector<RobotSpec> all = {
        {{10.0, 0.5}, pi / 2, {}},
        {{19.3, 7.5}, pi, {}},
        {{0.7, 7.5}, 0.0, {}},
        {{10.0, 14.5}, -pi / 2, {}},
    };
    if (scenario == 3) {
        all[0].patrol = {{6.0, 3.5}, {14.0, 3.5}};
        all[1].patrol = {{16.5, 10.5}, {16.5, 4.5}};
        all[2].patrol = {{3.5, 4.5}, {3.5, 10.5}};
        all[3].patrol = {{13.0, 12.8}, {7.0, 12.8}};
    }
    cfg.robots.assign(all.begin(), all.begin() + robot_count);
    cfg.via_offset_max = scenario == 1 ? 0.0 : (scenario == 2 ? 2.0 : 2.5);
    return cfg;
}

inline std::array<long, 3> phase_counts(const EpisodeLog& log) {
    std::array<long, 3> counts{0, 0, 0};
    for (const auto& st : log.states) {
        switch (st.human.phase) {
            case Phase::MovingToGoal: counts[0]++; break;
            case Phase::Transitioning: counts[1]++; break;
            case Phase::Stationary: counts[2]++; break;
        }
    }
    return counts;
}

inline EpisodeLog generate_episode(const WorldConfig& cfg, long ticks) {
    if (ticks < 60)
        throw ConfigError("episode length must be at least 60 ticks");

    // retry with derived seeds until the phase mix is acceptable
    EpisodeLog best;
    double best_dev = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 8; ++attempt) {
        WorldConfig c = cfg;
        if (attempt > 0) c.seed = hash_combine(cfg.seed, 0x5EEDu + attempt);
        WorldState state = generate_world(c);
        state.plan.ticks_budget = ticks;

        EpisodeLog log;
        log.config = cfg;
        log.states.reserve(ticks);
        log.states.push_back(state);
        while (static_cast<long>(log.states.size()) < ticks) {
            state = step_world(state, c);
            log.states.push_back(state);
        }
        log.labels.reserve(ticks);
        for (const auto& st : log.states) log.labels.push_back(st.human.goal);

        auto counts = phase_counts(log);
        double dev = 0.0;
        bool ok = true;
        for (long cnt : counts) {
            double frac = static_cast<double>(cnt) / ticks;
            dev = std::max(dev, std::abs(frac - 1.0 / 3.0));
            if (frac < 0.26 || frac > 0.41) ok = false;
        }
        if (dev < best_dev) {
            best_dev = dev;
            best = std::move(log);
        }
        if (ok) break;
    }
    return best;
}

}  // namespace intentsim
