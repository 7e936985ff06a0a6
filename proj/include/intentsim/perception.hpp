#pragma once

// Per-robot sensing on a synthetic image plane.
//
// Each robot carries a forward camera with a fixed field of view and range.
// sense() returns one Detection per visible target (objects and the human),
// applying range, FOV-cone, obstacle-occlusion and seeded-miss filters.
// extract_keypoints() synthesizes a 17-point skeleton projected into the
// image plane. encode_features() replaces a CNN backbone with a seeded,
// category-discriminative pseudo-random embedding: a global scene half
// shared by all nodes of a frame plus a local per-object half.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/geometry.hpp"
#include "intentsim/rng.hpp"
#include "intentsim/world.hpp"

namespace intentsim {

inline constexpr int kHumanId = 0;
inline constexpr int kNumKeypoints = 17;
inline constexpr int kKeypointDim = 2 * kNumKeypoints;  // 34

struct SensorConfig {
    double fov_rad = 0.5 * 3.14159265358979323846;  // 90 degrees
    double range_m = 10.0;
    double p_miss = 0.05;
    double image_width = 640.0;
    double image_height = 480.0;
    double focal_px = 500.0;
    double camera_height = 1.0;   // meters above the floor
    double human_height = 1.75;
    double kp_jitter = 0.005;     // sigma, normalized image units
    int feature_dim = 64;         // F; node features have length 2F
    double feature_noise = 0.01;  // sigma on the local half
    double position_amp = 0.15;   // amplitude of the viewpoint term
    std::uint64_t seed = 0;
};

struct Detection {
    int object_id = 0;  // 0 = human, otherwise ObjectState::id
    std::string category;
    Vec2 rel;           // robot-frame position, x forward / y left (m)
    double range = 0.0;
    double bearing = 0.0;  // rad, + = left of the robot's heading
    double px = 0.0, py = 0.0;  // bounding-box center, pixels
    double bw = 0.0, bh = 0.0;  // bounding-box size, pixels
    int robot = 0;
    long tick = 0;
};

struct PoseKeypoints {
    std::array<double, kKeypointDim> values{};  // (u,v) pairs in [0,1]
    std::array<bool, kNumKeypoints> valid{};

    bool any_valid() const {
        for (bool v : valid)
            if (v) return true;
        return false;
    }
    Eigen::VectorXd flatten() const {
        Eigen::VectorXd out(kKeypointDim);
        for (int i = 0; i < kKeypointDim; ++i) out(i) = values[i];
        return out;
    }
};

struct VisibilityRecord {
    int robot = 0;
    long window_start = 0;
    long window_end = 0;  // inclusive
    long detections = 0;

    long window_length() const { return window_end - window_start + 1; }
};

// 17-point skeletal template: (lateral offset toward the human's left, height).
inline const std::array<std::pair<double, double>, kNumKeypoints>&
keypoint_template() {
    static const std::array<std::pair<double, double>, kNumKeypoints> tpl = {{
        {0.00, 1.65},   // head / nose
        {0.03, 1.68},  {-0.03, 1.68},   // eyes
        {0.07, 1.66},  {-0.07, 1.66},   // ears
        {0.20, 1.45},  {-0.20, 1.45},   // shoulders
        {0.25, 1.15},  {-0.25, 1.15},   // elbows
        {0.27, 0.85},  {-0.27, 0.85},   // wrists
        {0.12, 0.95},  {-0.12, 0.95},   // hips
        {0.13, 0.50},  {-0.13, 0.50},   // knees
        {0.14, 0.08},  {-0.14, 0.08},   // ankles
    }};
    return tpl;
}

namespace detail {

struct CameraHit {
    bool visible = false;
    double range = 0.0;
    double bearing = 0.0;
};

inline CameraHit project(const Vec2& robot_pos, double robot_heading,
                         const Vec2& target, const WorldConfig& world,
                         const SensorConfig& cam) {
    CameraHit hit;
    Vec2 d = target - robot_pos;
    hit.range = d.norm();
    if (hit.range < 1e-6 || hit.range > cam.range_m) return hit;
    hit.bearing = wrap_angle(std::atan2(d.y, d.x) - robot_heading);
    if (std::abs(hit.bearing) > cam.fov_rad / 2.0) return hit;
    if (segment_hits_any(robot_pos, target, world.obstacles)) return hit;
    hit.visible = true;
    return hit;
}

inline double pixel_x(double bearing, const SensorConfig& cam) {
    return (0.5 - bearing / cam.fov_rad) * cam.image_width;
}

inline double pixel_y(double height, double range, const SensorConfig& cam) {
    return cam.image_height / 2.0 +
           cam.focal_px * (cam.camera_height - height) / std::max(range, 0.5);
}

}  // namespace detail

// All targets (objects + human) visible to one robot at this tick.
// The human, when visible, is always the first entry (object_id 0).
inline std::vector<Detection> sense(int robot_index, const WorldState& world,
                                    const WorldConfig& world_cfg,
                                    const SensorConfig& cam) {
    if (robot_index < 0 || robot_index >= static_cast<int>(world.robots.size()))
        throw SimError("sense: robot index out of range");
    const RobotState& rob = world.robots[robot_index];
    std::vector<Detection> out;

    auto consider = [&](int id, const std::string& category, const Vec2& pos,
                        double height) {
        auto hit = detail::project(rob.position, rob.heading, pos, world_cfg, cam);
        if (!hit.visible) return;
        std::uint64_t key =
            draw_key(cam.seed, "miss", static_cast<std::uint64_t>(robot_index),
                     static_cast<std::uint64_t>(world.tick),
                     static_cast<std::uint64_t>(id), 0);
        if (keyed_uniform(key) < cam.p_miss) return;
        Detection det;
        det.object_id = id;
        det.category = category;
        double c = std::cos(rob.heading), s = std::sin(rob.heading);
        Vec2 d = pos - rob.position;
        det.rel = Vec2{c * d.x + s * d.y, -s * d.x + c * d.y};
        det.range = hit.range;
        det.bearing = hit.bearing;
        det.px = detail::pixel_x(hit.bearing, cam);
        det.py = detail::pixel_y(height / 2.0, hit.range, cam);
        det.bh = std::clamp(height * cam.focal_px / hit.range, 2.0,
                            cam.image_height);
        det.bw = 0.6 * det.bh;
        det.robot = robot_index;
        det.tick = world.tick;
        out.push_back(std::move(det));
    };

    consider(kHumanId, "human", world.human.position, cam.human_height);
    for (const auto& obj : world.objects)
        consider(obj.id, obj.category, obj.position, obj.height);
    return out;
}

inline bool human_detected(const std::vector<Detection>& dets) {
    for (const auto& d : dets)
        if (d.object_id == kHumanId) return true;
    return false;
}

// Skeleton keypoints for the detected human, projected into the observing
// robot's image plane and normalized to [0,1]. Undetected -> zeros, no
// valid flags.
inline PoseKeypoints extract_keypoints(const std::vector<Detection>& dets,
                                       const WorldState& world,
                                       const WorldConfig& world_cfg,
                                       const SensorConfig& cam) {
    PoseKeypoints kp;
    const Detection* human = nullptr;
    for (const auto& d : dets)
        if (d.object_id == kHumanId) { human = &d; break; }
    if (!human) return kp;

    const RobotState& rob = world.robots[human->robot];
    // human's left direction in world frame
    Vec2 left{-std::sin(world.human.heading), std::cos(world.human.heading)};
    const auto& tpl = keypoint_template();
    for (int i = 0; i < kNumKeypoints; ++i) {
        Vec2 p = world.human.position + left * tpl[i].first;
        Vec2 d = p - rob.position;
        double range = std::max(d.norm(), 0.5);
        double bearing = wrap_angle(std::atan2(d.y, d.x) - rob.heading);
        double u = detail::pixel_x(bearing, cam) / cam.image_width;
        double v = detail::pixel_y(tpl[i].second, range, cam) / cam.image_height;
        if (cam.kp_jitter > 0.0) {
            u += cam.kp_jitter *
                 keyed_normal(draw_key(cam.seed, "kp",
                                       static_cast<std::uint64_t>(human->robot),
                                       static_cast<std::uint64_t>(world.tick),
                                       static_cast<std::uint64_t>(i), 0));
            v += cam.kp_jitter *
                 keyed_normal(draw_key(cam.seed, "kp",
                                       static_cast<std::uint64_t>(human->robot),
                                       static_cast<std::uint64_t>(world.tick),
                                       static_cast<std::uint64_t>(i), 1));
        }
        kp.values[2 * i] = std::clamp(u, 0.0, 1.0);
        kp.values[2 * i + 1] = std::clamp(v, 0.0, 1.0);
        kp.valid[i] = true;
    }
    return kp;
}

// --- synthetic feature encoder --------------------------------------------

// Signature of the set of visible categories, order-insensitive.
inline std::uint64_t category_signature(const std::vector<Detection>& dets) {
    std::vector<std::string> cats;
    cats.reserve(dets.size());
    for (const auto& d : dets) cats.push_back(d.category);
    std::sort(cats.begin(), cats.end());
    std::uint64_t sig = 0x5161u;
    for (const auto& c : cats) sig = hash_combine(sig, hash_tag(c));
    return sig;
}

// Node feature = [global scene half | local object half], each of length F.
inline Eigen::MatrixXd encode_features(const std::vector<Detection>& dets,
                                       int scenario, const SensorConfig& cam) {
    if (dets.empty()) throw SimError("encode_features: no detections");
    const int F = cam.feature_dim;
    const std::uint64_t sig = category_signature(dets);
    Eigen::MatrixXd H0(static_cast<int>(dets.size()), 2 * F);

    Eigen::VectorXd global(F);
    for (int k = 0; k < F; ++k)
        global(k) = keyed_normal(draw_key(cam.seed, "scene",
                                          static_cast<std::uint64_t>(scenario),
                                          sig, static_cast<std::uint64_t>(k), 0));

    for (int row = 0; row < static_cast<int>(dets.size()); ++row) {
        const Detection& d = dets[row];
        const std::uint64_t cat = hash_tag(d.category);
        const double nx = d.rel.x / cam.range_m;
        const double ny = d.rel.y / cam.range_m;
        for (int k = 0; k < F; ++k) {
            H0(row, k) = global(k);
            double base = keyed_normal(
                draw_key(cam.seed, "cat", cat, static_cast<std::uint64_t>(k), 0, 0));
            double proj_x = keyed_normal(
                draw_key(cam.seed, "view", static_cast<std::uint64_t>(k), 0, 0, 0));
            double proj_y = keyed_normal(
                draw_key(cam.seed, "view", static_cast<std::uint64_t>(k), 1, 0, 0));
            double noise = keyed_normal(
                draw_key(cam.seed, "obs", static_cast<std::uint64_t>(d.robot),
                         static_cast<std::uint64_t>(d.tick),
                         static_cast<std::uint64_t>(d.object_id),
                         static_cast<std::uint64_t>(k)));
            H0(row, F + k) = base + cam.position_amp * (proj_x * nx + proj_y * ny) +
                             cam.feature_noise * noise;
        }
    }
    return H0;
}

// Team-wide detection counts over a closed tick window, one per robot.
inline std::vector<VisibilityRecord> count_visibility(
    const std::vector<std::vector<std::vector<Detection>>>& per_robot_per_tick,
    long window_start, long window_end) {
    std::vector<VisibilityRecord> out;
    for (std::size_t r = 0; r < per_robot_per_tick.size(); ++r) {
        VisibilityRecord rec;
        rec.robot = static_cast<int>(r);
        rec.window_start = window_start;
        rec.window_end = window_end;
        for (long t = window_start; t <= window_end; ++t) {
            const auto& ticks = per_robot_per_tick[r];
            if (t < 0 || t >= static_cast<long>(ticks.size())) continue;
            rec.detections += static_cast<long>(ticks[t].size());
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace intentsim
