#pragma once

// Constant-velocity baseline: a 4-state Kalman filter ([x y vx vy]) tracks
// the human's head; the goal prediction uses the average velocity over the
// twelve latest filtered states. Near-zero average speed predicts the
// nearest station, otherwise the station closest to the forward velocity
// ray wins (ties to the nearest station).

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/geometry.hpp"
#include "intentsim/perception.hpp"
#include "intentsim/world.hpp"

namespace intentsim {

struct InsufficientHistoryError : SimError {
    InsufficientHistoryError()
        : SimError("cvm: fewer than 12 filtered states available") {}
};

struct KalmanConfig {
    double dt = 0.1;
    double process_noise = 0.5;      // acceleration spectral density
    double measurement_noise = 0.05; // position stddev (m)
    double initial_velocity_var = 4.0;
    double stationary_speed = 0.1;   // m/s
    int history = 12;
    int max_misses = 10;  // consecutive missed frames before the track drops
};

struct KalmanTrack {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();  // [px py vx vy]
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
    std::deque<Eigen::Vector4d> states;  // newest at the back, bounded
    bool initialized = false;

    static KalmanTrack init(const Vec2& pos, const KalmanConfig& cfg) {
        KalmanTrack t;
        t.x << pos.x, pos.y, 0.0, 0.0;
        double r2 = cfg.measurement_noise * cfg.measurement_noise;
        t.P.setZero();
        t.P(0, 0) = t.P(1, 1) = r2;
        t.P(2, 2) = t.P(3, 3) = cfg.initial_velocity_var;
        t.initialized = true;
        return t;
    }
};

inline KalmanTrack kalman_step(const KalmanTrack& track,
                               const std::optional<Vec2>& measurement,
                               const KalmanConfig& cfg) {
    if (!track.initialized) throw SimError("kalman_step: uninitialized track");
    KalmanTrack t = track;
    const double dt = cfg.dt;

    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = dt;
    F(1, 3) = dt;
    const double q = cfg.process_noise;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    const double dt2 = dt * dt, dt3 = dt2 * dt;
    for (int axis = 0; axis < 2; ++axis) {
        Q(axis, axis) = q * dt3 / 3.0;
        Q(axis, axis + 2) = Q(axis + 2, axis) = q * dt2 / 2.0;
        Q(axis + 2, axis + 2) = q * dt;
    }

    t.x = F * t.x;
    t.P = F * t.P * F.transpose() + Q;

    if (measurement) {
        Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
        H(0, 0) = H(1, 1) = 1.0;
        const double r2 = cfg.measurement_noise * cfg.measurement_noise;
        Eigen::Matrix2d R = r2 * Eigen::Matrix2d::Identity();
        Eigen::Matrix2d S = H * t.P * H.transpose() + R;
        if (S.determinant() > 1e-300) {
            Eigen::Matrix<double, 4, 2> K = t.P * H.transpose() * S.inverse();
            Eigen::Vector2d z(measurement->x, measurement->y);
            t.x += K * (z - H * t.x);
            Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
            // Joseph form keeps P symmetric PSD
            t.P = IKH * t.P * IKH.transpose() + K * R * K.transpose();
        }
    }

    t.states.push_back(t.x);
    while (static_cast<int>(t.states.size()) > cfg.history) t.states.pop_front();
    return t;
}

// Distance from a point to the half-line origin + s*dir (s >= 0, |dir| = 1).
inline double distance_to_ray(const Vec2& point, const Vec2& origin,
                              const Vec2& dir) {
    Vec2 d = point - origin;
    double along = d.dot(dir);
    if (along <= 0.0) return d.norm();
    return (d - dir * along).norm();
}

inline int cvm_predict(const KalmanTrack& track,
                       const std::vector<Station>& stations,
                       const KalmanConfig& cfg) {
    if (static_cast<int>(track.states.size()) < cfg.history)
        throw InsufficientHistoryError();
    Vec2 vel{0.0, 0.0};
    for (const auto& s : track.states) {
        vel.x += s(2);
        vel.y += s(3);
    }
    vel = vel * (1.0 / track.states.size());
    Vec2 pos{track.x(0), track.x(1)};

    auto nearest = [&]() {
        int best = stations.front().id;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& s : stations) {
            double d = distance(pos, s.position);
            if (d < best_d || (d == best_d && s.id < best)) {
                best_d = d;
                best = s.id;
            }
        }
        return best;
    };

    if (vel.norm() < cfg.stationary_speed) return nearest();

    Vec2 dir = vel.normalized();
    int best = stations.front().id;
    double best_ray = std::numeric_limits<double>::infinity();
    double best_range = std::numeric_limits<double>::infinity();
    for (const auto& s : stations) {
        double ray_d = distance_to_ray(s.position, pos, dir);
        double range = distance(pos, s.position);
        bool better = ray_d < best_ray - 1e-9 ||
                      (std::abs(ray_d - best_ray) <= 1e-9 && range < best_range);
        if (better) {
            best_ray = ray_d;
            best_range = range;
            best = s.id;
        }
    }
    return best;
}

// World-frame head position recovered from the synthetic keypoints: bearing
// from the head keypoint's horizontal image coordinate, range from the
// human detection, both mapped through the observing robot's pose.
inline std::optional<Vec2> head_world_position(const std::vector<Detection>& dets,
                                               const PoseKeypoints& kp,
                                               const RobotState& robot,
                                               const SensorConfig& cam) {
    const Detection* human = nullptr;
    for (const auto& d : dets)
        if (d.object_id == kHumanId) { human = &d; break; }
    if (!human || !kp.valid[0]) return std::nullopt;
    double u = kp.values[0];
    double bearing = (0.5 - u) * cam.fov_rad;
    double heading = robot.heading + bearing;
    return robot.position + from_heading(heading) * human->range;
}

}  // namespace intentsim
