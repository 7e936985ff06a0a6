#pragma once

// Dataset assembly: generate episodes, run every robot's perception per
// tick, and cache the graph inputs (normalized adjacency, node features,
// keypoints) the models consume. Episodes are split 60/20/20 by episode
// after a seeded shuffle; frames of one episode never cross splits.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "intentsim/baselines.hpp"
#include "intentsim/error.hpp"
#include "intentsim/graph.hpp"
#include "intentsim/nn/model.hpp"
#include "intentsim/perception.hpp"
#include "intentsim/rng.hpp"
#include "intentsim/world.hpp"

namespace intentsim {

struct PipelineConfig {
    SensorConfig sensor;
    GraphConfig graph;
    ModelDims dims;
    int window = 20;      // observation frames consumed per prediction
    int subsample = 0;    // evaluation-time frames kept from the window (0 = all)
    bool fold_ego = false;
    int train_stride = 12;
    int eval_stride = 5;

    void validate() const {
        if (dims.feature != sensor.feature_dim)
            throw ConfigError("pipeline: model feature width must match sensor");
        if (window < 1) throw ConfigError("pipeline: window must be >= 1");
        if (dims.horizon < 0) throw ConfigError("pipeline: horizon must be >= 0");
        if (train_stride < 1 || eval_stride < 1)
            throw ConfigError("pipeline: strides must be >= 1");
    }
};

// One robot's cached view of one tick.
struct FrameRecord : FrameInput {
    int det_count = 0;  // all detections (objects + human) this tick
};

struct EpisodeData {
    std::uint64_t seed = 0;
    std::vector<int> labels;  // class indices 0..3 per tick
    std::vector<std::vector<FrameRecord>> robots;  // [robot][tick]
    std::vector<std::optional<Vec2>> head_meas;    // tracker stream (CVM)
    std::array<long, 3> phases{};                  // moving/transitioning/stationary
    double path_length = 0.0;

    long ticks() const { return static_cast<long>(labels.size()); }
};

struct Dataset {
    int scenario = 1;
    std::uint64_t seed = 0;
    std::vector<EpisodeData> episodes;
    std::vector<int> train_idx, val_idx, test_idx;
};

struct DatasetSpec {
    int scenario = 3;
    int episodes = 90;
    long ticks = 240;
    std::uint64_t seed = 1;

    void validate() const {
        if (scenario < 1 || scenario > 3) throw ConfigError("bad scenario");
        if (episodes < 5) throw ConfigError("need at least 5 episodes");
        if (ticks < 60) throw ConfigError("episodes need >= 60 ticks");
    }
};

inline FrameRecord build_frame(const WorldState& state, const WorldConfig& wcfg,
                               int robot, const PipelineConfig& pcfg) {
    FrameRecord rec;
    auto dets = sense(robot, state, wcfg, pcfg.sensor);
    rec.det_count = static_cast<int>(dets.size());
    rec.visible = human_detected(dets);
    if (rec.visible) {
        MatrixXd H0 = encode_features(dets, wcfg.scenario, pcfg.sensor);
        SceneGraph g = build_star_graph(dets, H0, pcfg.graph);
        rec.Ahat = normalize_adjacency(g);
        rec.H0 = g.features;
        rec.kp = extract_keypoints(dets, state, wcfg, pcfg.sensor).flatten();
    }
    return rec;
}

inline EpisodeData build_episode_data(const EpisodeLog& log,
                                      const PipelineConfig& pcfg,
                                      const SensorConfig* tracker) {
    EpisodeData ep;
    ep.seed = log.config.seed;
    const int num_robots = static_cast<int>(log.config.robots.size());
    ep.robots.resize(num_robots);
    const long T = static_cast<long>(log.states.size());
    for (int r = 0; r < num_robots; ++r) ep.robots[r].reserve(T);
    ep.labels.reserve(T);
    if (tracker) ep.head_meas.reserve(T);

    Vec2 prev = log.states.empty() ? Vec2{} : log.states.front().human.position;
    for (long t = 0; t < T; ++t) {
        const WorldState& s = log.states[t];
        ep.labels.push_back(log.labels[t] - 1);
        for (int r = 0; r < num_robots; ++r)
            ep.robots[r].push_back(build_frame(s, log.config, r, pcfg));
        if (tracker) {
            auto dets = sense(0, s, log.config, *tracker);
            auto kp = extract_keypoints(dets, s, log.config, *tracker);
            ep.head_meas.push_back(
                head_world_position(dets, kp, s.robots[0], *tracker));
        }
        switch (s.human.phase) {
            case Phase::MovingToGoal: ep.phases[0]++; break;
            case Phase::Transitioning: ep.phases[1]++; break;
            case Phase::Stationary: ep.phases[2]++; break;
        }
        ep.path_length += distance(prev, s.human.position);
        prev = s.human.position;
    }
    return ep;
}

inline std::uint64_t episode_seed(std::uint64_t dataset_seed, int index) {
    return mix64(hash_combine(dataset_seed, 0xE915ULL + index));
}

// 60/20/20 split by episode after a seeded shuffle.
inline void split_dataset(Dataset& ds) {
    const int n = static_cast<int>(ds.episodes.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix64(hash_combine(ds.seed, hash_tag("split"))));
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<int>(rng.uniform_int(i + 1))]);
    const int n_train = (n * 6) / 10;
    const int n_val = (n * 2) / 10;
    ds.train_idx.assign(order.begin(), order.begin() + n_train);
    ds.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    ds.test_idx.assign(order.begin() + n_train + n_val, order.end());
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.val_idx.begin(), ds.val_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
}

// Episodes are always generated with the full 4-robot team; evaluations
// with fewer robots consume the first k observation streams.
inline Dataset build_dataset(const DatasetSpec& spec, const PipelineConfig& pcfg,
                             const SensorConfig* tracker = nullptr) {
    spec.validate();
    pcfg.validate();
    Dataset ds;
    ds.scenario = spec.scenario;
    ds.seed = spec.seed;
    ds.episodes.reserve(spec.episodes);
    for (int i = 0; i < spec.episodes; ++i) {
        WorldConfig wcfg =
            default_world(spec.scenario, 4, episode_seed(spec.seed, i));
        EpisodeLog log = generate_episode(wcfg, spec.ticks);
        ds.episodes.push_back(build_episode_data(log, pcfg, tracker));
    }
    split_dataset(ds);
    return ds;
}

// --- sample builders -------------------------------------------------------

inline std::vector<SpatialSample> build_spatial_samples(
    const Dataset& ds, const std::vector<int>& episodes, int use_robots,
    int stride) {
    std::vector<SpatialSample> out;
    for (int e : episodes) {
        const EpisodeData& ep = ds.episodes[e];
        const int R = std::min<int>(use_robots, static_cast<int>(ep.robots.size()));
        for (int r = 0; r < R; ++r)
            for (long t = 0; t < ep.ticks(); t += stride) {
                const FrameRecord& f = ep.robots[r][t];
                if (!f.visible) continue;
                SpatialSample s;
                s.frame = f;
                s.label = ep.labels[t];
                out.push_back(std::move(s));
            }
    }
    return out;
}

// Sequence samples over sliding windows. In training mode for the
// collective model, each sample draws a seeded random neighbor subset so
// every team size from 1 to use_robots appears during training; otherwise
// all other robots participate. Neighbor frames enter a sample only when
// that neighbor saw the human (robots without a detection publish nothing).
inline std::vector<SeqSample> build_seq_samples(
    const Dataset& ds, const std::vector<int>& episodes, int use_robots,
    const PipelineConfig& pcfg, bool collective, bool train_mode,
    std::uint64_t sample_seed) {
    const int W = pcfg.window;
    const int n = pcfg.dims.horizon;
    const int stride = train_mode ? pcfg.train_stride : pcfg.eval_stride;
    std::vector<SeqSample> out;
    for (int e : episodes) {
        const EpisodeData& ep = ds.episodes[e];
        const int R = std::min<int>(use_robots, static_cast<int>(ep.robots.size()));
        for (int r = 0; r < R; ++r) {
            for (long t = W - 1; t + n < ep.ticks(); t += stride) {
                SeqSample s;
                s.frames.reserve(W);
                for (long k = t - W + 1; k <= t; ++k)
                    s.frames.push_back(ep.robots[r][k]);
                if (collective) {
                    std::vector<int> team;
                    for (int o = 0; o < R; ++o)
                        if (o != r) team.push_back(o);
                    if (train_mode && !team.empty()) {
                        Rng trng(draw_key(sample_seed, "team",
                                          static_cast<std::uint64_t>(e),
                                          static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(t), 0));
                        for (int i = static_cast<int>(team.size()) - 1; i > 0; --i)
                            std::swap(team[i],
                                      team[static_cast<int>(trng.uniform_int(i + 1))]);
                        team.resize(trng.uniform_int(team.size() + 1));
                        std::sort(team.begin(), team.end());
                    }
                    s.neighbors.resize(W);
                    for (int w = 0; w < W; ++w) {
                        long k = t - W + 1 + w;
                        for (int o : team)
                            if (ep.robots[o][k].visible)
                                s.neighbors[w].push_back(&ep.robots[o][k]);
                    }
                }
                s.label_t = ep.labels[t];
                for (long h = 1; h <= n; ++h)
                    s.labels_future.push_back(ep.labels[t + h]);
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace intentsim
