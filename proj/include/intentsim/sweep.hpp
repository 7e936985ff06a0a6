#pragma once

// Experiment specification (JSON), the sweep runner, and its artifacts:
// results.csv + results.json (fixed column order), optional alpha/beta
// voting sweep, checkpoints, and replay inputs (episode logs + canonical
// prediction dump) for the determinism contract.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "intentsim/harness.hpp"
#include "intentsim/nn/checkpoint.hpp"
#include "intentsim/world_io.hpp"

namespace intentsim {

// --- config parsing --------------------------------------------------------

inline SensorConfig sensor_from_json(const nlohmann::json& j) {
    SensorConfig c;
    c.fov_rad = j.value("fov_deg", 90.0) * 3.14159265358979323846 / 180.0;
    c.range_m = j.value("range_m", c.range_m);
    c.p_miss = j.value("p_miss", c.p_miss);
    c.image_width = j.value("image_width", c.image_width);
    c.image_height = j.value("image_height", c.image_height);
    c.focal_px = j.value("focal_px", c.focal_px);
    c.camera_height = j.value("camera_height", c.camera_height);
    c.human_height = j.value("human_height", c.human_height);
    c.kp_jitter = j.value("kp_jitter", c.kp_jitter);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.feature_noise = j.value("feature_noise", c.feature_noise);
    c.position_amp = j.value("position_amp", c.position_amp);
    c.seed = j.value("seed", c.seed);
    if (c.fov_rad <= 0 || c.range_m <= 0 || c.feature_dim <= 0)
        throw ConfigError("sensor: fov, range and feature_dim must be positive");
    if (c.p_miss < 0 || c.p_miss > 1)
        throw ConfigError("sensor: p_miss must be within [0, 1]");
    return c;
}

inline GraphConfig graph_from_json(const nlohmann::json& j) {
    GraphConfig c;
    c.edge_affinity = j.value("edge_affinity", c.edge_affinity);
    c.affinity_sigma = j.value("affinity_sigma", c.affinity_sigma);
    if (c.affinity_sigma <= 0)
        throw ConfigError("graph: affinity_sigma must be positive");
    return c;
}

inline ModelDims dims_from_json(const nlohmann::json& j, int feature_dim) {
    ModelDims d;
    d.feature = feature_dim;
    d.gcn_hidden = j.value("gcn_hidden", d.gcn_hidden);
    d.embed = j.value("embed", d.embed);
    d.gru_hidden = j.value("gru_hidden", d.gru_hidden);
    d.classes = j.value("classes", d.classes);
    d.horizon = j.value("horizon", d.horizon);
    if (d.gcn_hidden <= 0 || d.embed <= 0 || d.gru_hidden <= 0 ||
        d.classes != 4 || d.horizon < 0)
        throw ConfigError("dims: invalid model dimensions");
    return d;
}

inline PipelineConfig pipeline_from_json(const nlohmann::json& j) {
    PipelineConfig p;
    p.sensor = sensor_from_json(j.value("sensor", nlohmann::json::object()));
    p.graph = graph_from_json(j.value("graph", nlohmann::json::object()));
    p.dims = dims_from_json(j.value("dims", nlohmann::json::object()),
                            p.sensor.feature_dim);
    p.window = j.value("window", p.window);
    p.subsample = j.value("subsample", p.subsample);
    p.fold_ego = j.value("fold_ego", p.fold_ego);
    p.train_stride = j.value("train_stride", p.train_stride);
    p.eval_stride = j.value("eval_stride", p.eval_stride);
    p.validate();
    return p;
}

inline NetworkModel network_from_json(const nlohmann::json& j) {
    NetworkModel n;
    n.p_drop = j.value("p_drop", n.p_drop);
    n.latency_ticks = j.value("latency_ticks", n.latency_ticks);
    n.seed = j.value("seed", n.seed);
    n.validate();
    return n;
}

inline TrainConfig train_from_json(const nlohmann::json& j) {
    TrainConfig t;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.epochs = j.value("epochs", t.epochs);
    t.init_scale = j.value("init_scale", t.init_scale);
    t.seed = j.value("seed", t.seed);
    t.optimizer = j.value("optimizer", t.optimizer);
    t.patience = j.value("patience", t.patience);
    t.momentum = j.value("momentum", t.momentum);
    t.clip_norm = j.value("clip_norm", t.clip_norm);
    t.validate();
    return t;
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& j,
                                          std::uint64_t seed) {
    DatasetSpec d;
    d.scenario = j.value("scenario", d.scenario);
    d.episodes = j.value("episodes", d.episodes);
    d.ticks = j.value("ticks", d.ticks);
    d.seed = seed;
    d.validate();
    return d;
}

inline KalmanConfig kalman_from_json(const nlohmann::json& j) {
    KalmanConfig k;
    k.dt = j.value("dt", k.dt);
    k.process_noise = j.value("process_noise", k.process_noise);
    k.measurement_noise = j.value("measurement_noise", k.measurement_noise);
    k.initial_velocity_var = j.value("initial_velocity_var", k.initial_velocity_var);
    k.stationary_speed = j.value("stationary_speed", k.stationary_speed);
    k.history = j.value("history", k.history);
    k.max_misses = j.value("max_misses", k.max_misses);
    if (k.dt <= 0 || k.history < 1 || k.max_misses < 1)
        throw ConfigError("kalman: dt, history and max_misses must be positive");
    return k;
}

// Wide "tracker" camera for the constant-velocity baseline: the paper's
// tracker follows the head continuously, so the default covers the floor.
inline SensorConfig default_tracker(const SensorConfig& base) {
    SensorConfig t = base;
    t.fov_rad = 2.0 * 3.14159265358979323846;
    t.range_m = 30.0;
    return t;
}

struct ExperimentSpec {
    int scenario = 3;
    std::vector<int> robot_counts{1, 2, 3, 4};
    std::vector<std::pair<int, int>> horizons{{20, 20}};  // (obs, forecast)
    std::vector<int> subsamples{0};
    std::vector<std::string> models{"gnn", "ego", "collective", "consensus",
                                    "cvm"};
    std::vector<std::uint64_t> seeds{1};
    double alpha = 0.5;
    double beta = 0.5;
    std::vector<std::pair<double, double>> alpha_beta;  // optional sweep
    NetworkModel network;
    int episodes = 90;
    long ticks = 240;
    PipelineConfig pipeline;
    TrainConfig train_cfg;
    KalmanConfig kalman;
    SensorConfig tracker;
    bool dump_messages = false;

    void validate() const {
        if (scenario < 1 || scenario > 3) throw ConfigError("bad scenario");
        if (robot_counts.empty() || horizons.empty() || subsamples.empty() ||
            models.empty() || seeds.empty())
            throw ConfigError("sweep: empty axis");
        std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
        if (uniq.size() != seeds.size())
            throw ConfigError("sweep: seeds must be distinct");
        for (int k : robot_counts)
            if (k < 1 || k > 4) throw ConfigError("robot counts must be 1..4");
        for (auto [o, f] : horizons)
            if (o < 1 || f < 0) throw ConfigError("bad horizon pair");
        static const std::set<std::string> known{"gnn", "ego", "collective",
                                                "consensus", "cvm"};
        for (const auto& m : models)
            if (!known.count(m)) throw ConfigError("unknown model: " + m);
    }
};

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.scenario = j.value("scenario", s.scenario);
    if (j.contains("robot_counts"))
        s.robot_counts = j.at("robot_counts").get<std::vector<int>>();
    if (j.contains("horizons")) {
        s.horizons.clear();
        for (const auto& h : j.at("horizons"))
            s.horizons.emplace_back(h.at(0).get<int>(), h.at(1).get<int>());
    }
    if (j.contains("subsamples"))
        s.subsamples = j.at("subsamples").get<std::vector<int>>();
    if (j.contains("models"))
        s.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("seeds"))
        s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.alpha = j.value("alpha", s.alpha);
    s.beta = j.value("beta", s.beta);
    if (j.contains("alpha_beta_sweep"))
        for (const auto& w : j.at("alpha_beta_sweep"))
            s.alpha_beta.emplace_back(w.at(0).get<double>(),
                                      w.at(1).get<double>());
    s.network = network_from_json(j.value("network", nlohmann::json::object()));
    if (j.contains("dataset")) {
        s.episodes = j.at("dataset").value("episodes", s.episodes);
        s.ticks = j.at("dataset").value("ticks", s.ticks);
    }
    s.pipeline = pipeline_from_json(j.value("pipeline", nlohmann::json::object()));
    s.train_cfg = train_from_json(j.value("train", nlohmann::json::object()));
    s.kalman = kalman_from_json(j.value("kalman", nlohmann::json::object()));
    s.tracker = j.contains("tracker") ? sensor_from_json(j.at("tracker"))
                                      : default_tracker(s.pipeline.sensor);
    s.dump_messages = j.value("dump_messages", s.dump_messages);
    s.validate();
    return s;
}

// --- sweep runner ----------------------------------------------------------

namespace detail {

inline bool wants(const ExperimentSpec& spec, const std::string& model) {
    for (const auto& m : spec.models)
        if (m == model) return true;
    return false;
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write " + path.string());
    out << text;
}

inline void write_lines(const std::filesystem::path& path,
                        const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write " + path.string());
    for (const auto& l : lines) out << l << "\n";
}

}  // namespace detail

struct SweepResult {
    std::vector<MetricsRow> rows;
    // (alpha, beta, consensus accuracy) per (seed, horizon pair)
    std::vector<std::tuple<std::uint64_t, int, double, double, double>> ab_rows;
};

inline SweepResult run_sweep(const ExperimentSpec& spec,
                             const std::string& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "checkpoints");

    SweepResult result;
    std::vector<std::string> predictions;
    std::vector<std::string> messages;
    const bool need_cvm = detail::wants(spec, "cvm");
    const bool need_collective =
        detail::wants(spec, "collective") || detail::wants(spec, "consensus");
    const int canonical_robots =
        *std::max_element(spec.robot_counts.begin(), spec.robot_counts.end());
    const int canonical_sub = spec.subsamples.front();
    bool replay_written = false;

    for (std::uint64_t seed : spec.seeds) {
        DatasetSpec dspec;
        dspec.scenario = spec.scenario;
        dspec.episodes = spec.episodes;
        dspec.ticks = spec.ticks;
        dspec.seed = seed;
        Dataset ds = build_dataset(dspec, spec.pipeline,
                                   need_cvm ? &spec.tracker : nullptr);

        for (std::size_t hp = 0; hp < spec.horizons.size(); ++hp) {
            auto [obs, forecast] = spec.horizons[hp];
            PipelineConfig pcfg = spec.pipeline;
            pcfg.window = obs;
            pcfg.dims.horizon = forecast;

            const bool canonical_block = !replay_written;

            std::map<std::string, ModelParams> trained;
            auto train_kind = [&](const std::string& name, ModelKind kind) {
                TrainConfig tcfg = spec.train_cfg;
                tcfg.seed = mix64(hash_combine(
                    hash_combine(seed, hash_tag(name)), obs * 1000 + forecast));
                TrainedModel tm = train_pipeline(ds, kind, pcfg, tcfg);
                trained.emplace(name, tm.params);
                save_checkpoint(tm.params,
                                (fs::path(out_dir) / "checkpoints" /
                                 (name + "_seed" + std::to_string(seed) +
                                  "_obs" + std::to_string(obs) + "_fc" +
                                  std::to_string(forecast) + ".json"))
                                    .string());
            };
            if (detail::wants(spec, "gnn")) train_kind("gnn", ModelKind::Spatial);
            if (detail::wants(spec, "ego")) train_kind("ego", ModelKind::Ego);
            if (need_collective) train_kind("collective", ModelKind::Collective);

            std::optional<ModelEval> cvm_eval;
            if (need_cvm) {
                EvalOptions opts;
                opts.use_robots = 1;
                if (canonical_block) opts.prediction_dump = &predictions;
                cvm_eval =
                    evaluate_cvm(ds, ds.test_idx, pcfg, spec.kalman, opts);
            }

            bool ab_done = false;
            for (int k : spec.robot_counts) {
                std::optional<ModelEval> spatial_eval;
                for (int sub : spec.subsamples) {
                    auto base_row = [&](const std::string& model) {
                        MetricsRow r;
                        r.scenario = spec.scenario;
                        r.robots = k;
                        r.obs_frames = obs;
                        r.forecast_frames = forecast;
                        r.subsample = sub;
                        r.model = model;
                        r.seed = seed;
                        return r;
                    };
                    const bool canonical =
                        canonical_block && k == canonical_robots &&
                        sub == canonical_sub;

                    if (detail::wants(spec, "gnn")) {
                        if (!spatial_eval) {
                            EvalOptions opts;
                            opts.use_robots = k;
                            if (canonical) opts.prediction_dump = &predictions;
                            spatial_eval =
                                evaluate_spatial(trained.at("gnn"), ds,
                                                 ds.test_idx, pcfg, opts);
                        }
                        MetricsRow r = base_row("gnn");
                        r.acc_t = spatial_eval->acc_t;
                        r.per_robot = spatial_eval->per_robot;
                        r.confusion = spatial_eval->confusion;
                        result.rows.push_back(std::move(r));
                    }
                    if (detail::wants(spec, "ego")) {
                        EvalOptions opts;
                        opts.use_robots = k;
                        opts.subsample = sub;
                        opts.net = spec.network;
                        if (canonical) opts.prediction_dump = &predictions;
                        ModelEval ev = evaluate_sequence(
                            trained.at("ego"), ds, ds.test_idx, pcfg, opts);
                        MetricsRow r = base_row("ego");
                        r.acc_t = ev.acc_t;
                        r.acc_horizon = ev.acc_horizon;
                        r.per_robot = ev.per_robot;
                        r.confusion = ev.confusion;
                        result.rows.push_back(std::move(r));
                    }
                    if (need_collective) {
                        EvalOptions opts;
                        opts.use_robots = k;
                        opts.subsample = sub;
                        opts.net = spec.network;
                        opts.alpha = spec.alpha;
                        opts.beta = spec.beta;
                        if (canonical) opts.prediction_dump = &predictions;
                        if (spec.dump_messages && canonical)
                            opts.message_dump = &messages;
                        ModelEval ev = evaluate_sequence(
                            trained.at("collective"), ds, ds.test_idx, pcfg,
                            opts);
                        if (detail::wants(spec, "collective")) {
                            MetricsRow r = base_row("collective");
                            r.acc_t = ev.acc_t;
                            r.acc_horizon = ev.acc_horizon;
                            r.consensus_acc = ev.consensus_acc;
                            r.disagreement_rate = ev.disagreement;
                            r.per_robot = ev.per_robot;
                            r.confusion = ev.confusion;
                            result.rows.push_back(std::move(r));
                        }
                        if (detail::wants(spec, "consensus")) {
                            MetricsRow r = base_row("consensus");
                            r.acc_t = ev.consensus_acc;
                            r.acc_horizon = ev.consensus_horizon;
                            r.consensus_acc = ev.consensus_acc;
                            r.disagreement_rate = ev.disagreement;
                            r.per_robot = ev.per_robot;
                            r.confusion = ev.consensus_confusion;
                            result.rows.push_back(std::move(r));
                        }
                        if (!spec.alpha_beta.empty() && !ab_done &&
                            k == canonical_robots) {
                            for (auto [a, b, acc] : alpha_beta_sweep(
                                     ev.vote_rounds, spec.alpha_beta))
                                result.ab_rows.emplace_back(seed, obs, a, b,
                                                            acc);
                            ab_done = true;
                        }
                    }
                    if (need_cvm) {
                        MetricsRow r = base_row("cvm");
                        r.acc_t = cvm_eval->acc_t;
                        r.acc_horizon = cvm_eval->acc_horizon;
                        r.confusion = cvm_eval->confusion;
                        result.rows.push_back(std::move(r));
                    }
                }
            }

            if (canonical_block) {
                // replay inputs: logs of the evaluated episodes plus the
                // canonical prediction dump written below
                fs::create_directories(fs::path(out_dir) / "replay" /
                                       "episodes");
                for (int e : ds.test_idx) {
                    WorldConfig wcfg = default_world(
                        spec.scenario, 4, episode_seed(seed, e));
                    EpisodeLog log = generate_episode(wcfg, spec.ticks);
                    save_episode(log, (fs::path(out_dir) / "replay" /
                                       "episodes" /
                                       ("ep_" + std::to_string(wcfg.seed) +
                                        ".ndjson"))
                                          .string());
                }
                nlohmann::json rc;
                rc["schema_version"] = kSchemaVersion;
                rc["use_robots"] = canonical_robots;
                rc["subsample"] = canonical_sub;
                rc["alpha"] = spec.alpha;
                rc["beta"] = spec.beta;
                rc["window"] = obs;
                rc["horizon"] = forecast;
                detail::write_text(fs::path(out_dir) / "replay" /
                                       "replay_config.json",
                                   rc.dump(2) + "\n");
                replay_written = true;
            }
        }
    }

    std::ostringstream csv;
    write_metrics_csv(result.rows, csv);
    detail::write_text(fs::path(out_dir) / "results.csv", csv.str());
    detail::write_text(fs::path(out_dir) / "results.json",
                       metrics_to_json(result.rows).dump(2) + "\n");
    if (!result.ab_rows.empty()) {
        std::ostringstream ab;
        ab << "seed,obs_frames,alpha,beta,consensus_acc\n";
        for (auto [s, obs, a, b, acc] : result.ab_rows)
            ab << s << ',' << obs << ',' << format_metric(a) << ','
               << format_metric(b) << ',' << format_metric(acc) << '\n';
        detail::write_text(fs::path(out_dir) / "alpha_beta.csv", ab.str());
    }
    detail::write_lines(fs::path(out_dir) / "predictions.jsonl", predictions);
    if (spec.dump_messages)
        detail::write_lines(fs::path(out_dir) / "messages.jsonl", messages);
    return result;
}

}  // namespace intentsim
