#pragma once

// Experiment plumbing: train a model on a dataset split, evaluate models
// by streaming episodes through perception + transport + consensus, and
// emit metrics rows with a fixed CSV column order.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "intentsim/baselines.hpp"
#include "intentsim/comms.hpp"
#include "intentsim/consensus.hpp"
#include "intentsim/dataset.hpp"
#include "intentsim/nn/calibration.hpp"
#include "intentsim/nn/model.hpp"
#include "intentsim/nn/train.hpp"

namespace intentsim {

inline double metric_nan() {
    return std::numeric_limits<double>::quiet_NaN();
}

// --- training orchestration ------------------------------------------------

struct TrainedModel {
    ModelParams params;
    TrainCurve curve;
};

// Train one model kind on the dataset's train split, early-stopping on the
// validation split, then fit the softmax temperature on validation logits.
inline TrainedModel train_pipeline(const Dataset& ds, ModelKind kind,
                                   const PipelineConfig& pcfg,
                                   const TrainConfig& tcfg, int use_robots = 4) {
    tcfg.validate();
    pcfg.validate();
    TrainedModel out;
    out.params = make_model(kind, pcfg.dims, pcfg.fold_ego, tcfg.seed,
                            tcfg.init_scale);

    TrainProblem problem;
    std::vector<SpatialSample> sp_train, sp_val;
    std::vector<SeqSample> sq_train, sq_val;
    if (kind == ModelKind::Spatial) {
        sp_train = build_spatial_samples(ds, ds.train_idx, use_robots,
                                         pcfg.train_stride);
        sp_val = build_spatial_samples(ds, ds.val_idx, use_robots,
                                       pcfg.eval_stride);
        if (sp_train.empty()) throw ConfigError("train: no visible frames");
        problem.train_count = static_cast<int>(sp_train.size());
        problem.val_count = static_cast<int>(sp_val.size());
        problem.loss_grad = [&sp_train](const ModelParams& p, int i,
                                        ModelParams& g) {
            return spatial_loss_grad(p, sp_train[i], g);
        };
        problem.val_loss = [&sp_val](const ModelParams& p, int i) {
            return spatial_loss(p, sp_val[i]);
        };
    } else {
        const bool collective = kind == ModelKind::Collective;
        sq_train = build_seq_samples(ds, ds.train_idx, use_robots, pcfg,
                                     collective, true, tcfg.seed);
        sq_val = build_seq_samples(ds, ds.val_idx, use_robots, pcfg,
                                   collective, false, tcfg.seed);
        if (sq_train.empty()) throw ConfigError("train: no usable windows");
        problem.train_count = static_cast<int>(sq_train.size());
        problem.val_count = static_cast<int>(sq_val.size());
        problem.loss_grad = [&sq_train](const ModelParams& p, int i,
                                        ModelParams& g) {
            return seq_loss_grad(p, sq_train[i], g);
        };
        problem.val_loss = [&sq_val](const ModelParams& p, int i) {
            return seq_loss(p, sq_val[i]);
        };
    }
    out.curve = train(out.params, problem, tcfg);

    // temperature from validation frame-t logits
    std::vector<std::pair<VectorXd, int>> cal;
    if (kind == ModelKind::Spatial) {
        for (const auto& s : sp_val)
            cal.emplace_back(spatial_predict(out.params, s.frame), s.label);
    } else {
        std::vector<int> idx =
            subsample_indices(pcfg.window, 0);
        for (const auto& s : sq_val) {
            SeqOutput o = window_forward(
                out.params.gru, assemble_inputs(out.params, s, idx), 0);
            cal.emplace_back(o.logits_t, s.label_t);
        }
    }
    if (!cal.empty())
        out.params.temperature = calibrate_temperature(cal).temperature;
    return out;
}

// --- evaluation ------------------------------------------------------------

struct EvalOptions {
    int use_robots = 4;
    NetworkModel net;
    double alpha = 0.5;
    double beta = 0.5;
    int subsample = 0;  // frames kept from the window (0 = all)
    std::vector<std::string>* message_dump = nullptr;     // JSON lines
    std::vector<std::string>* prediction_dump = nullptr;  // JSON lines
};

// One recorded voting round (loss-free view), for alpha/beta re-sweeps.
struct VoteRound {
    VoteInput input;
    int label = 0;  // class index
};

struct ModelEval {
    double acc_t = metric_nan();
    double acc_horizon = metric_nan();
    std::array<double, 4> per_robot{metric_nan(), metric_nan(), metric_nan(),
                                    metric_nan()};
    double consensus_acc = metric_nan();
    double consensus_horizon = metric_nan();
    double disagreement = metric_nan();
    long frames = 0;
    long degenerate_votes = 0;
    std::array<std::array<long, 4>, 4> confusion{};  // [true][pred], frame t
    std::array<std::array<long, 4>, 4> consensus_confusion{};
    std::vector<VoteRound> vote_rounds;  // collective evaluations only
};

namespace detail {

struct Counter {
    long correct = 0;
    long total = 0;
    double ratio() const {
        return total > 0 ? static_cast<double>(correct) / total : metric_nan();
    }
    void add(bool ok) {
        correct += ok ? 1 : 0;
        ++total;
    }
};

inline void dump_prediction(std::vector<std::string>* sink,
                            const std::string& model, std::uint64_t ep_seed,
                            int robot, long tick, int station, double confidence,
                            const VectorXd& logits) {
    if (!sink) return;
    nlohmann::json j;
    j["model"] = model;
    j["episode_seed"] = ep_seed;
    j["robot"] = robot;
    j["tick"] = tick;
    j["action"] = station;
    j["confidence"] = confidence;
    j["logits"] = std::vector<double>(logits.data(), logits.data() + logits.size());
    sink->push_back(j.dump());
}

inline long window_detections(const EpisodeData& ep, int robot, long t_begin,
                              long t_end) {
    long total = 0;
    for (long t = t_begin; t <= t_end; ++t)
        total += ep.robots[robot][t].det_count;
    return total;
}

inline int modal_station(const std::vector<int>& stations) {
    std::array<int, kNumStations + 1> counts{};
    for (int s : stations) counts[s]++;
    int best = 1;
    for (int s = 2; s <= kNumStations; ++s)
        if (counts[s] > counts[best]) best = s;
    return best;
}

}  // namespace detail

// GNN-only evaluation: one spatial prediction per robot per eval tick;
// blind frames fall back to the uniform distribution.
inline ModelEval evaluate_spatial(const ModelParams& model, const Dataset& ds,
                                  const std::vector<int>& episodes,
                                  const PipelineConfig& pcfg,
                                  const EvalOptions& opts) {
    ModelEval ev;
    detail::Counter overall;
    std::array<detail::Counter, 4> per_robot;
    for (int e : episodes) {
        const EpisodeData& ep = ds.episodes[e];
        const int R = std::min<int>(opts.use_robots,
                                    static_cast<int>(ep.robots.size()));
        for (long t = pcfg.window - 1; t + pcfg.dims.horizon < ep.ticks();
             t += pcfg.eval_stride) {
            for (int r = 0; r < R; ++r) {
                VectorXd logits = spatial_predict(model, ep.robots[r][t]);
                int pred = argmax(logits);
                bool ok = pred == ep.labels[t];
                overall.add(ok);
                per_robot[r].add(ok);
                ev.confusion[ep.labels[t]][pred]++;
                detail::dump_prediction(
                    opts.prediction_dump, model_kind_name(model.kind), ep.seed,
                    r, t, pred + 1,
                    calibrated_confidence(logits, model.temperature), logits);
            }
        }
    }
    ev.acc_t = overall.ratio();
    ev.frames = overall.total;
    for (int r = 0; r < 4; ++r) ev.per_robot[r] = per_robot[r].ratio();
    return ev;
}

// Ego / collective evaluation. Embeddings travel over the transport for
// the collective model; consensus voting runs on top of it.
inline ModelEval evaluate_sequence(const ModelParams& model, const Dataset& ds,
                                   const std::vector<int>& episodes,
                                   const PipelineConfig& pcfg,
                                   const EvalOptions& opts) {
    if (model.kind == ModelKind::Spatial)
        throw ConfigError("evaluate_sequence: got a spatial model");
    const bool collective = model.kind == ModelKind::Collective;
    const int W = pcfg.window;
    const int n = model.dims.horizon;
    const int E = model.dims.embed;
    const std::vector<int> idx = subsample_indices(W, opts.subsample);

    ModelEval ev;
    detail::Counter overall, consensus_t, consensus_h, disagree;
    std::array<detail::Counter, 4> per_robot;
    std::vector<detail::Counter> horizon(n);

    for (int e : episodes) {
        const EpisodeData& ep = ds.episodes[e];
        const int R = std::min<int>(opts.use_robots,
                                    static_cast<int>(ep.robots.size()));
        const long T = ep.ticks();

        // per-tick embeddings and transported neighbor aggregates
        std::vector<std::vector<VectorXd>> emb(
            R, std::vector<VectorXd>(T, VectorXd::Zero(E)));
        std::vector<std::vector<VectorXd>> nbr_mean(
            R, std::vector<VectorXd>(T, VectorXd::Zero(E)));
        std::vector<std::vector<int>> nbr_count(R, std::vector<int>(T, 0));

        NetworkModel net = opts.net;
        net.seed = hash_combine(opts.net.seed, ep.seed);
        Transport transport(R, net);

        for (long t = 0; t < T; ++t) {
            for (int r = 0; r < R; ++r) {
                const FrameRecord& f = ep.robots[r][t];
                if (!f.visible) continue;
                emb[r][t] = human_embedding(gcn_forward(f.Ahat, f.H0, model.gcn));
                if (collective)
                    transport.publish(EmbeddingMsg{r, t, emb[r][t]});
            }
            if (!collective) continue;
            for (int r = 0; r < R; ++r) {
                auto [embs, preds] = transport.collect(r, t);
                (void)preds;
                nbr_mean[r][t] = aggregate_embeddings(embs, E);
                nbr_count[r][t] = static_cast<int>(embs.size());
                if (opts.message_dump)
                    for (const auto& m : embs) {
                        nlohmann::json j;
                        j["type"] = "embedding";
                        j["sender"] = m.sender;
                        j["receiver"] = r;
                        j["sent_tick"] = m.tick;
                        j["tick"] = t;
                        j["episode_seed"] = ep.seed;
                        opts.message_dump->push_back(j.dump());
                    }
            }
        }

        for (long t = W - 1; t + n < T; t += pcfg.eval_stride) {
            std::vector<int> actions(R);
            std::vector<double> confs(R);
            std::vector<long> counts(R);
            for (int r = 0; r < R; ++r) {
                std::vector<VectorXd> xs;
                xs.reserve(idx.size());
                for (int i : idx) {
                    long k = t - W + 1 + i;
                    const FrameRecord& f = ep.robots[r][k];
                    VectorXd x(model.input_size());
                    if (!collective) {
                        x << emb[r][k], f.kp;
                    } else if (!model.fold_ego) {
                        x << emb[r][k], nbr_mean[r][k], f.kp;
                    } else {
                        VectorXd mean = VectorXd::Zero(E);
                        int count = nbr_count[r][k] + (f.visible ? 1 : 0);
                        if (count > 0)
                            mean = (nbr_mean[r][k] * nbr_count[r][k] +
                                    (f.visible ? emb[r][k] : VectorXd::Zero(E))) /
                                   count;
                        x << mean, f.kp;
                    }
                    xs.push_back(std::move(x));
                }
                SeqOutput out = window_forward(model.gru, xs, n);
                int pred = argmax(out.logits_t);
                bool ok = pred == ep.labels[t];
                overall.add(ok);
                per_robot[r].add(ok);
                ev.confusion[ep.labels[t]][pred]++;
                for (int h = 0; h < n; ++h)
                    horizon[h].add(argmax(out.forecast_logits[h]) ==
                                   ep.labels[t + 1 + h]);
                actions[r] = pred + 1;
                confs[r] = calibrated_confidence(out.logits_t, model.temperature);
                counts[r] = detail::window_detections(ep, r, t - W + 1, t);
                detail::dump_prediction(opts.prediction_dump,
                                        model_kind_name(model.kind), ep.seed, r,
                                        t, pred + 1, confs[r], out.logits_t);
            }

            if (!collective) continue;

            // share predictions, then each robot votes over what it holds
            // once the round's messages are due
            for (int r = 0; r < R; ++r)
                transport.publish(PredictionMsg{r, t, actions[r], confs[r],
                                                counts[r]});
            const long due = t + net.latency_ticks;
            std::vector<int> decisions(R);
            for (int r = 0; r < R; ++r) {
                auto [embs2, preds] = transport.collect(r, due);
                (void)embs2;
                VoteInput vote;
                vote.alpha = opts.alpha;
                vote.beta = opts.beta;
                vote.actions.push_back(actions[r]);
                vote.confidences.push_back(confs[r]);
                vote.counts.push_back(counts[r]);
                for (const auto& m : preds) {
                    vote.actions.push_back(m.action);
                    vote.confidences.push_back(m.confidence);
                    vote.counts.push_back(m.n_detected);
                    if (opts.message_dump) {
                        nlohmann::json j;
                        j["type"] = "prediction";
                        j["sender"] = m.sender;
                        j["receiver"] = r;
                        j["tick"] = t;
                        j["episode_seed"] = ep.seed;
                        j["action"] = m.action;
                        j["confidence"] = m.confidence;
                        j["n_detected"] = m.n_detected;
                        opts.message_dump->push_back(j.dump());
                    }
                }
                try {
                    decisions[r] = decide(vote).decided;
                } catch (const DegenerateVisibilityError&) {
                    ev.degenerate_votes++;
                    for (auto& c : vote.counts) c = 1;  // uniform fallback
                    decisions[r] = decide(vote).decided;
                }
            }
            bool all_same = true;
            for (int r = 1; r < R; ++r)
                if (decisions[r] != decisions[0]) all_same = false;
            disagree.add(!all_same);
            int decided = detail::modal_station(decisions);
            consensus_t.add(decided - 1 == ep.labels[t]);
            ev.consensus_confusion[ep.labels[t]][decided - 1]++;
            for (int h = 1; h <= n; ++h)
                consensus_h.add(decided - 1 == ep.labels[t + h]);

            VoteRound round;
            round.input.alpha = opts.alpha;
            round.input.beta = opts.beta;
            round.input.actions = actions;
            round.input.confidences = confs;
            round.input.counts = counts;
            round.label = ep.labels[t];
            ev.vote_rounds.push_back(std::move(round));
        }
    }

    ev.acc_t = overall.ratio();
    ev.frames = overall.total;
    for (int r = 0; r < 4; ++r) ev.per_robot[r] = per_robot[r].ratio();
    if (n > 0) {
        double sum = 0.0;
        for (const auto& c : horizon) sum += c.ratio();
        ev.acc_horizon = sum / n;
    }
    if (collective) {
        ev.consensus_acc = consensus_t.ratio();
        ev.consensus_horizon = consensus_h.ratio();
        ev.disagreement = disagree.total > 0
                              ? static_cast<double>(disagree.correct) /
                                    disagree.total
                              : metric_nan();
    }
    return ev;
}

// Constant-velocity baseline over the tracker stream (robot 0's camera).
inline ModelEval evaluate_cvm(const Dataset& ds,
                              const std::vector<int>& episodes,
                              const PipelineConfig& pcfg,
                              const KalmanConfig& kcfg,
                              const EvalOptions& opts) {
    ModelEval ev;
    detail::Counter overall;
    std::vector<detail::Counter> horizon(pcfg.dims.horizon);
    const int n = pcfg.dims.horizon;
    for (int e : episodes) {
        const EpisodeData& ep = ds.episodes[e];
        if (ep.head_meas.empty())
            throw ConfigError("evaluate_cvm: dataset built without tracker");
        WorldConfig wcfg = default_world(ds.scenario, 1, ep.seed);
        KalmanTrack track;
        int misses = 0;
        long next_eval = pcfg.window - 1;
        for (long t = 0; t < ep.ticks(); ++t) {
            const auto& meas = ep.head_meas[t];
            if (track.initialized) {
                misses = meas ? 0 : misses + 1;
                if (misses > kcfg.max_misses)
                    track = KalmanTrack{};  // stale: drop, reacquire later
                else
                    track = kalman_step(track, meas, kcfg);
            }
            if (!track.initialized && meas) {
                track = KalmanTrack::init(*meas, kcfg);
                misses = 0;
            }
            if (t < next_eval || t + n >= ep.ticks()) continue;
            next_eval = t + pcfg.eval_stride;
            // no usable track: answer anyway, mirroring the blind spatial
            // model's deterministic uniform-argmax fallback
            int pred;
            if (!track.initialized ||
                static_cast<int>(track.states.size()) < kcfg.history) {
                pred = kStorage;
                ev.fallback_frames++;
            } else {
                pred = cvm_predict(track, wcfg.stations, kcfg);
            }
            bool ok = pred - 1 == ep.labels[t];
            overall.add(ok);
            ev.confusion[ep.labels[t]][pred - 1]++;
            for (int h = 0; h < n; ++h)
                horizon[h].add(pred - 1 == ep.labels[t + 1 + h]);
            detail::dump_prediction(opts.prediction_dump, "cvm", ep.seed, 0, t,
                                    pred, 1.0, VectorXd::Zero(4));
        }
    }
    ev.acc_t = overall.ratio();
    ev.frames = overall.total;
    if (n > 0) {
        double sum = 0.0;
        for (const auto& c : horizon) sum += c.ratio();
        ev.acc_horizon = sum / n;
    }
    return ev;
}

// --- metrics ---------------------------------------------------------------

struct FramePrediction {
    int pred_t = 0;               // class index predicted for the frame
    std::vector<int> pred_future; // class indices for t+1..t+n
};

// Frame accuracy plus mean-over-horizons accuracy against future labels.
inline std::pair<double, double> compute_accuracy(
    const std::vector<FramePrediction>& preds,
    const std::vector<std::vector<int>>& labels, int n) {
    if (preds.size() != labels.size())
        throw SimError("compute_accuracy: prediction/label count mismatch");
    detail::Counter at_t;
    std::vector<detail::Counter> horizon(n);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (static_cast<int>(preds[i].pred_future.size()) != n ||
            static_cast<int>(labels[i].size()) != n + 1)
            throw SimError("compute_accuracy: horizon misalignment");
        at_t.add(preds[i].pred_t == labels[i][0]);
        for (int h = 0; h < n; ++h)
            horizon[h].add(preds[i].pred_future[h] == labels[i][h + 1]);
    }
    double hsum = 0.0;
    for (const auto& c : horizon) hsum += c.ratio();
    return {at_t.ratio(), n > 0 ? hsum / n : metric_nan()};
}

struct MetricsRow {
    int scenario = 0;
    int robots = 0;
    int obs_frames = 0;
    int forecast_frames = 0;
    int subsample = 0;
    std::string model;
    std::uint64_t seed = 0;
    double acc_t = metric_nan();
    double acc_horizon = metric_nan();
    double consensus_acc = metric_nan();
    double disagreement_rate = metric_nan();
    std::array<double, 4> per_robot{metric_nan(), metric_nan(), metric_nan(),
                                    metric_nan()};
    std::array<std::array<long, 4>, 4> confusion{};

    auto coordinate() const {
        return std::tie(scenario, robots, obs_frames, forecast_frames,
                        subsample, model, seed);
    }
};

inline std::string format_metric(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

inline void write_metrics_csv(std::vector<MetricsRow> rows, std::ostream& out) {
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) {
                  return a.coordinate() < b.coordinate();
              });
    out << "scenario,robots,obs_frames,forecast_frames,subsample,model,seed,"
           "acc_t,acc_horizon,consensus_acc,disagreement_rate,"
           "acc_1,acc_2,acc_3,acc_4\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.robots << ',' << r.obs_frames << ','
            << r.forecast_frames << ',' << r.subsample << ',' << r.model << ','
            << r.seed << ',' << format_metric(r.acc_t) << ','
            << format_metric(r.acc_horizon) << ','
            << format_metric(r.consensus_acc) << ','
            << format_metric(r.disagreement_rate);
        for (int i = 0; i < 4; ++i) out << ',' << format_metric(r.per_robot[i]);
        out << '\n';
    }
}

inline nlohmann::json metrics_to_json(std::vector<MetricsRow> rows) {
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) {
                  return a.coordinate() < b.coordinate();
              });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["scenario"] = r.scenario;
        j["robots"] = r.robots;
        j["obs_frames"] = r.obs_frames;
        j["forecast_frames"] = r.forecast_frames;
        j["subsample"] = r.subsample;
        j["model"] = r.model;
        j["seed"] = r.seed;
        auto put = [&j](const char* key, double v) {
            if (std::isnan(v))
                j[key] = nullptr;
            else
                j[key] = v;
        };
        put("acc_t", r.acc_t);
        put("acc_horizon", r.acc_horizon);
        put("consensus_acc", r.consensus_acc);
        put("disagreement_rate", r.disagreement_rate);
        for (int i = 0; i < 4; ++i)
            put(("acc_" + std::to_string(i + 1)).c_str(), r.per_robot[i]);
        j["confusion"] = r.confusion;
        arr.push_back(std::move(j));
    }
    return arr;
}

// Re-run recorded voting rounds under different weightings.
inline std::vector<std::tuple<double, double, double>> alpha_beta_sweep(
    const std::vector<VoteRound>& rounds,
    const std::vector<std::pair<double, double>>& weights) {
    std::vector<std::tuple<double, double, double>> out;
    for (auto [alpha, beta] : weights) {
        detail::Counter acc;
        for (const auto& round : rounds) {
            VoteInput in = round.input;
            in.alpha = alpha;
            in.beta = beta;
            int decided;
            try {
                decided = decide(in).decided;
            } catch (const DegenerateVisibilityError&) {
                for (auto& c : in.counts) c = 1;
                decided = decide(in).decided;
            }
            acc.add(decided - 1 == round.label);
        }
        out.emplace_back(alpha, beta, acc.ratio());
    }
    return out;
}

}  // namespace intentsim
