// Command-line front end: dataset generation, training, evaluation,
// experiment sweeps, and deterministic replay of recorded episodes.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "intentsim/harness.hpp"
#include "intentsim/manifest.hpp"
#include "intentsim/sweep.hpp"
#include "intentsim/world_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace intentsim;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool deterministic = false;
    bool dump_messages = false;
};

json load_config(const GlobalArgs& args) {
    if (args.config_path.empty())
        throw ConfigError("missing --config <path>");
    std::ifstream in(args.config_path);
    if (!in) throw ConfigError("cannot open config: " + args.config_path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

std::uint64_t resolve_seed(const GlobalArgs& args, const json& cfg) {
    if (args.seed_set) return args.seed;
    return cfg.value("seed", std::uint64_t{1});
}

void finish(RunManifest& manifest) {
    manifest.finished_at = std::time(nullptr);
    write_manifest(manifest);
}

RunManifest start_manifest(const std::string& command, const GlobalArgs& args,
                           const json& cfg, std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.config = cfg;
    m.seed = seed;
    m.seed_overridden = args.seed_set;
    m.deterministic = args.deterministic;
    m.out_dir = args.out_dir;
    m.started_at = std::time(nullptr);
    return m;
}

int run_gen_data(const GlobalArgs& args) {
    const json cfg = load_config(args);
    const std::uint64_t seed = resolve_seed(args, cfg);
    RunManifest manifest = start_manifest("gen-data", args, cfg, seed);
    DatasetSpec dspec =
        dataset_spec_from_json(cfg.value("dataset", json::object()), seed);

    fs::create_directories(fs::path(args.out_dir) / "episodes");
    Dataset ds;
    ds.scenario = dspec.scenario;
    ds.seed = dspec.seed;
    ds.episodes.resize(dspec.episodes);
    split_dataset(ds);
    auto split_of = [&](int i) -> const char* {
        if (std::binary_search(ds.train_idx.begin(), ds.train_idx.end(), i))
            return "train";
        if (std::binary_search(ds.val_idx.begin(), ds.val_idx.end(), i))
            return "val";
        return "test";
    };

    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["scenario"] = dspec.scenario;
    summary["seed"] = dspec.seed;
    summary["ticks"] = dspec.ticks;
    summary["splits"] = {{"train", ds.train_idx.size()},
                         {"val", ds.val_idx.size()},
                         {"test", ds.test_idx.size()}};
    json eps = json::array();
    for (int i = 0; i < dspec.episodes; ++i) {
        WorldConfig wcfg =
            default_world(dspec.scenario, 4, episode_seed(dspec.seed, i));
        EpisodeLog log = generate_episode(wcfg, dspec.ticks);
        const std::string file = "episodes/ep_" + std::to_string(i) + ".ndjson";
        save_episode(log, (fs::path(args.out_dir) / file).string());
        auto phases = phase_counts(log);
        eps.push_back({{"index", i},
                       {"seed", wcfg.seed},
                       {"file", file},
                       {"split", split_of(i)},
                       {"phases",
                        {{"moving", phases[0]},
                         {"transitioning", phases[1]},
                         {"stationary", phases[2]}}}});
    }
    summary["episodes"] = eps;
    {
        std::ofstream out(fs::path(args.out_dir) / "dataset.json");
        if (!out) throw SimError("cannot write dataset.json");
        out << summary.dump(2) << "\n";
    }
    finish(manifest);
    std::cout << "gen-data: " << dspec.episodes << " episodes ("
              << ds.train_idx.size() << "/" << ds.val_idx.size() << "/"
              << ds.test_idx.size() << " train/val/test) -> " << args.out_dir
              << "\n";
    return 0;
}

int run_train(const GlobalArgs& args) {
    const json cfg = load_config(args);
    const std::uint64_t seed = resolve_seed(args, cfg);
    RunManifest manifest = start_manifest("train", args, cfg, seed);

    const std::string model_name = cfg.value("model", std::string("collective"));
    const ModelKind kind = model_kind_from_name(model_name);
    DatasetSpec dspec =
        dataset_spec_from_json(cfg.value("dataset", json::object()), seed);
    PipelineConfig pcfg =
        pipeline_from_json(cfg.value("pipeline", json::object()));
    TrainConfig tcfg = train_from_json(cfg.value("train", json::object()));
    if (args.seed_set)
        tcfg.seed = mix64(hash_combine(seed, hash_tag("train")));
    const int use_robots = cfg.value("use_robots", 4);

    Dataset ds = build_dataset(dspec, pcfg);
    TrainedModel tm = train_pipeline(ds, kind, pcfg, tcfg, use_robots);

    fs::create_directories(args.out_dir);
    save_checkpoint(tm.params,
                    (fs::path(args.out_dir) / "checkpoint.json").string());
    {
        std::ofstream out(fs::path(args.out_dir) / "curve.csv");
        if (!out) throw SimError("cannot write curve.csv");
        out << "epoch,train_loss,val_loss\n";
        for (std::size_t i = 0; i < tm.curve.train_loss.size(); ++i)
            out << i << ',' << format_metric(tm.curve.train_loss[i]) << ','
                << format_metric(tm.curve.val_loss[i]) << '\n';
    }
    finish(manifest);
    std::cout << "train: " << model_name << " best val loss "
              << format_metric(tm.curve.best_val) << " at epoch "
              << tm.curve.best_epoch << ", temperature "
              << format_metric(tm.params.temperature) << " -> "
              << args.out_dir << "/checkpoint.json\n";
    return 0;
}

int run_eval(const GlobalArgs& args) {
    const json cfg = load_config(args);
    const std::uint64_t seed = resolve_seed(args, cfg);
    RunManifest manifest = start_manifest("eval", args, cfg, seed);

    DatasetSpec dspec =
        dataset_spec_from_json(cfg.value("dataset", json::object()), seed);
    PipelineConfig pcfg =
        pipeline_from_json(cfg.value("pipeline", json::object()));
    const json ecfg = cfg.value("eval", json::object());
    EvalOptions opts;
    opts.use_robots = ecfg.value("use_robots", 4);
    opts.subsample = ecfg.value("subsample", 0);
    opts.alpha = ecfg.value("alpha", 0.5);
    opts.beta = ecfg.value("beta", 0.5);
    opts.net = network_from_json(cfg.value("network", json::object()));
    std::vector<std::string> predictions, messages;
    opts.prediction_dump = &predictions;
    if (args.dump_messages) opts.message_dump = &messages;

    const std::string model_name = cfg.value("model", std::string(""));
    std::vector<MetricsRow> rows;
    auto base_row = [&](const std::string& model) {
        MetricsRow r;
        r.scenario = dspec.scenario;
        r.robots = opts.use_robots;
        r.obs_frames = pcfg.window;
        r.forecast_frames = pcfg.dims.horizon;
        r.subsample = opts.subsample;
        r.model = model;
        r.seed = seed;
        return r;
    };

    if (model_name == "cvm") {
        KalmanConfig kcfg = kalman_from_json(cfg.value("kalman", json::object()));
        SensorConfig tracker = cfg.contains("tracker")
                                   ? sensor_from_json(cfg.at("tracker"))
                                   : default_tracker(pcfg.sensor);
        Dataset ds = build_dataset(dspec, pcfg, &tracker);
        ModelEval ev = evaluate_cvm(ds, ds.test_idx, pcfg, kcfg, opts);
        MetricsRow r = base_row("cvm");
        r.acc_t = ev.acc_t;
        r.acc_horizon = ev.acc_horizon;
        r.confusion = ev.confusion;
        rows.push_back(std::move(r));
    } else {
        const std::string ckpt = cfg.value("checkpoint", std::string(""));
        if (ckpt.empty())
            throw ConfigError("eval: need \"checkpoint\" path or model=cvm");
        ModelParams params = load_checkpoint(ckpt);
        if (params.dims.feature != pcfg.sensor.feature_dim)
            throw ConfigError("eval: checkpoint feature dim does not match sensor");
        pcfg.dims = params.dims;
        pcfg.validate();
        Dataset ds = build_dataset(dspec, pcfg);
        if (params.kind == ModelKind::Spatial) {
            ModelEval ev = evaluate_spatial(params, ds, ds.test_idx, pcfg, opts);
            MetricsRow r = base_row(model_kind_name(params.kind));
            r.acc_t = ev.acc_t;
            r.per_robot = ev.per_robot;
            r.confusion = ev.confusion;
            rows.push_back(std::move(r));
        } else {
            ModelEval ev = evaluate_sequence(params, ds, ds.test_idx, pcfg, opts);
            MetricsRow r = base_row(model_kind_name(params.kind));
            r.acc_t = ev.acc_t;
            r.acc_horizon = ev.acc_horizon;
            r.consensus_acc = ev.consensus_acc;
            r.disagreement_rate = ev.disagreement;
            r.per_robot = ev.per_robot;
            r.confusion = ev.confusion;
            rows.push_back(std::move(r));
            if (params.kind == ModelKind::Collective) {
                MetricsRow c = base_row("consensus");
                c.acc_t = ev.consensus_acc;
                c.acc_horizon = ev.consensus_horizon;
                c.consensus_acc = ev.consensus_acc;
                c.disagreement_rate = ev.disagreement;
                c.per_robot = ev.per_robot;
                c.confusion = ev.consensus_confusion;
                rows.push_back(std::move(c));
            }
        }
    }

    fs::create_directories(args.out_dir);
    {
        std::ofstream out(fs::path(args.out_dir) / "metrics.csv");
        if (!out) throw SimError("cannot write metrics.csv");
        write_metrics_csv(rows, out);
    }
    {
        std::ofstream out(fs::path(args.out_dir) / "metrics.json");
        if (!out) throw SimError("cannot write metrics.json");
        out << metrics_to_json(rows).dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(args.out_dir) / "predictions.jsonl");
        for (const auto& l : predictions) out << l << "\n";
    }
    if (args.dump_messages) {
        std::ofstream out(fs::path(args.out_dir) / "messages.jsonl");
        for (const auto& l : messages) out << l << "\n";
    }
    finish(manifest);
    for (const auto& r : rows)
        std::cout << "eval: " << r.model << " acc_t "
                  << format_metric(r.acc_t) << " acc_horizon "
                  << format_metric(r.acc_horizon) << "\n";
    return 0;
}

int run_sweep_cmd(const GlobalArgs& args) {
    const json cfg = load_config(args);
    ExperimentSpec spec = experiment_from_json(cfg);
    if (args.seed_set) spec.seeds = {args.seed};
    if (args.dump_messages) spec.dump_messages = true;
    RunManifest manifest = start_manifest(
        "sweep", args, cfg, args.seed_set ? args.seed : spec.seeds.front());

    SweepResult result = run_sweep(spec, args.out_dir);
    finish(manifest);
    std::cout << "sweep: " << result.rows.size() << " rows -> "
              << args.out_dir << "/results.csv\n";
    return 0;
}

int run_replay(const GlobalArgs& args) {
    const json cfg = load_config(args);
    const std::uint64_t seed = resolve_seed(args, cfg);
    RunManifest manifest = start_manifest("replay", args, cfg, seed);

    const std::string ep_path = cfg.value("episode", std::string(""));
    const std::string ckpt = cfg.value("checkpoint", std::string(""));
    if (ep_path.empty() || ckpt.empty())
        throw ConfigError("replay: need \"episode\" and \"checkpoint\" paths");
    EpisodeLog log = load_episode(ep_path);
    ModelParams params = load_checkpoint(ckpt);
    PipelineConfig pcfg =
        pipeline_from_json(cfg.value("pipeline", json::object()));
    if (params.dims.feature != pcfg.sensor.feature_dim)
        throw ConfigError("replay: checkpoint feature dim does not match sensor");
    pcfg.dims = params.dims;
    pcfg.window = cfg.value("window", pcfg.window);
    pcfg.validate();

    Dataset ds;
    ds.scenario = log.config.scenario;
    ds.seed = log.config.seed;
    ds.episodes.push_back(build_episode_data(log, pcfg, nullptr));
    ds.test_idx = {0};

    EvalOptions opts;
    opts.use_robots = cfg.value("use_robots", 4);
    opts.subsample = cfg.value("subsample", 0);
    opts.alpha = cfg.value("alpha", 0.5);
    opts.beta = cfg.value("beta", 0.5);
    opts.net = network_from_json(cfg.value("network", json::object()));
    std::vector<std::string> predictions, messages;
    opts.prediction_dump = &predictions;
    if (args.dump_messages) opts.message_dump = &messages;

    if (params.kind == ModelKind::Spatial)
        evaluate_spatial(params, ds, ds.test_idx, pcfg, opts);
    else
        evaluate_sequence(params, ds, ds.test_idx, pcfg, opts);

    fs::create_directories(args.out_dir);
    {
        std::ofstream out(fs::path(args.out_dir) / "predictions.jsonl");
        for (const auto& l : predictions) out << l << "\n";
    }
    if (args.dump_messages) {
        std::ofstream out(fs::path(args.out_dir) / "messages.jsonl");
        for (const auto& l : messages) out << l << "\n";
    }

    const std::string compare = cfg.value("compare", std::string(""));
    if (!compare.empty()) {
        std::ifstream in(compare);
        if (!in) throw ConfigError("replay: cannot open compare file " + compare);
        const std::string want_model = model_kind_name(params.kind);
        const std::uint64_t want_seed = ds.episodes[0].seed;
        std::vector<std::string> reference;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.value("model", std::string("")) == want_model &&
                j.value("episode_seed", std::uint64_t{0}) == want_seed)
                reference.push_back(line);
        }
        if (reference.size() != predictions.size())
            throw SimError("replay: prediction count mismatch (" +
                           std::to_string(predictions.size()) + " vs " +
                           std::to_string(reference.size()) + " reference)");
        for (std::size_t i = 0; i < reference.size(); ++i)
            if (reference[i] != predictions[i])
                throw SimError("replay: prediction " + std::to_string(i) +
                               " differs from reference");
        std::cout << "replay: " << predictions.size()
                  << " predictions match reference\n";
    } else {
        std::cout << "replay: " << predictions.size() << " predictions -> "
                  << args.out_dir << "/predictions.jsonl\n";
    }
    finish(manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic multi-robot intent prediction simulator"};
    app.require_subcommand(1);
    app.fallthrough(false);

    GlobalArgs args;
    std::string command;
    auto add_common = [&](CLI::App* sub, bool with_dump) {
        sub->add_option("--config", args.config_path,
                        "JSON configuration file");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--seed", args.seed, "override the configured seed")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--deterministic", args.deterministic,
                      "record the determinism contract in the manifest");
        if (with_dump)
            sub->add_flag("--dump-messages", args.dump_messages,
                          "write exchanged messages to messages.jsonl");
        sub->callback([&, sub] { command = sub->get_name(); });
    };
    add_common(app.add_subcommand("gen-data",
                                  "generate episode logs and split summary"),
               false);
    add_common(app.add_subcommand("train", "train a model on a generated dataset"),
               false);
    add_common(app.add_subcommand("eval", "evaluate a checkpoint or baseline"),
               true);
    add_common(app.add_subcommand("sweep", "run a full experiment grid"), true);
    add_common(app.add_subcommand("replay",
                                  "re-run predictions on a recorded episode"),
               true);

    try {
        app.parse(argc, argv);
        for (auto* sub : app.get_subcommands()) {
            if (sub->count("--seed")) args.seed_set = true;
        }
        if (command == "gen-data") return run_gen_data(args);
        if (command == "train") return run_train(args);
        if (command == "eval") return run_eval(args);
        if (command == "sweep") return run_sweep_cmd(args);
        if (command == "replay") return run_replay(args);
        throw ConfigError("unknown command");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n"
                  << "usage: intentsim <gen-data|train|eval|sweep|replay> "
                     "--config <file> [--out <dir>] [--seed <n>] "
                     "[--deterministic] [--dump-messages]\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
