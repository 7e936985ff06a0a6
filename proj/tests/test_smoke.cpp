// Pulls in every public header and exercises one end-to-end miniature run:
// generate a tiny dataset, train a small model, evaluate it, write metrics.

#include <catch2/catch_amalgamated.hpp>

#include "intentsim/baselines.hpp"
#include "intentsim/comms.hpp"
#include "intentsim/consensus.hpp"
#include "intentsim/dataset.hpp"
#include "intentsim/error.hpp"
#include "intentsim/geometry.hpp"
#include "intentsim/graph.hpp"
#include "intentsim/harness.hpp"
#include "intentsim/manifest.hpp"
#include "intentsim/nn/calibration.hpp"
#include "intentsim/nn/checkpoint.hpp"
#include "intentsim/nn/gcn.hpp"
#include "intentsim/nn/gru.hpp"
#include "intentsim/nn/model.hpp"
#include "intentsim/nn/train.hpp"
#include "intentsim/perception.hpp"
#include "intentsim/rng.hpp"
#include "intentsim/sweep.hpp"
#include "intentsim/version.hpp"
#include "intentsim/world.hpp"
#include "intentsim/world_io.hpp"

using namespace intentsim;

namespace {

PipelineConfig tiny_pipeline() {
    PipelineConfig p;
    p.sensor.feature_dim = 8;
    p.dims.feature = 8;
    p.dims.gcn_hidden = 16;
    p.dims.embed = 8;
    p.dims.gru_hidden = 16;
    p.dims.horizon = 5;
    p.window = 10;
    p.train_stride = 20;
    p.eval_stride = 20;
    return p;
}

}  // namespace

TEST_CASE("tiny end-to-end pipeline runs", "[smoke]") {
    PipelineConfig pcfg = tiny_pipeline();
    DatasetSpec dspec;
    dspec.scenario = 1;
    dspec.episodes = 6;
    dspec.ticks = 80;
    dspec.seed = 7;
    Dataset ds = build_dataset(dspec, pcfg);
    REQUIRE(ds.episodes.size() == 6);
    REQUIRE(ds.train_idx.size() == 3);
    REQUIRE(ds.val_idx.size() == 1);
    REQUIRE(ds.test_idx.size() == 2);

    TrainConfig tcfg;
    tcfg.epochs = 2;
    tcfg.batch_size = 4;
    tcfg.learning_rate = 0.05;
    TrainedModel tm = train_pipeline(ds, ModelKind::Collective, pcfg, tcfg);
    REQUIRE(tm.params.temperature > 0);

    EvalOptions opts;
    ModelEval ev = evaluate_sequence(tm.params, ds, ds.test_idx, pcfg, opts);
    REQUIRE(ev.frames > 0);
    REQUIRE(ev.acc_t >= 0.0);
    REQUIRE(ev.acc_t <= 1.0);
    REQUIRE(ev.consensus_acc >= 0.0);
}
