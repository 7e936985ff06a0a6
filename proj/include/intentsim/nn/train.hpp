#pragma once

// Seeded minibatch training with plain gradient descent or momentum,
// global gradient-norm clipping, early stopping on validation loss, and
// best-validation parameter restore. Deterministic given (config, seed).

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/nn/model.hpp"
#include "intentsim/rng.hpp"

namespace intentsim {

struct TrainConfig {
    double learning_rate = 0.05;
    int batch_size = 16;
    int epochs = 30;
    double init_scale = 1.0;
    std::uint64_t seed = 1;
    std::string optimizer = "momentum";  // "sgd" or "momentum"
    int patience = 5;                    // epochs without val improvement
    double momentum = 0.9;
    double clip_norm = 5.0;

    void validate() const {
        if (learning_rate < 0) throw ConfigError("learning rate must be >= 0");
        if (batch_size <= 0 || epochs <= 0 || patience <= 0)
            throw ConfigError("batch size, epochs and patience must be positive");
        if (init_scale <= 0) throw ConfigError("init scale must be positive");
        if (optimizer != "sgd" && optimizer != "momentum")
            throw ConfigError("optimizer must be 'sgd' or 'momentum'");
        if (clip_norm <= 0) throw ConfigError("clip norm must be positive");
    }
};

struct TrainCurve {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;
    int best_epoch = -1;
    double best_val = std::numeric_limits<double>::infinity();
};

// The trainer sees samples only through these closures.
struct TrainProblem {
    int train_count = 0;
    int val_count = 0;
    // accumulate gradients for one training sample, return its loss
    std::function<double(const ModelParams&, int, ModelParams&)> loss_grad;
    // loss of one validation sample
    std::function<double(const ModelParams&, int)> val_loss;
};

namespace detail {

inline double grad_sq_norm(ModelParams& g) {
    std::vector<TensorView> views;
    g.collect(views);
    double sq = 0.0;
    for (const auto& v : views)
        for (long i = 0; i < v.size; ++i) sq += v.data[i] * v.data[i];
    return sq;
}

inline void scale_params(ModelParams& g, double factor) {
    std::vector<TensorView> views;
    g.collect(views);
    for (const auto& v : views)
        for (long i = 0; i < v.size; ++i) v.data[i] *= factor;
}

inline void axpy_params(ModelParams& dst, const ModelParams& src, double a) {
    std::vector<TensorView> dv, sv;
    dst.collect(dv);
    const_cast<ModelParams&>(src).collect(sv);
    for (std::size_t t = 0; t < dv.size(); ++t)
        for (long i = 0; i < dv[t].size; ++i)
            dv[t].data[i] += a * sv[t].data[i];
}

}  // namespace detail

inline TrainCurve train(ModelParams& params, const TrainProblem& problem,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (problem.train_count <= 0)
        throw ConfigError("train: empty training set");

    Rng shuffle_rng(mix64(hash_combine(cfg.seed, hash_tag("shuffle"))));
    ModelParams velocity = zeros_like(params);
    ModelParams best = params;
    TrainCurve curve;
    int since_best = 0;

    std::vector<int> order(problem.train_count);
    for (int i = 0; i < problem.train_count; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the epoch-derived stream
        Rng er = shuffle_rng.derive("epoch" + std::to_string(epoch));
        for (int i = problem.train_count - 1; i > 0; --i) {
            int j = static_cast<int>(er.uniform_int(i + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < problem.train_count;
             start += cfg.batch_size) {
            int end = std::min(start + cfg.batch_size, problem.train_count);
            ModelParams grads = zeros_like(params);
            double batch_loss = 0.0;
            for (int k = start; k < end; ++k)
                batch_loss += problem.loss_grad(params, order[k], grads);
            const double inv = 1.0 / (end - start);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw SimError("train: non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(batches));
            detail::scale_params(grads, inv);
            double norm = std::sqrt(detail::grad_sq_norm(grads));
            if (norm > cfg.clip_norm)
                detail::scale_params(grads, cfg.clip_norm / norm);
            if (cfg.optimizer == "momentum") {
                detail::scale_params(velocity, cfg.momentum);
                detail::axpy_params(velocity, grads, 1.0);
                detail::axpy_params(params, velocity, -cfg.learning_rate);
            } else {
                detail::axpy_params(params, grads, -cfg.learning_rate);
            }
            epoch_loss += batch_loss;
            ++batches;
        }
        curve.train_loss.push_back(epoch_loss / std::max(1, batches));

        double val = 0.0;
        if (problem.val_count > 0) {
            for (int k = 0; k < problem.val_count; ++k)
                val += problem.val_loss(params, k);
            val /= problem.val_count;
        } else {
            val = curve.train_loss.back();
        }
        if (!std::isfinite(val))
            throw SimError("train: non-finite validation loss at epoch " +
                           std::to_string(epoch));
        curve.val_loss.push_back(val);

        if (val < curve.best_val - 1e-12) {
            curve.best_val = val;
            curve.best_epoch = epoch;
            best = params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    params = best;
    return curve;
}

}  // namespace intentsim
