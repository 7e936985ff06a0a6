#pragma once

// The three predictors and their training losses.
//
//   spatial   — GCN + classifier head on the human embedding, single frame.
//   ego       — GCN per frame, GRU over [embedding | keypoints].
//   collective— GCN per frame, GRU over [embedding | neighbor mean | keypoints]
//               (or over [mean including ego | keypoints] in folded mode).
//
// Forecasts come from unrolling the GRU with zero inputs and applying the
// shared head to each hidden state. Losses are mean cross-entropy over the
// current frame and every forecast horizon, with exact gradients through
// the whole stack — including the neighbors' GCN passes, which share
// parameters with the ego pass.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/nn/gcn.hpp"
#include "intentsim/nn/gru.hpp"
#include "intentsim/perception.hpp"

namespace intentsim {

enum class ModelKind { Spatial, Ego, Collective };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Spatial: return "gnn";
        case ModelKind::Ego: return "ego";
        case ModelKind::Collective: return "collective";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    if (s == "gnn") return ModelKind::Spatial;
    if (s == "ego") return ModelKind::Ego;
    if (s == "collective") return ModelKind::Collective;
    throw ConfigError("unknown model kind: " + s);
}

// --- numerics --------------------------------------------------------------

inline double log_sum_exp(const VectorXd& z) {
    double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

inline VectorXd softmax_vec(const VectorXd& z) {
    VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

inline double cross_entropy(const VectorXd& logits, int label) {
    if (label < 0 || label >= logits.size())
        throw SimError("cross_entropy: label out of range");
    return log_sum_exp(logits) - logits(label);
}

inline int argmax(const VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

// Indices of k frames taken at uniform intervals from a window of length w
// (always including the newest frame). k <= 0 or k >= w selects all frames.
inline std::vector<int> subsample_indices(int w, int k) {
    std::vector<int> idx;
    if (k <= 0 || k >= w) {
        for (int i = 0; i < w; ++i) idx.push_back(i);
    } else if (k == 1) {
        idx.push_back(w - 1);
    } else {
        for (int j = 0; j < k; ++j)
            idx.push_back(static_cast<int>(
                std::lround(static_cast<double>(j) * (w - 1) / (k - 1))));
    }
    return idx;
}

// --- model container -------------------------------------------------------

struct ModelDims {
    int feature = 64;     // F; GCN input width is 2F
    int gcn_hidden = 256; // H1
    int embed = 128;      // E
    int gru_hidden = 128;
    int classes = 4;
    int horizon = 20;     // forecast steps n
};

struct ModelParams {
    ModelKind kind = ModelKind::Collective;
    ModelDims dims;
    bool fold_ego = false;  // collective: average ego into the neighbor mean
    GcnParams gcn;
    GruParams gru;  // unused for Spatial
    double temperature = 1.0;

    int input_size() const {
        switch (kind) {
            case ModelKind::Spatial: return 0;
            case ModelKind::Ego: return dims.embed + kKeypointDim;
            case ModelKind::Collective:
                return (fold_ego ? dims.embed : 2 * dims.embed) + kKeypointDim;
        }
        return 0;
    }

    void collect(std::vector<TensorView>& out) {
        gcn.collect("gcn.", out);
        if (kind != ModelKind::Spatial) gru.collect("gru.", out);
    }
};

inline ModelParams make_model(ModelKind kind, const ModelDims& dims,
                              bool fold_ego, std::uint64_t seed,
                              double init_scale) {
    ModelParams p;
    p.kind = kind;
    p.dims = dims;
    p.fold_ego = fold_ego;
    Rng rng(mix64(hash_combine(seed, hash_tag(model_kind_name(kind)))));
    p.gcn = GcnParams::init(2 * dims.feature, dims.gcn_hidden, dims.embed,
                            dims.classes, rng, init_scale);
    if (kind != ModelKind::Spatial)
        p.gru = GruParams::init(p.input_size(), dims.gru_hidden, dims.classes,
                                rng, init_scale);
    return p;
}

inline ModelParams zeros_like(const ModelParams& o) {
    ModelParams p;
    p.kind = o.kind;
    p.dims = o.dims;
    p.fold_ego = o.fold_ego;
    p.gcn = GcnParams::zeros_like(o.gcn);
    if (o.kind != ModelKind::Spatial) p.gru = GruParams::zeros_like(o.gru);
    p.temperature = 0.0;
    return p;
}

// --- samples ---------------------------------------------------------------

// One robot's view of one frame, ready for the GCN.
struct FrameInput {
    bool visible = false;   // human detected by this robot this frame
    MatrixXd Ahat;          // empty unless visible
    MatrixXd H0;
    VectorXd kp = VectorXd::Zero(kKeypointDim);
};

struct SpatialSample {
    FrameInput frame;
    int label = 0;  // class index 0..3
};

struct SeqSample {
    std::vector<FrameInput> frames;  // ego window, oldest first
    // per window frame: the delivered neighbor views (all human-visible)
    std::vector<std::vector<const FrameInput*>> neighbors;
    int label_t = 0;
    std::vector<int> labels_future;  // length = horizon
};

// --- inference -------------------------------------------------------------

// Spatial prediction: zero logits (uniform distribution) when blind.
inline VectorXd spatial_predict(const ModelParams& p, const FrameInput& f) {
    if (!f.visible) return VectorXd::Zero(p.dims.classes);
    MatrixXd H2 = gcn_forward(f.Ahat, f.H0, p.gcn);
    return spatial_logits(human_embedding(H2), p.gcn);
}

struct SeqOutput {
    VectorXd logits_t;
    std::vector<VectorXd> forecast_logits;  // horizons t+1..t+n
};

// GRU over a prepared input sequence, then n zero-input forecast steps.
inline SeqOutput window_forward(const GruParams& gru,
                                const std::vector<VectorXd>& xs, int horizon) {
    if (xs.empty()) throw SimError("window_forward: empty input sequence");
    VectorXd h = VectorXd::Zero(gru.hidden_size());
    for (const auto& x : xs) h = gru_step(x, h, gru);
    SeqOutput out;
    out.logits_t = gru_logits(h, gru);
    VectorXd zero = VectorXd::Zero(gru.input_size());
    for (int j = 0; j < horizon; ++j) {
        h = gru_step(zero, h, gru);
        out.forecast_logits.push_back(gru_logits(h, gru));
    }
    return out;
}

namespace detail {

inline VectorXd frame_embedding(const ModelParams& p, const FrameInput& f,
                                GcnCache* cache = nullptr) {
    if (!f.visible) return VectorXd::Zero(p.dims.embed);
    return human_embedding(gcn_forward(f.Ahat, f.H0, p.gcn, cache));
}

}  // namespace detail

// Build the GRU input sequence for a sample using the given parameters
// (training path; evaluation assembles inputs from transported messages).
inline std::vector<VectorXd> assemble_inputs(const ModelParams& p,
                                             const SeqSample& s,
                                             const std::vector<int>& idx) {
    std::vector<VectorXd> xs;
    xs.reserve(idx.size());
    const int E = p.dims.embed;
    for (int i : idx) {
        const FrameInput& f = s.frames[i];
        VectorXd x(p.input_size());
        VectorXd e_ego = detail::frame_embedding(p, f);
        if (p.kind == ModelKind::Ego) {
            x << e_ego, f.kp;
        } else if (!p.fold_ego) {
            VectorXd mean = VectorXd::Zero(E);
            const auto nbrs = s.neighbors.empty() ? std::vector<const FrameInput*>{}
                                                  : s.neighbors[i];
            for (const FrameInput* nf : nbrs)
                mean += detail::frame_embedding(p, *nf);
            if (!nbrs.empty()) mean /= static_cast<double>(nbrs.size());
            x << e_ego, mean, f.kp;
        } else {
            VectorXd mean = VectorXd::Zero(E);
            int count = 0;
            if (f.visible) { mean += e_ego; ++count; }
            const auto nbrs = s.neighbors.empty() ? std::vector<const FrameInput*>{}
                                                  : s.neighbors[i];
            for (const FrameInput* nf : nbrs) {
                mean += detail::frame_embedding(p, *nf);
                ++count;
            }
            if (count > 0) mean /= static_cast<double>(count);
            x << mean, f.kp;
        }
        xs.push_back(std::move(x));
    }
    return xs;
}

// --- training losses -------------------------------------------------------

// Cross-entropy gradient: softmax(z) - onehot(y).
inline VectorXd ce_logit_grad(const VectorXd& logits, int label) {
    VectorXd g = softmax_vec(logits);
    g(label) -= 1.0;
    return g;
}

inline double spatial_loss_grad(const ModelParams& p, const SpatialSample& s,
                                ModelParams& grads) {
    if (!s.frame.visible)
        throw SimError("spatial_loss_grad: blind frame in training sample");
    GcnCache cache;
    MatrixXd H2 = gcn_forward(s.frame.Ahat, s.frame.H0, p.gcn, &cache);
    VectorXd e = human_embedding(H2);
    VectorXd logits = spatial_logits(e, p.gcn);
    double loss = cross_entropy(logits, s.label);
    VectorXd dlogits = ce_logit_grad(logits, s.label);
    VectorXd de = spatial_head_backward(p.gcn, e, dlogits, grads.gcn);
    MatrixXd dH2 = MatrixXd::Zero(H2.rows(), H2.cols());
    dH2.row(0) = de.transpose();
    gcn_backward(p.gcn, cache, dH2, grads.gcn);
    return loss;
}

inline double spatial_loss(const ModelParams& p, const SpatialSample& s) {
    VectorXd logits = spatial_predict(p, s.frame);
    return cross_entropy(logits, s.label);
}

namespace detail {

struct StepRecord {
    GruStepCache gru;
    bool ego_visible = false;
    GcnCache ego_cache;
    VectorXd ego_embedding;
    std::vector<GcnCache> nbr_caches;
    int mean_count = 0;  // contributors to the (folded or neighbor) mean
};

}  // namespace detail

// Full loss and exact gradient for a sequence sample. Returns the mean
// cross-entropy over the current frame and all forecast horizons.
inline double seq_loss_grad(const ModelParams& p, const SeqSample& s,
                            ModelParams& grads) {
    if (p.kind == ModelKind::Spatial)
        throw SimError("seq_loss_grad: spatial model given a sequence sample");
    const int n = p.dims.horizon;
    if (static_cast<int>(s.labels_future.size()) != n)
        throw SimError("seq_loss_grad: wrong number of forecast labels");
    const int E = p.dims.embed;
    const int W = static_cast<int>(s.frames.size());

    // forward, caching everything
    std::vector<detail::StepRecord> steps(W);
    VectorXd h = VectorXd::Zero(p.gru.hidden_size());
    for (int i = 0; i < W; ++i) {
        detail::StepRecord& rec = steps[i];
        const FrameInput& f = s.frames[i];
        rec.ego_visible = f.visible;
        VectorXd e_ego = detail::frame_embedding(p, f, &rec.ego_cache);
        rec.ego_embedding = e_ego;
        const auto nbrs = s.neighbors.empty() ? std::vector<const FrameInput*>{}
                                              : s.neighbors[i];
        VectorXd x(p.input_size());
        if (p.kind == ModelKind::Ego) {
            x << e_ego, f.kp;
        } else if (!p.fold_ego) {
            VectorXd mean = VectorXd::Zero(E);
            rec.nbr_caches.resize(nbrs.size());
            for (std::size_t j = 0; j < nbrs.size(); ++j)
                mean += human_embedding(
                    gcn_forward(nbrs[j]->Ahat, nbrs[j]->H0, p.gcn,
                                &rec.nbr_caches[j]));
            rec.mean_count = static_cast<int>(nbrs.size());
            if (rec.mean_count > 0) mean /= rec.mean_count;
            x << e_ego, mean, f.kp;
        } else {
            VectorXd mean = VectorXd::Zero(E);
            int count = 0;
            if (f.visible) { mean += e_ego; ++count; }
            rec.nbr_caches.resize(nbrs.size());
            for (std::size_t j = 0; j < nbrs.size(); ++j) {
                mean += human_embedding(
                    gcn_forward(nbrs[j]->Ahat, nbrs[j]->H0, p.gcn,
                                &rec.nbr_caches[j]));
                ++count;
            }
            rec.mean_count = count;
            if (count > 0) mean /= count;
            x << mean, f.kp;
        }
        h = gru_step(x, h, p.gru, &rec.gru);
    }

    std::vector<GruStepCache> forecast_caches(n);
    std::vector<VectorXd> hidden_after;  // h after the window, then each unroll
    hidden_after.push_back(h);
    VectorXd zero = VectorXd::Zero(p.gru.input_size());
    for (int j = 0; j < n; ++j) {
        h = gru_step(zero, h, p.gru, &forecast_caches[j]);
        hidden_after.push_back(h);
    }

    const double w = 1.0 / (1.0 + n);
    double loss = 0.0;

    // head gradients at every prediction point; dh flows backward
    VectorXd logits_t = gru_logits(hidden_after[0], p.gru);
    loss += w * cross_entropy(logits_t, s.label_t);
    std::vector<VectorXd> dh_at(n + 1, VectorXd::Zero(p.gru.hidden_size()));
    dh_at[0] = gru_head_backward(
        p.gru, hidden_after[0],
        (w * ce_logit_grad(logits_t, s.label_t)).eval(), grads.gru);
    for (int j = 0; j < n; ++j) {
        VectorXd logits = gru_logits(hidden_after[j + 1], p.gru);
        loss += w * cross_entropy(logits, s.labels_future[j]);
        dh_at[j + 1] = gru_head_backward(
            p.gru, hidden_after[j + 1],
            (w * ce_logit_grad(logits, s.labels_future[j])).eval(), grads.gru);
    }

    // backward through the forecast unroll (zero inputs; dx unused)
    VectorXd dh = dh_at[n];
    for (int j = n - 1; j >= 0; --j) {
        dh = gru_step_backward(p.gru, forecast_caches[j], dh, grads.gru);
        dh += dh_at[j];
    }

    // backward through the window
    for (int i = W - 1; i >= 0; --i) {
        detail::StepRecord& rec = steps[i];
        VectorXd dx;
        dh = gru_step_backward(p.gru, rec.gru, dh, grads.gru, &dx);
        VectorXd de_ego = VectorXd::Zero(E);
        VectorXd de_mean = VectorXd::Zero(E);
        if (p.kind == ModelKind::Ego) {
            de_ego = dx.head(E);
        } else if (!p.fold_ego) {
            de_ego = dx.head(E);
            de_mean = dx.segment(E, E);
        } else {
            de_mean = dx.head(E);
            if (rec.ego_visible && rec.mean_count > 0)
                de_ego = de_mean / rec.mean_count;
        }
        if (rec.ego_visible && de_ego.squaredNorm() > 0.0) {
            MatrixXd dH2 = MatrixXd::Zero(rec.ego_cache.Ahat.rows(), E);
            dH2.row(0) = de_ego.transpose();
            gcn_backward(p.gcn, rec.ego_cache, dH2, grads.gcn);
        }
        if (rec.mean_count > 0 && !rec.nbr_caches.empty()) {
            VectorXd de_each = de_mean / rec.mean_count;
            for (auto& cache : rec.nbr_caches) {
                MatrixXd dH2 = MatrixXd::Zero(cache.Ahat.rows(), E);
                dH2.row(0) = de_each.transpose();
                gcn_backward(p.gcn, cache, dH2, grads.gcn);
            }
        }
    }
    return loss;
}

// Loss only (validation); same math, no gradient bookkeeping.
inline double seq_loss(const ModelParams& p, const SeqSample& s) {
    const int n = p.dims.horizon;
    if (static_cast<int>(s.labels_future.size()) != n)
        throw SimError("seq_loss: wrong number of forecast labels");
    std::vector<int> idx = subsample_indices(static_cast<int>(s.frames.size()), 0);
    SeqOutput out = window_forward(p.gru, assemble_inputs(p, s, idx), n);
    const double w = 1.0 / (1.0 + n);
    double loss = w * cross_entropy(out.logits_t, s.label_t);
    for (int j = 0; j < n; ++j)
        loss += w * cross_entropy(out.forecast_logits[j], s.labels_future[j]);
    return loss;
}

}  // namespace intentsim
