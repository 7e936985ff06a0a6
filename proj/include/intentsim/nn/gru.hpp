#pragma once

// Gated recurrent unit with a shared linear classifier head, float64.
//
//   z  = sigmoid(Wz x + Uz h + bz)        update gate
//   r  = sigmoid(Wr x + Ur h + br)        reset gate
//   hc = tanh(Wh x + Uh (r .* h) + bh)    candidate
//   h' = (1 - z) .* h + z .* hc
//
// Backward is hand-derived; every analytic gradient is covered by the
// finite-difference checks in the test suite.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/nn/gcn.hpp"
#include "intentsim/rng.hpp"

namespace intentsim {

struct GruParams {
    MatrixXd Wz, Wr, Wh;  // hidden x input
    MatrixXd Uz, Ur, Uh;  // hidden x hidden
    VectorXd bz, br, bh;  // hidden
    MatrixXd Whead;       // hidden x classes (applied at every horizon)
    VectorXd bhead;       // classes

    long input_size() const { return Wz.cols(); }
    long hidden_size() const { return Wz.rows(); }

    static GruParams init(long input, long hidden, long classes, Rng& rng,
                          double scale) {
        GruParams p;
        p.Wz = detail::init_matrix(hidden, input, rng, scale);
        p.Wr = detail::init_matrix(hidden, input, rng, scale);
        p.Wh = detail::init_matrix(hidden, input, rng, scale);
        p.Uz = detail::init_matrix(hidden, hidden, rng, scale);
        p.Ur = detail::init_matrix(hidden, hidden, rng, scale);
        p.Uh = detail::init_matrix(hidden, hidden, rng, scale);
        p.bz = VectorXd::Zero(hidden);
        p.br = VectorXd::Zero(hidden);
        p.bh = VectorXd::Zero(hidden);
        p.Whead = detail::init_matrix(hidden, classes, rng, scale);
        p.bhead = VectorXd::Zero(classes);
        return p;
    }

    static GruParams zeros_like(const GruParams& o) {
        GruParams p;
        auto zm = [](const MatrixXd& m) {
            return MatrixXd::Zero(m.rows(), m.cols()).eval();
        };
        p.Wz = zm(o.Wz); p.Wr = zm(o.Wr); p.Wh = zm(o.Wh);
        p.Uz = zm(o.Uz); p.Ur = zm(o.Ur); p.Uh = zm(o.Uh);
        p.bz = VectorXd::Zero(o.bz.size());
        p.br = VectorXd::Zero(o.br.size());
        p.bh = VectorXd::Zero(o.bh.size());
        p.Whead = zm(o.Whead);
        p.bhead = VectorXd::Zero(o.bhead.size());
        return p;
    }

    void collect(const std::string& prefix, std::vector<TensorView>& out) {
        detail::push_view(out, prefix + "Wz", Wz);
        detail::push_view(out, prefix + "Wr", Wr);
        detail::push_view(out, prefix + "Wh", Wh);
        detail::push_view(out, prefix + "Uz", Uz);
        detail::push_view(out, prefix + "Ur", Ur);
        detail::push_view(out, prefix + "Uh", Uh);
        detail::push_view(out, prefix + "bz", bz);
        detail::push_view(out, prefix + "br", br);
        detail::push_view(out, prefix + "bh", bh);
        detail::push_view(out, prefix + "Whead", Whead);
        detail::push_view(out, prefix + "bhead", bhead);
    }
};

struct GruStepCache {
    VectorXd x, h_prev, z, r, hc;
};

namespace detail {

inline VectorXd sigmoid(const VectorXd& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

}  // namespace detail

inline VectorXd gru_step(const VectorXd& x, const VectorXd& h,
                         const GruParams& p, GruStepCache* cache = nullptr) {
    if (x.size() != p.input_size() || h.size() != p.hidden_size())
        throw SimError("gru_step: input/hidden dimension mismatch");
    VectorXd z = detail::sigmoid(p.Wz * x + p.Uz * h + p.bz);
    VectorXd r = detail::sigmoid(p.Wr * x + p.Ur * h + p.br);
    VectorXd hc = (p.Wh * x + p.Uh * (r.cwiseProduct(h)) + p.bh).array().tanh();
    VectorXd h_next =
        (1.0 - z.array()) * h.array() + z.array() * hc.array();
    if (cache) {
        cache->x = x;
        cache->h_prev = h;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->hc = std::move(hc);
    }
    return h_next;
}

inline VectorXd gru_logits(const VectorXd& h, const GruParams& p) {
    return p.Whead.transpose() * h + p.bhead;
}

// d(loss)/dh from the classifier head; accumulates head gradients.
inline VectorXd gru_head_backward(const GruParams& p, const VectorXd& h,
                                  const VectorXd& dlogits, GruParams& g) {
    g.Whead += h * dlogits.transpose();
    g.bhead += dlogits;
    return p.Whead * dlogits;
}

// Backward through one step. dh_next is d(loss)/dh'. Returns d(loss)/dh_prev;
// writes d(loss)/dx into *dx when requested.
inline VectorXd gru_step_backward(const GruParams& p, const GruStepCache& c,
                                  const VectorXd& dh_next, GruParams& g,
                                  VectorXd* dx = nullptr) {
    const auto& z = c.z;
    const auto& r = c.r;
    const auto& hc = c.hc;
    const auto& h = c.h_prev;

    VectorXd dz = dh_next.cwiseProduct(hc - h);
    VectorXd dhc = dh_next.cwiseProduct(z);
    VectorXd dh_prev =
        (dh_next.array() * (1.0 - z.array())).matrix();

    VectorXd da_h = (dhc.array() * (1.0 - hc.array().square())).matrix();
    g.Wh += da_h * c.x.transpose();
    g.Uh += da_h * (r.cwiseProduct(h)).transpose();
    g.bh += da_h;
    VectorXd drh = p.Uh.transpose() * da_h;
    VectorXd dr = drh.cwiseProduct(h);
    dh_prev += drh.cwiseProduct(r);

    VectorXd da_r = (dr.array() * r.array() * (1.0 - r.array())).matrix();
    g.Wr += da_r * c.x.transpose();
    g.Ur += da_r * h.transpose();
    g.br += da_r;
    dh_prev += p.Ur.transpose() * da_r;

    VectorXd da_z = (dz.array() * z.array() * (1.0 - z.array())).matrix();
    g.Wz += da_z * c.x.transpose();
    g.Uz += da_z * h.transpose();
    g.bz += da_z;
    dh_prev += p.Uz.transpose() * da_z;

    if (dx)
        *dx = p.Wz.transpose() * da_z + p.Wr.transpose() * da_r +
              p.Wh.transpose() * da_h;
    return dh_prev;
}

}  // namespace intentsim
