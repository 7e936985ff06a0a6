#pragma once

// Two-layer graph convolution over the star graph, float64 throughout.
//
//   H1 = relu(A_hat * H0 * W1 + b1)
//   H2 =       A_hat * H1 * W2 + b2
//
// plus a linear classifier head applied to the human row (row 0) of H2 for
// the spatial-only prediction. Forward fills an optional cache; backward
// consumes it and accumulates gradients into a parameter-shaped struct.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/rng.hpp"

namespace intentsim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct TensorView {
    std::string name;
    double* data = nullptr;
    long size = 0;
    long rows = 0;
    long cols = 0;
};

namespace detail {

inline void push_view(std::vector<TensorView>& out, const std::string& name,
                      MatrixXd& m) {
    out.push_back({name, m.data(), static_cast<long>(m.size()),
                   static_cast<long>(m.rows()), static_cast<long>(m.cols())});
}

inline void push_view(std::vector<TensorView>& out, const std::string& name,
                      VectorXd& v) {
    out.push_back({name, v.data(), static_cast<long>(v.size()),
                   static_cast<long>(v.size()), 1});
}

inline MatrixXd init_matrix(long rows, long cols, Rng& rng, double scale) {
    MatrixXd m(rows, cols);
    double stddev = scale / std::sqrt(static_cast<double>(rows));
    for (long c = 0; c < cols; ++c)
        for (long r = 0; r < rows; ++r) m(r, c) = rng.normal(0.0, stddev);
    return m;
}

}  // namespace detail

struct GcnParams {
    MatrixXd W1;  // 2F x H1
    VectorXd b1;  // H1
    MatrixXd W2;  // H1 x E
    VectorXd b2;  // E
    MatrixXd Whead;  // E x classes
    VectorXd bhead;  // classes

    static GcnParams init(long in, long hidden, long embed, long classes,
                          Rng& rng, double scale) {
        GcnParams p;
        p.W1 = detail::init_matrix(in, hidden, rng, scale);
        p.b1 = VectorXd::Zero(hidden);
        p.W2 = detail::init_matrix(hidden, embed, rng, scale);
        p.b2 = VectorXd::Zero(embed);
        p.Whead = detail::init_matrix(embed, classes, rng, scale);
        p.bhead = VectorXd::Zero(classes);
        return p;
    }

    static GcnParams zeros_like(const GcnParams& o) {
        GcnParams p;
        p.W1 = MatrixXd::Zero(o.W1.rows(), o.W1.cols());
        p.b1 = VectorXd::Zero(o.b1.size());
        p.W2 = MatrixXd::Zero(o.W2.rows(), o.W2.cols());
        p.b2 = VectorXd::Zero(o.b2.size());
        p.Whead = MatrixXd::Zero(o.Whead.rows(), o.Whead.cols());
        p.bhead = VectorXd::Zero(o.bhead.size());
        return p;
    }

    void collect(const std::string& prefix, std::vector<TensorView>& out) {
        detail::push_view(out, prefix + "W1", W1);
        detail::push_view(out, prefix + "b1", b1);
        detail::push_view(out, prefix + "W2", W2);
        detail::push_view(out, prefix + "b2", b2);
        detail::push_view(out, prefix + "Whead", Whead);
        detail::push_view(out, prefix + "bhead", bhead);
    }
};

struct GcnCache {
    MatrixXd Ahat;
    MatrixXd H0;
    MatrixXd P;   // layer-1 pre-activation
    MatrixXd H1;  // relu(P)
};

inline MatrixXd gcn_forward(const MatrixXd& Ahat, const MatrixXd& H0,
                            const GcnParams& p, GcnCache* cache = nullptr) {
    if (Ahat.rows() != Ahat.cols() || Ahat.rows() != H0.rows())
        throw SimError("gcn_forward: adjacency/feature dimension mismatch");
    if (H0.cols() != p.W1.rows())
        throw SimError("gcn_forward: feature width does not match W1");
    MatrixXd P = (Ahat * H0 * p.W1).rowwise() + p.b1.transpose();
    MatrixXd H1 = P.cwiseMax(0.0);
    MatrixXd H2 = (Ahat * H1 * p.W2).rowwise() + p.b2.transpose();
    if (cache) {
        cache->Ahat = Ahat;
        cache->H0 = H0;
        cache->P = std::move(P);
        cache->H1 = std::move(H1);
    }
    return H2;
}

// The embedding other modules consume: the human node's row.
inline VectorXd human_embedding(const MatrixXd& H2) {
    if (H2.rows() < 1) throw SimError("human_embedding: empty matrix");
    return H2.row(0).transpose();
}

inline VectorXd spatial_logits(const VectorXd& embedding, const GcnParams& p) {
    return p.Whead.transpose() * embedding + p.bhead;
}

// d(loss)/d(embedding) from the spatial head; accumulates head gradients.
inline VectorXd spatial_head_backward(const GcnParams& p,
                                      const VectorXd& embedding,
                                      const VectorXd& dlogits, GcnParams& g) {
    g.Whead += embedding * dlogits.transpose();
    g.bhead += dlogits;
    return p.Whead * dlogits;
}

// Backward through both graph-conv layers given d(loss)/dH2. A_hat is
// symmetric, so its transpose never needs forming.
inline void gcn_backward(const GcnParams& p, const GcnCache& c,
                         const MatrixXd& dH2, GcnParams& g,
                         MatrixXd* dH0 = nullptr) {
    MatrixXd AH1 = c.Ahat * c.H1;
    g.W2 += AH1.transpose() * dH2;
    g.b2 += dH2.colwise().sum().transpose();
    MatrixXd dH1 = c.Ahat * (dH2 * p.W2.transpose());
    MatrixXd dP =
        (dH1.array() * (c.P.array() > 0.0).cast<double>()).matrix();
    MatrixXd AH0 = c.Ahat * c.H0;
    g.W1 += AH0.transpose() * dP;
    g.b1 += dP.colwise().sum().transpose();
    if (dH0) *dH0 = c.Ahat * (dP * p.W1.transpose());
}

}  // namespace intentsim
