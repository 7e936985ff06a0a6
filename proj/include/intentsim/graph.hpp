#pragma once

// Human-centered star graph over one robot's detections, plus the
// self-loop-augmented symmetric normalization used by the GCN:
// A_hat = D'^{-1/2} (A + I) D'^{-1/2}.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/perception.hpp"

namespace intentsim {

struct GraphConfig {
    bool edge_affinity = false;  // transform distances d -> exp(-d / sigma_d)
    double affinity_sigma = 100.0;  // pixels
};

struct SceneGraph {
    // node 0 is the human; nodes 1..m are detected objects in detection order
    std::vector<int> node_ids;          // object_id per node (0 = human)
    Eigen::MatrixXd features;           // (m+1) x 2F
    std::vector<double> edge_weights;   // weight of edge (0, j+1), size m

    int size() const { return static_cast<int>(node_ids.size()); }
};

// Star graph from one robot's detections at one tick. The human detection
// must be present; object nodes keep their detection order.
inline SceneGraph build_star_graph(const std::vector<Detection>& dets,
                                   const Eigen::MatrixXd& features,
                                   const GraphConfig& cfg = {}) {
    int human_row = -1;
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (dets[i].object_id == kHumanId) { human_row = static_cast<int>(i); break; }
    if (human_row < 0)
        throw SimError("build_star_graph: no human detection in frame");
    if (features.rows() != static_cast<int>(dets.size()))
        throw SimError("build_star_graph: feature/detection count mismatch");

    SceneGraph g;
    g.features.resize(features.rows(), features.cols());
    g.node_ids.push_back(kHumanId);
    g.features.row(0) = features.row(human_row);
    const Detection& human = dets[human_row];
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (static_cast<int>(i) == human_row) continue;
        const Detection& d = dets[i];
        double dx = d.px - human.px;
        double dy = d.py - human.py;
        double w = std::sqrt(dx * dx + dy * dy);
        if (cfg.edge_affinity) w = std::exp(-w / cfg.affinity_sigma);
        g.features.row(g.size()) = features.row(static_cast<int>(i));
        g.node_ids.push_back(d.object_id);
        g.edge_weights.push_back(w);
    }
    return g;
}

// Symmetrically normalized adjacency with self-loops. Degree of node j is
// 1 (self-loop) plus the sum of its incident edge weights.
inline Eigen::MatrixXd normalize_adjacency(const SceneGraph& g) {
    const int n = g.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (int j = 1; j < n; ++j) {
        a(0, j) = g.edge_weights[j - 1];
        a(j, 0) = g.edge_weights[j - 1];
    }
    Eigen::VectorXd dinv(n);
    for (int i = 0; i < n; ++i)
        dinv(i) = 1.0 / std::sqrt(a.row(i).sum());
    return dinv.asDiagonal() * a * dinv.asDiagonal();
}

}  // namespace intentsim
