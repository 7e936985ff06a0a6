#pragma once

// Single-round weighted voting. Each robot i contributes
//
//   V_i = alpha * v~_i + beta * c~_i
//
// where v~ and c~ are the normalized visibility ratios and calibrated
// confidences. Votes are summed per predicted class; the class with the
// largest total wins. Ties break to the class holding the highest single
// confidence, then to the lowest station id.

#include <array>
#include <cstdint>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/world.hpp"

namespace intentsim {

struct VoteInput {
    std::vector<int> actions;        // per robot: argmax StationId (1..4)
    std::vector<double> confidences; // per robot: c_i in (0, 1]
    std::vector<long> counts;        // per robot: N_detected,i
    double alpha = 0.5;
    double beta = 0.5;

    void validate() const {
        const std::size_t m = actions.size();
        if (m == 0) throw ConfigError("vote: need at least one robot");
        if (confidences.size() != m || counts.size() != m)
            throw ConfigError("vote: per-robot field lengths differ");
        if (alpha < 0 || beta < 0 || alpha + beta <= 0)
            throw ConfigError("vote: weights must be >= 0 with positive sum");
        for (int a : actions)
            if (a < 1 || a > kNumStations)
                throw ConfigError("vote: action out of station range");
        for (double c : confidences)
            if (!(c > 0.0) || c > 1.0)
                throw ConfigError("vote: confidence outside (0, 1]");
        for (long n : counts)
            if (n < 0) throw ConfigError("vote: negative detection count");
    }
};

struct ConsensusResult {
    int decided = 0;  // StationId
    std::vector<double> votes;             // V_i per robot
    std::array<double, kNumStations> class_totals{};  // index = station - 1
    bool tie_break_used = false;
};

// v_i = N_i / sum(N); all-zero counts are a degenerate case the caller
// must handle (the harness falls back to uniform ratios and logs it).
inline std::vector<double> visibility_ratios(const std::vector<long>& counts) {
    long total = 0;
    for (long c : counts) {
        if (c < 0) throw ConfigError("visibility_ratios: negative count");
        total += c;
    }
    if (total == 0) throw DegenerateVisibilityError();
    std::vector<double> v;
    v.reserve(counts.size());
    for (long c : counts) v.push_back(static_cast<double>(c) / total);
    return v;
}

inline std::vector<double> normalize(const std::vector<double>& values) {
    double sum = 0.0;
    for (double x : values) {
        if (x < 0) throw ConfigError("normalize: negative value");
        sum += x;
    }
    if (sum <= 0.0) throw SimError("normalize: zero-sum input");
    std::vector<double> out;
    out.reserve(values.size());
    for (double x : values) out.push_back(x / sum);
    return out;
}

inline std::vector<double> weighted_votes(const std::vector<double>& v_norm,
                                          const std::vector<double>& c_norm,
                                          double alpha, double beta) {
    if (v_norm.size() != c_norm.size())
        throw ConfigError("weighted_votes: length mismatch");
    std::vector<double> out;
    out.reserve(v_norm.size());
    for (std::size_t i = 0; i < v_norm.size(); ++i)
        out.push_back(alpha * v_norm[i] + beta * c_norm[i]);
    return out;
}

inline ConsensusResult decide(const VoteInput& in) {
    in.validate();
    std::vector<double> v = visibility_ratios(in.counts);
    std::vector<double> v_norm = normalize(v);
    std::vector<double> c_norm = normalize(in.confidences);

    ConsensusResult res;
    res.votes = weighted_votes(v_norm, c_norm, in.alpha, in.beta);
    for (std::size_t i = 0; i < in.actions.size(); ++i)
        res.class_totals[in.actions[i] - 1] += res.votes[i];

    double best_total = -1.0;
    for (double t : res.class_totals) best_total = std::max(best_total, t);
    std::vector<int> tied;
    for (int k = 0; k < kNumStations; ++k)
        if (res.class_totals[k] == best_total && best_total > 0.0)
            tied.push_back(k + 1);

    if (tied.size() == 1) {
        res.decided = tied.front();
    } else {
        res.tie_break_used = true;
        // highest single confidence among robots voting for a tied class,
        // then lowest station id
        double best_conf = -1.0;
        int winner = tied.front();
        for (int station : tied) {
            double top = -1.0;
            for (std::size_t i = 0; i < in.actions.size(); ++i)
                if (in.actions[i] == station)
                    top = std::max(top, in.confidences[i]);
            if (top > best_conf) {
                best_conf = top;
                winner = station;
            }
        }
        res.decided = winner;
    }
    return res;
}

}  // namespace intentsim
