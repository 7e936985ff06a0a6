#pragma once

// In-process pub/sub transport between robots with per-link drop
// probability and fixed latency in ticks. Drop decisions are pure hashes
// of (seed, sender, receiver, tick, channel), so delivery is deterministic
// and independent of publish order. Publishing twice from the same sender
// in the same tick overwrites the earlier payload (latest wins), and a
// robot never receives its own message.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "intentsim/error.hpp"
#include "intentsim/rng.hpp"

namespace intentsim {

struct NetworkModel {
    double p_drop = 0.0;
    int latency_ticks = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (p_drop < 0.0 || p_drop > 1.0)
            throw ConfigError("p_drop must be within [0, 1]");
        if (latency_ticks < 0) throw ConfigError("latency must be >= 0");
    }
};

struct EmbeddingMsg {
    int sender = 0;
    long tick = 0;
    Eigen::VectorXd embedding;
};

struct PredictionMsg {
    int sender = 0;
    long tick = 0;
    int action = 0;          // StationId
    double confidence = 0.0; // calibrated, in (0, 1]
    long n_detected = 0;     // window visibility count
};

class Transport {
  public:
    Transport(int num_robots, NetworkModel net)
        : num_robots_(num_robots), net_(net) {
        net_.validate();
        if (num_robots < 1) throw ConfigError("transport needs >= 1 robot");
    }

    void publish(const EmbeddingMsg& msg) { enqueue(embeddings_, msg, 0); }
    void publish(const PredictionMsg& msg) { enqueue(predictions_, msg, 1); }

    // All messages due for this robot at this tick (then discarded).
    std::pair<std::vector<EmbeddingMsg>, std::vector<PredictionMsg>>
    collect(int robot, long tick) {
        return {drain(embeddings_, robot, tick), drain(predictions_, robot, tick)};
    }

    int num_robots() const { return num_robots_; }
    const NetworkModel& network() const { return net_; }

  private:
    // deliver_tick -> (receiver, sender) -> message
    template <class Msg>
    using Mailbox = std::map<long, std::map<std::pair<int, int>, Msg>>;

    template <class Msg>
    void enqueue(Mailbox<Msg>& box, const Msg& msg, std::uint64_t channel) {
        if (msg.sender < 0 || msg.sender >= num_robots_)
            throw SimError("publish: sender id out of range");
        long due = msg.tick + net_.latency_ticks;
        for (int r = 0; r < num_robots_; ++r) {
            if (r == msg.sender) continue;
            std::uint64_t key = draw_key(
                net_.seed, "drop", static_cast<std::uint64_t>(msg.sender),
                static_cast<std::uint64_t>(r),
                static_cast<std::uint64_t>(msg.tick), channel);
            if (keyed_uniform(key) < net_.p_drop) continue;
            box[due][{r, msg.sender}] = msg;
        }
    }

    template <class Msg>
    std::vector<Msg> drain(Mailbox<Msg>& box, int robot, long tick) {
        std::vector<Msg> out;
        auto it = box.find(tick);
        if (it == box.end()) return out;
        auto& slot = it->second;
        for (auto e = slot.lower_bound({robot, 0});
             e != slot.end() && e->first.first == robot;) {
            out.push_back(e->second);
            e = slot.erase(e);
        }
        if (slot.empty()) box.erase(it);
        return out;
    }

    int num_robots_;
    NetworkModel net_;
    Mailbox<EmbeddingMsg> embeddings_;
    Mailbox<PredictionMsg> predictions_;
};

// Mean of received embeddings; zero vector when none arrived.
inline Eigen::VectorXd aggregate_embeddings(const std::vector<EmbeddingMsg>& msgs,
                                            int embed_dim) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(embed_dim);
    if (msgs.empty()) return mean;
    for (const auto& m : msgs) {
        if (m.embedding.size() != embed_dim)
            throw SimError("aggregate_embeddings: embedding size mismatch");
        mean += m.embedding;
    }
    return mean / static_cast<double>(msgs.size());
}

}  // namespace intentsim
