#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "aicp/vdu.hpp"

namespace aicp {

class UnknownMessageId : public std::runtime_error {
  public:
    explicit UnknownMessageId(std::uint64_t id)
        : std::runtime_error("unknown message id " + std::to_string(id)),
          id_(id) {}
    std::uint64_t id() const noexcept { return id_; }

  private:
    std::uint64_t id_;
};

/// The four attributes an object is judged by: distance to the receiver (m),
/// closing speed (m/s, positive = approaching), heading-relevance angle
/// (degrees, 0 = dead ahead), and category risk rank (higher = more
/// vulnerable).
struct FeatureTuple {
    double d = 0.0;
    double v = 0.0;
    double r = 0.0;
    double c = 0.0;

    bool operator==(const FeatureTuple&) const = default;
};

/// Parameters of the per-message freshness decay. `rate` is the per-second
/// multiplicative staleness factor, `ttl_initial` the hop budget the message
/// started with.
struct DecayParams {
    double rate = 0.1;      // in [0, 1)
    int ttl_initial = 2;    // > 0
    double now = 0.0;       // seconds
    double created = 0.0;   // seconds, <= now
};

struct ScoredObject {
    DetectedObject object;
    FeatureTuple features;
    double fitness = 0.0;  // normalized informativeness in [0, 1]
};

struct ScoredMessage {
    std::uint64_t message_id = 0;
    std::vector<ScoredObject> objects;
    int ttl_remaining = 0;
    double created = 0.0;

    /// Max fitness over contained objects, 0 if empty.
    double base_informativeness() const;
};

/// Freshness decay applied to a base score: (base * ttl/ttl_initial * (1-r))
/// raised to the elapsed seconds, clamped to [0, 1]. Zero when the hop budget
/// is spent.
double decay_informativeness(double base, int ttl_remaining,
                             const DecayParams& p);

double message_informativeness(const ScoredMessage& m, const DecayParams& p);

/// Sum of message scores over the selected ids. Throws UnknownMessageId when
/// a selected id has no matching message.
double vehicle_informativeness(std::span<const ScoredMessage> messages,
                               std::span<const std::uint64_t> selection,
                               const DecayParams& p);

/// The limit highest-fitness objects, best first. Ties broken by lower
/// distance, then lower object id, so output is deterministic under input
/// permutation.
std::vector<ScoredObject> select_top_l(std::span<const ScoredObject> objects,
                                       std::size_t limit);

}  // namespace aicp
