#include "aicp/informativeness.hpp"

#include <algorithm>
#include <cmath>

namespace aicp {

double ScoredMessage::base_informativeness() const {
    double best = 0.0;
    for (const ScoredObject& o : objects) {
        best = std::max(best, o.fitness);
    }
    return best;
}

double decay_informativeness(double base, int ttl_remaining,
                             const DecayParams& p) {
    if (ttl_remaining <= 0) {
        return 0.0;
    }
    base = std::clamp(base, 0.0, 1.0);
    const double hop_ratio =
        static_cast<double>(ttl_remaining) / static_cast<double>(p.ttl_initial);
    const double factor = base * hop_ratio * (1.0 - p.rate);
    const double elapsed = p.now - p.created;
    return std::clamp(std::pow(factor, elapsed), 0.0, 1.0);
}

double message_informativeness(const ScoredMessage& m, const DecayParams& p) {
    DecayParams q = p;
    q.created = m.created;
    return decay_informativeness(m.base_informativeness(), m.ttl_remaining, q);
}

double vehicle_informativeness(std::span<const ScoredMessage> messages,
                               std::span<const std::uint64_t> selection,
                               const DecayParams& p) {
    double total = 0.0;
    for (std::uint64_t id : selection) {
        auto it = std::find_if(
            messages.begin(), messages.end(),
            [id](const ScoredMessage& m) { return m.message_id == id; });
        if (it == messages.end()) {
            throw UnknownMessageId(id);
        }
        total += message_informativeness(*it, p);
    }
    return total;
}

std::vector<ScoredObject> select_top_l(std::span<const ScoredObject> objects,
                                       std::size_t limit) {
    std::vector<ScoredObject> out(objects.begin(), objects.end());
    auto better = [](const ScoredObject& a, const ScoredObject& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        if (a.features.d != b.features.d) return a.features.d < b.features.d;
        return a.object.id < b.object.id;
    };
    if (limit < out.size()) {
        std::partial_sort(out.begin(), out.begin() + limit, out.end(), better);
        out.resize(limit);
    } else {
        std::sort(out.begin(), out.end(), better);
    }
    return out;
}

}  // namespace aicp
