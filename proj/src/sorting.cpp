#include "aicp/sorting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aicp {

namespace {

std::uint16_t key_from_unit(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(x * 65535.0));
}

}  // namespace

QuantizedTuple QuantizedTuple::from_normalized(const FeatureTuple& n) {
    QuantizedTuple q;
    q.keys[0] = key_from_unit(n.d);
    q.keys[1] = key_from_unit(n.v);
    q.keys[2] = key_from_unit(n.r);
    q.keys[3] = key_from_unit(n.c);
    return q;
}

QuantizedTuple QuantizedTuple::quantize(const FeatureTuple& raw,
                                        const Normalization& norm) {
    return from_normalized(normalize_features(raw, norm));
}

std::vector<std::size_t> radix_sort_indices(
    std::span<const QuantizedTuple> tuples) {
    const std::size_t n = tuples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (n < 2) return order;

    constexpr std::size_t kBuckets = 65536;
    std::vector<std::size_t> counts(kBuckets);
    std::vector<std::size_t> scratch(n);

    // One stable counting pass per attribute, least significant first.
    // Buckets are walked from the highest key down, which yields the
    // descending (most informative first) order.
    for (int attr = 3; attr >= 0; --attr) {
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t idx : order) {
            ++counts[tuples[idx].keys[attr]];
        }
        std::size_t offset = 0;
        for (std::size_t b = kBuckets; b-- > 0;) {
            const std::size_t c = counts[b];
            counts[b] = offset;
            offset += c;
        }
        for (std::size_t idx : order) {
            scratch[counts[tuples[idx].keys[attr]]++] = idx;
        }
        order.swap(scratch);
    }
    return order;
}

std::vector<QuantizedTuple> radix_sort(std::span<const QuantizedTuple> tuples) {
    std::vector<std::size_t> order = radix_sort_indices(tuples);
    std::vector<QuantizedTuple> out;
    out.reserve(tuples.size());
    for (std::size_t idx : order) {
        out.push_back(tuples[idx]);
    }
    return out;
}

std::vector<ScoredTuple> weighted_fitness_sort(
    std::span<const FeatureTuple> tuples, const FitnessMatrix& fm) {
    std::vector<ScoredTuple> out;
    out.reserve(tuples.size());
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const FeatureTuple& t = tuples[i];
        if (!std::isfinite(t.d) || !std::isfinite(t.v) ||
            !std::isfinite(t.r) || !std::isfinite(t.c)) {
            throw NonFiniteFeature("non-finite attribute in tuple " +
                                   std::to_string(i));
        }
        out.push_back(ScoredTuple{t, fitness_score(t, fm), i});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredTuple& a, const ScoredTuple& b) {
                         return a.score > b.score;
                     });
    return out;
}

double fitness_distance(const FeatureTuple& p1, const FeatureTuple& p2,
                        const FitnessMatrix& fm) {
    const Vec4 a = to_vec4(p1);
    const Vec4 b = to_vec4(p2);
    Vec4 diff;
    for (int i = 0; i < 4; ++i) diff[i] = a[i] - b[i];
    return quadratic_form(fm.m, diff);
}

}  // namespace aicp
