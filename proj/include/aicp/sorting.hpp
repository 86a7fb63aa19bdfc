#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "aicp/informativeness.hpp"
#include "aicp/metric_learn.hpp"

namespace aicp {

class NonFiniteFeature : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Radix keys for the warm-up sort, attribute order D, V, R, C, each oriented
/// so a larger key means more informative.
struct QuantizedTuple {
    std::array<std::uint16_t, 4> keys{};

    static QuantizedTuple from_normalized(const FeatureTuple& normalized);
    static QuantizedTuple quantize(const FeatureTuple& raw,
                                   const Normalization& norm);

    bool operator==(const QuantizedTuple&) const = default;
};

/// Stable LSD radix order, least significant attribute (C) first, most
/// informative tuple first. The returned permutation preserves input order
/// within equal full keys.
std::vector<std::size_t> radix_sort_indices(
    std::span<const QuantizedTuple> tuples);

std::vector<QuantizedTuple> radix_sort(std::span<const QuantizedTuple> tuples);

struct ScoredTuple {
    FeatureTuple features;
    double score = 0.0;
    std::size_t source_index = 0;
};

/// Scores every tuple under the learned metric and orders them best first.
/// Stable for equal scores. Throws NonFiniteFeature on NaN/inf attributes.
std::vector<ScoredTuple> weighted_fitness_sort(
    std::span<const FeatureTuple> tuples, const FitnessMatrix& fm);

/// Quadratic form of the feature difference under the metric: the pairwise
/// fitness distance used by the learning objective.
double fitness_distance(const FeatureTuple& p1, const FeatureTuple& p2,
                        const FitnessMatrix& fm);

}  // namespace aicp
