#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aicp/informativeness.hpp"
#include "aicp/mat4.hpp"

namespace aicp {

class DegenerateRange : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class SingleClassDataset : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class NonFiniteGradient : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class MatrixFileError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Object categories carried in the wire label byte. Numeric value doubles as
/// the risk rank: vulnerable road users outrank vehicles and street furniture.
enum class CategoryCode : std::uint8_t {
    StaticObject = 0,
    Vehicle = 1,
    Cyclist = 2,
    Pedestrian = 3,
};

constexpr double category_risk(CategoryCode c) {
    return static_cast<double>(c);
}

constexpr bool is_valid_category(std::uint8_t label) { return label <= 3; }

const char* category_name(CategoryCode c);

struct AttributeRange {
    double min = 0.0;
    double max = 1.0;
};

/// Raw-attribute ranges used to map features onto [0,1], attribute order
/// d, v, r, c.
struct Normalization {
    std::array<AttributeRange, 4> ranges;
};

/// The learned Mahalanobis fitness metric: m = factor' * factor keeps the
/// matrix PSD by construction; score_scale maps raw quadratic-form values
/// onto [0,1] (it is the training-set maximum).
struct FitnessMatrix {
    Matrix4 factor = identity4();
    Matrix4 m = identity4();
    Normalization normalization;
    double score_scale = 1.0;
};

FitnessMatrix identity_metric(const Normalization& norm, double scale = 1.0);

struct LabeledTuple {
    FeatureTuple features;
    int label = 0;  // 0 = does not require attention, 1 = requires attention
};

using LabeledDataset = std::vector<LabeledTuple>;

struct LearnConfig {
    double step_size = 0.1;
    int iterations = 400;
    int pair_sample_size = 512;
    std::uint64_t seed = 1;
    double frobenius_budget = 25.0;
};

/// Attention heuristic: closer than safe braking distance at urban speed,
/// approaching faster than 13 m/s, or a pedestrian.
int label_heuristic(const FeatureTuple& f);

/// Affine map of each attribute onto [0,1], oriented so that larger always
/// means more informative (distance and heading angle invert), out-of-range
/// inputs clipped. Throws DegenerateRange when an attribute range is empty.
FeatureTuple normalize_features(const FeatureTuple& raw,
                                const Normalization& norm);

Vec4 to_vec4(const FeatureTuple& f);

/// Fits the fitness matrix by projected stochastic gradient ascent on the
/// pairwise separation objective (different-label distances up, same-label
/// distances down) over the Frobenius ball. Normalization ranges are derived
/// from the data; the returned matrix is the best validation checkpoint, so
/// reruns with one seed are reproducible and input order does not matter.
FitnessMatrix learn_matrix(const LabeledDataset& data, const LearnConfig& cfg);

/// Object-level informativeness: normalized quadratic form under the learned
/// metric, clamped to [0,1].
double fitness_score(const FeatureTuple& p, const FitnessMatrix& fm);

/// Exact pairwise separation objective over all unordered pairs, evaluated on
/// normalized features.
double pairwise_objective(std::span<const LabeledTuple> data,
                          const FitnessMatrix& fm);

/// Scenario-mixture generator standing in for a labeled drive dataset:
/// half hazard encounters (near, fast, on-path, vulnerable), half ambient
/// traffic, labels assigned by label_heuristic.
LabeledDataset make_synthetic_dataset(std::size_t n, std::uint64_t seed);

struct TrainResult {
    FitnessMatrix matrix;
    double objective = 0.0;          // exact objective on the training split
    double threshold = 0.0;          // midpoint of class mean scores
    double holdout_accuracy = 0.0;   // midpoint-threshold accuracy
    std::size_t train_count = 0;
    std::size_t holdout_count = 0;
};

/// Deterministic split, train on the large part, midpoint-threshold accuracy
/// on the holdout.
TrainResult train_with_holdout(const LabeledDataset& data,
                               const LearnConfig& cfg,
                               double holdout_fraction = 0.2);

// Plain-text persistence: version header, 4x4 matrix, attribute ranges,
// score scale.
void save_matrix(std::ostream& out, const FitnessMatrix& fm);
FitnessMatrix load_matrix(std::istream& in);
void save_matrix_file(const std::string& path, const FitnessMatrix& fm);
FitnessMatrix load_matrix_file(const std::string& path);

}  // namespace aicp
