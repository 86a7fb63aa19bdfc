#include "aicp/metric_learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "aicp/sorting.hpp"

namespace aicp {

namespace {

constexpr double kSafeBrakingDistanceM = 23.0;
constexpr double kAttentionSpeedMps = 13.0;

// Validation checkpoints use the exact all-pairs objective while it stays
// affordable, a fixed seeded pair sample beyond that.
constexpr std::size_t kExactPairCap = 5'000'000;
constexpr std::size_t kValidationSampleSize = 200'000;

double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t rand_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

struct PreparedData {
    std::vector<Vec4> features;  // normalized
    std::vector<int> labels;
};

Normalization ranges_from_data(const LabeledDataset& data) {
    Normalization norm;
    for (auto& r : norm.ranges) {
        r.min = std::numeric_limits<double>::infinity();
        r.max = -std::numeric_limits<double>::infinity();
    }
    for (const LabeledTuple& t : data) {
        const Vec4 x = to_vec4(t.features);
        for (int a = 0; a < 4; ++a) {
            norm.ranges[a].min = std::min(norm.ranges[a].min, x[a]);
            norm.ranges[a].max = std::max(norm.ranges[a].max, x[a]);
        }
    }
    // A constant attribute carries no signal; widen its range so the affine
    // map stays defined and the attribute lands on a constant in [0,1].
    for (auto& r : norm.ranges) {
        if (!(r.max > r.min)) {
            r.max = r.min + 1.0;
        }
    }
    return norm;
}

double objective_on_pairs(const PreparedData& d, const Matrix4& m,
                          const std::vector<std::pair<std::uint32_t,
                                                      std::uint32_t>>& pairs) {
    double total = 0.0;
    for (const auto& [i, j] : pairs) {
        Vec4 delta;
        for (int a = 0; a < 4; ++a) {
            delta[a] = d.features[i][a] - d.features[j][a];
        }
        const double dist = quadratic_form(m, delta);
        total += (d.labels[i] != d.labels[j]) ? dist : -dist;
    }
    return total;
}

double exact_objective(const PreparedData& d, const Matrix4& m) {
    const std::size_t n = d.features.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Vec4 delta;
            for (int a = 0; a < 4; ++a) {
                delta[a] = d.features[i][a] - d.features[j][a];
            }
            const double dist = quadratic_form(m, delta);
            total += (d.labels[i] != d.labels[j]) ? dist : -dist;
        }
    }
    return total;
}

void project_to_budget(Matrix4& factor, double budget) {
    const double norm = frobenius_norm(gram(factor));
    if (norm > budget) {
        const double scale = std::sqrt(budget / norm);
        for (auto& row : factor) {
            for (double& x : row) x *= scale;
        }
    }
}

bool all_finite(const Matrix4& m) {
    for (const auto& row : m) {
        for (double x : row) {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

}  // namespace

const char* category_name(CategoryCode c) {
    switch (c) {
        case CategoryCode::StaticObject: return "static";
        case CategoryCode::Vehicle: return "vehicle";
        case CategoryCode::Cyclist: return "cyclist";
        case CategoryCode::Pedestrian: return "pedestrian";
    }
    return "unknown";
}

FitnessMatrix identity_metric(const Normalization& norm, double scale) {
    FitnessMatrix fm;
    fm.factor = identity4();
    fm.m = identity4();
    fm.normalization = norm;
    fm.score_scale = scale;
    return fm;
}

int label_heuristic(const FeatureTuple& f) {
    const bool pedestrian =
        f.c >= category_risk(CategoryCode::Pedestrian) - 0.5;
    return (f.d < kSafeBrakingDistanceM || f.v > kAttentionSpeedMps ||
            pedestrian)
               ? 1
               : 0;
}

FeatureTuple normalize_features(const FeatureTuple& raw,
                                const Normalization& norm) {
    const Vec4 x = to_vec4(raw);
    Vec4 out;
    for (int a = 0; a < 4; ++a) {
        const AttributeRange& r = norm.ranges[a];
        if (!(r.max > r.min)) {
            throw DegenerateRange("attribute " + std::to_string(a) +
                                  " range is degenerate");
        }
        double t = (x[a] - r.min) / (r.max - r.min);
        t = std::clamp(t, 0.0, 1.0);
        // Distance and heading angle shrink as relevance grows.
        out[a] = (a == 0 || a == 2) ? 1.0 - t : t;
    }
    return FeatureTuple{out[0], out[1], out[2], out[3]};
}

Vec4 to_vec4(const FeatureTuple& f) { return Vec4{f.d, f.v, f.r, f.c}; }

FitnessMatrix learn_matrix(const LabeledDataset& data,
                           const LearnConfig& cfg) {
    if (cfg.step_size <= 0.0 || cfg.iterations <= 0 ||
        cfg.pair_sample_size <= 0 || cfg.frobenius_budget <= 0.0) {
        throw std::invalid_argument("learn config values must be positive");
    }
    bool has0 = false;
    bool has1 = false;
    for (const LabeledTuple& t : data) {
        (t.label == 0 ? has0 : has1) = true;
    }
    if (!has0 || !has1) {
        throw SingleClassDataset(
            std::string("dataset contains no tuples labeled ") +
            (has0 ? "1 (requires attention)" : "0 (does not require attention)"));
    }

    // Canonical order makes pair sampling independent of input permutation.
    LabeledDataset sorted = data;
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledTuple& a, const LabeledTuple& b) {
                  return std::tie(a.features.d, a.features.v, a.features.r,
                                  a.features.c, a.label) <
                         std::tie(b.features.d, b.features.v, b.features.r,
                                  b.features.c, b.label);
              });

    const Normalization norm = ranges_from_data(sorted);
    PreparedData prep;
    prep.features.reserve(sorted.size());
    prep.labels.reserve(sorted.size());
    for (const LabeledTuple& t : sorted) {
        prep.features.push_back(to_vec4(normalize_features(t.features, norm)));
        prep.labels.push_back(t.label);
    }

    const std::size_t n = prep.features.size();
    std::mt19937_64 rng(cfg.seed);

    const bool exact = n * (n - 1) / 2 <= kExactPairCap;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> validation_pairs;
    if (!exact) {
        validation_pairs.reserve(kValidationSampleSize);
        for (std::size_t k = 0; k < kValidationSampleSize; ++k) {
            auto i = static_cast<std::uint32_t>(rand_index(rng, n));
            auto j = static_cast<std::uint32_t>(rand_index(rng, n - 1));
            if (j >= i) ++j;
            validation_pairs.emplace_back(i, j);
        }
    }
    auto validate = [&](const Matrix4& m) {
        return exact ? exact_objective(prep, m)
                     : objective_on_pairs(prep, m, validation_pairs);
    };

    Matrix4 factor = identity4();
    project_to_budget(factor, cfg.frobenius_budget);

    Matrix4 best_factor = factor;
    double best_objective = validate(gram(factor));

    const int checkpoint_every = std::max(1, cfg.iterations / 20);
    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        Matrix4 grad{};
        for (int s = 0; s < cfg.pair_sample_size; ++s) {
            const std::size_t i = rand_index(rng, n);
            std::size_t j = rand_index(rng, n - 1);
            if (j >= i) ++j;
            Vec4 delta;
            for (int a = 0; a < 4; ++a) {
                delta[a] = prep.features[i][a] - prep.features[j][a];
            }
            const double sign = (prep.labels[i] != prep.labels[j]) ? 1.0 : -1.0;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    grad[a][b] += sign * delta[a] * delta[b];
                }
            }
        }
        for (auto& row : grad) {
            for (double& x : row) x /= cfg.pair_sample_size;
        }

        // d/dL of <gram(L), C> is 2 L C for symmetric C.
        const Matrix4 step = matmul(factor, grad);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                factor[a][b] += 2.0 * cfg.step_size * step[a][b];
            }
        }
        if (!all_finite(factor)) {
            throw NonFiniteGradient("factor diverged at iteration " +
                                    std::to_string(iter));
        }
        project_to_budget(factor, cfg.frobenius_budget);

        if (iter % checkpoint_every == 0 || iter == cfg.iterations) {
            const double score = validate(gram(factor));
            if (score > best_objective) {
                best_objective = score;
                best_factor = factor;
            }
        }
    }

    FitnessMatrix fm;
    fm.factor = best_factor;
    Matrix4 g = gram(best_factor);
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            const double avg = 0.5 * (g[a][b] + g[b][a]);
            g[a][b] = avg;
            g[b][a] = avg;
        }
    }
    fm.m = g;
    fm.normalization = norm;

    double max_fitness = 0.0;
    for (const Vec4& x : prep.features) {
        max_fitness = std::max(max_fitness, quadratic_form(fm.m, x));
    }
    fm.score_scale = max_fitness > 0.0 ? max_fitness : 1.0;
    return fm;
}

double fitness_score(const FeatureTuple& p, const FitnessMatrix& fm) {
    const Vec4 x = to_vec4(normalize_features(p, fm.normalization));
    const double raw = quadratic_form(fm.m, x);
    return std::clamp(raw / fm.score_scale, 0.0, 1.0);
}

double pairwise_objective(std::span<const LabeledTuple> data,
                          const FitnessMatrix& fm) {
    std::vector<FeatureTuple> normalized;
    normalized.reserve(data.size());
    for (const LabeledTuple& t : data) {
        normalized.push_back(normalize_features(t.features, fm.normalization));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double dist =
                fitness_distance(normalized[i], normalized[j], fm);
            total += (data[i].label != data[j].label) ? dist : -dist;
        }
    }
    return total;
}

LabeledDataset make_synthetic_dataset(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * rand_unit(rng);
    };

    LabeledDataset data;
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureTuple f;
        const bool hazard = rand_unit(rng) < 0.5;
        const double u = rand_unit(rng);
        if (hazard) {
            f.d = uniform(2.0, 25.0);
            f.v = uniform(8.0, 25.0);
            f.r = uniform(0.0, 60.0);
            f.c = u < 0.4   ? category_risk(CategoryCode::Pedestrian)
                  : u < 0.7 ? category_risk(CategoryCode::Cyclist)
                  : u < 0.9 ? category_risk(CategoryCode::Vehicle)
                            : category_risk(CategoryCode::StaticObject);
        } else {
            f.d = uniform(40.0, 150.0);
            f.v = uniform(-20.0, 8.0);
            f.r = uniform(20.0, 180.0);
            f.c = u < 0.5    ? category_risk(CategoryCode::Vehicle)
                  : u < 0.8  ? category_risk(CategoryCode::StaticObject)
                  : u < 0.95 ? category_risk(CategoryCode::Cyclist)
                             : category_risk(CategoryCode::Pedestrian);
        }
        data.push_back(LabeledTuple{f, label_heuristic(f)});
    }
    return data;
}

TrainResult train_with_holdout(const LabeledDataset& data,
                               const LearnConfig& cfg,
                               double holdout_fraction) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rand_index(rng, i)]);
    }

    const auto holdout_count = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(data.size())));
    LabeledDataset train;
    LabeledDataset holdout;
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < holdout_count ? holdout : train).push_back(data[order[k]]);
    }

    TrainResult result;
    result.matrix = learn_matrix(train, cfg);
    result.objective = pairwise_objective(train, result.matrix);
    result.train_count = train.size();
    result.holdout_count = holdout.size();

    double sum0 = 0.0, sum1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (const LabeledTuple& t : train) {
        const double s = fitness_score(t.features, result.matrix);
        if (t.label == 0) {
            sum0 += s;
            ++n0;
        } else {
            sum1 += s;
            ++n1;
        }
    }
    const double mean0 = n0 ? sum0 / static_cast<double>(n0) : 0.0;
    const double mean1 = n1 ? sum1 / static_cast<double>(n1) : 0.0;
    result.threshold = 0.5 * (mean0 + mean1);
    const bool attention_scores_high = mean1 >= mean0;

    std::size_t correct = 0;
    for (const LabeledTuple& t : holdout) {
        const double s = fitness_score(t.features, result.matrix);
        const int predicted =
            ((s >= result.threshold) == attention_scores_high) ? 1 : 0;
        if (predicted == t.label) ++correct;
    }
    result.holdout_accuracy =
        holdout.empty() ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(holdout.size());
    return result;
}

void save_matrix(std::ostream& out, const FitnessMatrix& fm) {
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        out << buf;
    };
    out << "aicp-fitness-matrix v1\n";
    out << "matrix\n";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (j) out << ' ';
            put(fm.m[i][j]);
        }
        out << '\n';
    }
    out << "normalization\n";
    for (const AttributeRange& r : fm.normalization.ranges) {
        put(r.min);
        out << ' ';
        put(r.max);
        out << '\n';
    }
    out << "score_scale\n";
    put(fm.score_scale);
    out << '\n';
}

namespace {

std::string next_line(std::istream& in, int& line_no) {
    std::string line;
    if (!std::getline(in, line)) {
        throw MatrixFileError("unexpected end of file at line " +
                              std::to_string(line_no + 1));
    }
    ++line_no;
    return line;
}

void expect_line(std::istream& in, int& line_no, const std::string& expected) {
    const std::string got = next_line(in, line_no);
    if (got != expected) {
        throw MatrixFileError("line " + std::to_string(line_no) +
                              ": expected '" + expected + "', got '" + got +
                              "'");
    }
}

std::vector<double> parse_doubles(const std::string& line, int line_no,
                                  std::size_t count) {
    std::istringstream ss(line);
    std::vector<double> values;
    double x;
    while (ss >> x) values.push_back(x);
    if (values.size() != count) {
        throw MatrixFileError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(count) + " numbers");
    }
    return values;
}

}  // namespace

FitnessMatrix load_matrix(std::istream& in) {
    int line_no = 0;
    expect_line(in, line_no, "aicp-fitness-matrix v1");
    expect_line(in, line_no, "matrix");

    FitnessMatrix fm;
    for (int i = 0; i < 4; ++i) {
        const auto row = parse_doubles(next_line(in, line_no), line_no, 4);
        for (int j = 0; j < 4; ++j) fm.m[i][j] = row[j];
    }
    expect_line(in, line_no, "normalization");
    for (AttributeRange& r : fm.normalization.ranges) {
        const auto vals = parse_doubles(next_line(in, line_no), line_no, 2);
        r.min = vals[0];
        r.max = vals[1];
        if (!(r.max > r.min)) {
            throw MatrixFileError("line " + std::to_string(line_no) +
                                  ": degenerate attribute range");
        }
    }
    expect_line(in, line_no, "score_scale");
    fm.score_scale = parse_doubles(next_line(in, line_no), line_no, 1)[0];
    if (!(fm.score_scale > 0.0)) {
        throw MatrixFileError("score_scale must be positive");
    }

    if (max_abs_asymmetry(fm.m) > 1e-9) {
        throw MatrixFileError("matrix is not symmetric");
    }
    const EigenDecomposition ed = eigen_symmetric(fm.m);
    if (ed.values[0] < -1e-9) {
        throw MatrixFileError("matrix is not positive semidefinite");
    }
    fm.factor = psd_factor(fm.m);
    return fm;
}

void save_matrix_file(const std::string& path, const FitnessMatrix& fm) {
    std::ofstream out(path);
    if (!out) {
        throw MatrixFileError("cannot open " + path + " for writing");
    }
    save_matrix(out, fm);
    if (!out.good()) {
        throw MatrixFileError("write to " + path + " failed");
    }
}

FitnessMatrix load_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw MatrixFileError("cannot open " + path);
    }
    return load_matrix(in);
}

}  // namespace aicp
