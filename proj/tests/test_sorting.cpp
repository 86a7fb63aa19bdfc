#include "aicp/sorting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

using namespace aicp;

namespace {

Normalization unit_ranges() {
    Normalization n;
    for (auto& r : n.ranges) r = {0.0, 1.0};
    return n;
}

Normalization road_ranges() {
    Normalization n;
    n.ranges[0] = {0.0, 150.0};   // d
    n.ranges[1] = {-30.0, 30.0};  // v
    n.ranges[2] = {0.0, 180.0};   // r
    n.ranges[3] = {0.0, 3.0};     // c
    return n;
}

QuantizedTuple random_quantized(std::mt19937_64& rng, int distinct = 65536) {
    QuantizedTuple q;
    for (auto& k : q.keys) {
        k = static_cast<std::uint16_t>(rng() % distinct);
    }
    return q;
}

bool lex_more_informative(const QuantizedTuple& a, const QuantizedTuple& b) {
    return a.keys > b.keys;  // descending lexicographic in (D, V, R, C)
}

Matrix4 random_psd(std::mt19937_64& rng) {
    Matrix4 f;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& row : f) {
        for (double& x : row) x = u(rng);
    }
    return gram(f);
}

// Quadratic form by explicit triple loop, no shared code with the
// implementation.
double naive_quadratic(const Matrix4& m, const std::array<double, 4>& x) {
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            total += x[i] * m[i][j] * x[j];
        }
    }
    return total;
}

}  // namespace

TEST_SUITE("sorting") {

TEST_CASE("quantization keys are oriented toward informativeness") {
    const Normalization norm = road_ranges();
    const FeatureTuple base{75.0, 0.0, 90.0, 1.0};
    const QuantizedTuple q0 = QuantizedTuple::quantize(base, norm);

    FeatureTuple closer = base;
    closer.d = 10.0;
    CHECK(QuantizedTuple::quantize(closer, norm).keys[0] > q0.keys[0]);

    FeatureTuple faster = base;
    faster.v = 20.0;
    CHECK(QuantizedTuple::quantize(faster, norm).keys[1] > q0.keys[1]);

    FeatureTuple ahead = base;
    ahead.r = 5.0;
    CHECK(QuantizedTuple::quantize(ahead, norm).keys[2] > q0.keys[2]);

    FeatureTuple vulnerable = base;
    vulnerable.c = 3.0;
    CHECK(QuantizedTuple::quantize(vulnerable, norm).keys[3] > q0.keys[3]);
}

TEST_CASE("radix sort of an empty list is empty") {
    CHECK(radix_sort({}).empty());
    CHECK(radix_sort_indices({}).empty());
}

TEST_CASE("tuples differing only in C order by the C key") {
    QuantizedTuple low{{100, 200, 300, 10}};
    QuantizedTuple high{{100, 200, 300, 90}};
    auto sorted = radix_sort(std::vector<QuantizedTuple>{low, high});
    CHECK(sorted[0] == high);
    CHECK(sorted[1] == low);
}

TEST_CASE("radix order equals the comparison-sort oracle") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<QuantizedTuple> tuples;
        // Few distinct key values force plenty of ties across attributes.
        const int distinct = trial == 0 ? 4 : 65536;
        for (int i = 0; i < 1000; ++i) {
            tuples.push_back(random_quantized(rng, distinct));
        }
        auto sorted = radix_sort(tuples);

        auto oracle = tuples;
        std::stable_sort(oracle.begin(), oracle.end(), lex_more_informative);
        CHECK(sorted == oracle);
    }
}

TEST_CASE("radix sort is a stable permutation") {
    std::mt19937_64 rng(99);
    std::vector<QuantizedTuple> tuples;
    for (int i = 0; i < 500; ++i) {
        tuples.push_back(random_quantized(rng, 3));
    }
    auto order = radix_sort_indices(tuples);

    std::vector<std::size_t> seen(order.begin(), order.end());
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        CHECK(seen[i] == i);  // permutation
    }
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (tuples[order[i - 1]] == tuples[order[i]]) {
            CHECK(order[i - 1] < order[i]);  // stability on equal full keys
        }
    }
}

TEST_CASE("weighted sort: diagonal metric on normalized axis vectors") {
    FitnessMatrix fm = identity_metric(unit_ranges(), 1.0);
    // Raw tuples chosen so normalization yields (1,0,0,0), (0.5,0,0,0) and
    // the zero vector (distance and angle invert).
    const FeatureTuple whole{0.0, 0.0, 1.0, 0.0};
    const FeatureTuple half{0.5, 0.0, 1.0, 0.0};
    const FeatureTuple null_vec{1.0, 0.0, 1.0, 0.0};
    auto ranked = weighted_fitness_sort(
        std::vector<FeatureTuple>{null_vec, half, whole}, fm);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].score == doctest::Approx(1.0));
    CHECK(ranked[0].features == whole);
    CHECK(ranked[1].score == doctest::Approx(0.25));
    CHECK(ranked[1].features == half);
    CHECK(ranked[2].score == doctest::Approx(0.0));
    CHECK(ranked[2].features == null_vec);
}

TEST_CASE("weighted sort matches the explicit-loop oracle on random data") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FitnessMatrix fm;
    fm.factor = identity4();
    fm.m = random_psd(rng);
    fm.normalization = road_ranges();

    std::vector<FeatureTuple> tuples;
    for (int i = 0; i < 200; ++i) {
        tuples.push_back(FeatureTuple{unit(rng) * 150.0,
                                      -30.0 + unit(rng) * 60.0,
                                      unit(rng) * 180.0, unit(rng) * 3.0});
    }

    // Oracle: normalize by hand, evaluate the quadratic form naively,
    // argsort descending.
    std::vector<double> scores;
    double max_score = 0.0;
    for (const FeatureTuple& t : tuples) {
        std::array<double, 4> raw{t.d, t.v, t.r, t.c};
        std::array<double, 4> x;
        for (int a = 0; a < 4; ++a) {
            const auto& r = fm.normalization.ranges[a];
            double u = (raw[a] - r.min) / (r.max - r.min);
            u = std::clamp(u, 0.0, 1.0);
            x[a] = (a == 0 || a == 2) ? 1.0 - u : u;
        }
        scores.push_back(naive_quadratic(fm.m, x));
        max_score = std::max(max_score, scores.back());
    }
    fm.score_scale = max_score;

    std::vector<std::size_t> oracle_order(tuples.size());
    for (std::size_t i = 0; i < oracle_order.size(); ++i) oracle_order[i] = i;
    std::stable_sort(oracle_order.begin(), oracle_order.end(),
                     [&scores](std::size_t a, std::size_t b) {
                         return scores[a] > scores[b];
                     });

    auto ranked = weighted_fitness_sort(tuples, fm);
    REQUIRE(ranked.size() == tuples.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].source_index == oracle_order[i]);
        CHECK(ranked[i].score ==
              doctest::Approx(scores[oracle_order[i]] / max_score)
                  .epsilon(1e-9));
    }
}

TEST_CASE("weighted sort rejects non-finite features") {
    FitnessMatrix fm = identity_metric(unit_ranges());
    std::vector<FeatureTuple> tuples{
        {0.5, 0.5, 0.5, 0.5},
        {std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(weighted_fitness_sort(tuples, fm), NonFiniteFeature);
}

TEST_CASE("quadratic form is nonnegative under PSD metrics and scales as a^2") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix4 m = random_psd(rng);
        const Vec4 x{u(rng), u(rng), u(rng), u(rng)};
        const double f = quadratic_form(m, x);
        CHECK(f >= -1e-12);

        const double alpha = 0.25 + 3.0 * std::abs(u(rng));
        Vec4 scaled;
        for (int i = 0; i < 4; ++i) scaled[i] = alpha * x[i];
        CHECK(quadratic_form(m, scaled) ==
              doctest::Approx(alpha * alpha * f).epsilon(1e-9));
    }
}

TEST_CASE("uniform feature scaling leaves the ranking unchanged") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Matrix4 m = random_psd(rng);

    std::vector<Vec4> points;
    for (int i = 0; i < 50; ++i) {
        points.push_back(Vec4{u(rng), u(rng), u(rng), u(rng)});
    }
    auto order_for = [&](double alpha) {
        std::vector<std::size_t> order(points.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             Vec4 xa, xb;
                             for (int k = 0; k < 4; ++k) {
                                 xa[k] = alpha * points[a][k];
                                 xb[k] = alpha * points[b][k];
                             }
                             return quadratic_form(m, xa) >
                                    quadratic_form(m, xb);
                         });
        return order;
    };
    CHECK(order_for(1.0) == order_for(4.5));
}

TEST_CASE("fitness distance: zero, symmetry, identity metric, oracle") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    FitnessMatrix ident = identity_metric(unit_ranges());

    const FeatureTuple p{1.0, 2.0, 3.0, 4.0};
    CHECK(fitness_distance(p, p, ident) == 0.0);

    const FeatureTuple q{2.0, 0.0, 5.0, 1.0};
    // Identity metric reduces to the squared Euclidean distance.
    CHECK(fitness_distance(p, q, ident) ==
          doctest::Approx(1.0 + 4.0 + 4.0 + 9.0));

    FitnessMatrix fm = ident;
    fm.m = random_psd(rng);
    for (int trial = 0; trial < 50; ++trial) {
        const FeatureTuple a{u(rng), u(rng), u(rng), u(rng)};
        const FeatureTuple b{u(rng), u(rng), u(rng), u(rng)};
        const std::array<double, 4> diff{a.d - b.d, a.v - b.v, a.r - b.r,
                                         a.c - b.c};
        CHECK(fitness_distance(a, b, fm) ==
              doctest::Approx(naive_quadratic(fm.m, diff)).epsilon(1e-9));
        CHECK(fitness_distance(a, b, fm) ==
              doctest::Approx(fitness_distance(b, a, fm)));
    }
}

}  // TEST_SUITE
